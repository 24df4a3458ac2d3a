import dataclasses

import numpy as np
import pytest

from linkforge.corpus import CitationRecord, Corpus, PaperRecord, Role
from linkforge.eval import evaluate
from linkforge.index import citation_index, paper_index, query_for_record
from linkforge.matcher import (CmmEvent, Matcher, MatcherConfig, MatchResult, Mode, Provenance, RunStats,
                               batch_match, bow_similarity, cmm_match, decide_cmm, hmm_match,
                               reference_title_bow)
from linkforge.tem import TitleQuality


class StubModel:
    """Duck-typed classifier: probability from a rule over feature vectors."""
    decision_threshold = 0.5

    def __init__(self, rule):
        self.rule = rule
        self.calls = 0

    def score_vectors(self, vectors):
        self.calls += 1
        return np.array([float(self.rule(v)) for v in vectors])


class StubTem:
    def __init__(self, theta):
        self.theta = theta
        self.calls = 0

    def score(self, title):
        self.calls += 1
        return TitleQuality(self.theta)


def _cites(pid, titles):
    return tuple(CitationRecord(f"{pid}#{i}", t, ("A. Writer",), 2000, pid) for i, t in enumerate(titles))


def _matcher(reference, model=None, citation_model=None, tem=None, **cfg):
    return Matcher(reference, paper_index(reference), citation_index(reference), model, citation_model, tem,
                   MatcherConfig(**cfg))


# -- header matching ---------------------------------------------------------------

def test_self_match_with_trained_model(bench, matcher):
    r = next(iter(bench.reference))
    t = dataclasses.replace(r, id="copy")
    got = matcher.hmm_match(t)
    assert (got.target_id, got.reference_id, got.provenance) == ("copy", r.id, Provenance.HMM)
    assert got.score >= matcher.model.decision_threshold


def test_no_query_no_match():
    ref = Corpus([PaperRecord("r", "Anything at all really here", ("Ann Lee",), 2000)])
    m = _matcher(ref, StubModel(lambda v: 1))
    t = PaperRecord("t", "Short")
    assert query_for_record(t) is None
    assert m.hmm_match(t) is None


def test_first_positive_in_rank_order_wins():
    words = "graph mining systems scale fast".split()
    # r1 shares 5 words, r2 four, ..., r5 one; only r2 and r4 have the target's year
    ref = Corpus([PaperRecord(f"r{i}", " ".join(words[:6 - i]) + " extra words", ("Ann Lee",), 2000 if i % 2 == 0 else 1990)
                  for i in range(1, 6)])
    t = PaperRecord("t", " ".join(words), ("Ann Lee",), 2000)
    m = _matcher(ref, StubModel(lambda v: v.year_absdiff == 0))
    ranked = [d for d, _ in m.paper_index.search(query_for_record(t), 10)]
    assert ranked == ["r1", "r2", "r3", "r4", "r5"]
    assert m.hmm_match(t).reference_id == "r2"
    assert hmm_match(t, m.paper_index, ref, m.model).reference_id == "r2"


def test_hmm_requires_components():
    ref = Corpus([PaperRecord("r", "x")])
    with pytest.raises(RuntimeError):
        Matcher(ref).hmm_match(PaperRecord("t", "Long enough title for a query"))


# -- citation matching ---------------------------------------------------------------

_SHARED = "Distinctive Results on Quantum Widget Topology"
_same_title = StubModel(lambda v: v.title_jaccard == 1.0)


def test_cmm_title_match():
    ref = Corpus([
        PaperRecord("r1", "Learning Compact Widget Models", citations=_cites("r1", [_SHARED, "Other Work On Graph Things"])),
        PaperRecord("r2", "Unrelated Packet Systems", citations=_cites("r2", ["Packet Routing in Large Networks"])),
    ])
    t = PaperRecord("t", "Learning Compact Widget Models", citations=_cites("t", [_SHARED]))
    m = _matcher(ref, citation_model=_same_title)
    got = m.cmm_match(t)
    assert got.reference_id == "r1" and got.provenance is Provenance.CMM_TITLE
    assert got.score == 1.0
    assert cmm_match(t, m.citation_index, ref, _same_title).reference_id == "r1"


def _bow_titles(prefix, n):
    return [f"{prefix}{i}a {prefix}{i}b {prefix}{i}c" for i in range(n)]


def test_cmm_bow_match_for_garbage_title():
    ref_titles = _bow_titles("topic", 10)
    ref = Corpus([PaperRecord("r1", "Learning Compact Widget Models", citations=_cites("r1", ref_titles))])
    t_titles = ref_titles[:9] + ["fresh1 fresh2 fresh3"]
    t = PaperRecord("t", "xq#@ 7%% zzv", citations=_cites("t", t_titles))
    assert bow_similarity(reference_title_bow(t), reference_title_bow(ref["r1"])) == pytest.approx(27 / 33)
    got = _matcher(ref, citation_model=_same_title).cmm_match(t)
    assert got.provenance is Provenance.CMM_BOW
    assert got.score == pytest.approx(27 / 33)


def test_cmm_rejects_weak_evidence():
    ref_titles = _bow_titles("topic", 10)
    ref = Corpus([PaperRecord("r1", "Learning Compact Widget Models", citations=_cites("r1", ref_titles))])
    t = PaperRecord("t", None, citations=_cites("t", ref_titles[:1] + _bow_titles("other", 9)))
    assert _matcher(ref, citation_model=_same_title).cmm_match(t) is None


def test_cmm_zero_citations_and_empty_citation_index():
    ref = Corpus([PaperRecord("r1", "Learning Compact Widget Models", citations=_cites("r1", [_SHARED]))])
    m = _matcher(ref, citation_model=_same_title)
    assert m.cmm_match(PaperRecord("t", "Learning Compact Widget Models")) is None
    bare = Corpus([PaperRecord("r1", "Learning Compact Widget Models")])
    t = PaperRecord("t", "Learning Compact Widget Models", citations=_cites("t", [_SHARED]))
    assert _matcher(bare, citation_model=_same_title).cmm_match(t) is None


def test_decide_cmm_order_and_thresholds():
    cfg = MatcherConfig(theta_title=0.35, theta_ref=0.5)
    events = [CmmEvent("a", 0.9, 0.6, 0.4), CmmEvent("b", 0.9, None, 0.7), CmmEvent("c", 0.9, 0.1, 0.0)]
    assert decide_cmm(events, cfg) == ("b", Provenance.CMM_BOW, 0.7)
    assert decide_cmm(events[2:], cfg) == ("c", Provenance.CMM_TITLE, 0.9)
    assert decide_cmm([CmmEvent("a", 0.9, 0.35, 0.5)], cfg) is None  # both tests are strict
    assert decide_cmm([], cfg) is None


# -- integration ---------------------------------------------------------------------

def _imm_setup(theta):
    ref = Corpus([PaperRecord("r1", "Learning Compact Widget Models", ("Ann Lee",), 2001,
                              citations=_cites("r1", [_SHARED]))])
    never = StubModel(lambda v: 0)
    tem = StubTem(theta)
    return _matcher(ref, model=never, citation_model=_same_title, tem=tem), tem


def test_imm_hmm_hit_short_circuits(bench, matcher):
    r = next(iter(bench.reference))
    stats = RunStats()
    got = matcher.imm_match(dataclasses.replace(r, id="copy"), stats)
    assert got.provenance is Provenance.HMM
    assert stats.cmm_invoked == 0 and stats.tem_scored == 0


def test_imm_high_quality_title_skips_cmm():
    m, tem = _imm_setup(0.9)
    stats = RunStats()
    t = PaperRecord("t", "Learning Compact Widget Models", citations=_cites("t", [_SHARED]))
    assert m.imm_match(t, stats) is None
    assert tem.calls == 1 and stats.cmm_invoked == 0


def test_imm_low_quality_title_uses_cmm():
    m, _ = _imm_setup(0.01)
    stats = RunStats()
    t = PaperRecord("t", "Learning Compact Widget Models", citations=_cites("t", [_SHARED]))
    got = m.imm_match(t, stats)
    assert got.provenance is Provenance.CMM_TITLE
    assert stats.tem_gated == 1 and stats.cmm_invoked == 1


def test_config_validation():
    with pytest.raises(ValueError):
        MatcherConfig(k_candidates=0)
    with pytest.raises(ValueError):
        MatcherConfig(theta_ref=1.5)


def test_match_result_roundtrip():
    r = MatchResult("t", "r", Provenance.CMM_BOW, 0.75)
    assert MatchResult.from_dict(r.to_dict()) == r
    assert r.to_dict() == {"target_id": "t", "reference_id": "r", "provenance": "cmm_bow", "score": 0.75}


# -- batch ------------------------------------------------------------------------------

def test_batch_empty(matcher):
    results, stats = batch_match(Corpus([], Role.TARGET), matcher, Mode.IMM)
    assert results == []
    assert stats.records == 0 and stats.matched == 0


def test_batch_modes_on_benchmark(bench, matcher):
    hmm, hs = batch_match(bench.target, matcher, Mode.HMM)
    imm, ims = batch_match(bench.target, matcher, Mode.IMM)
    cmm, _ = batch_match(bench.target, matcher, Mode.CMM, workers=2)
    assert set(hmm) <= set(imm)
    assert evaluate(imm, bench.truth).recall >= evaluate(hmm, bench.truth).recall
    for results in (hmm, imm, cmm):
        ids = [r.target_id for r in results]
        assert len(ids) == len(set(ids))
        assert ids == [t.id for t in bench.target if t.id in set(ids)]  # input order
    assert hs.records == ims.records == len(bench.target)
    assert ims.tem_gated <= ims.tem_scored == len(bench.target) - len(hmm)


def test_batch_worker_count_does_not_change_results(bench, matcher):
    one, _ = batch_match(bench.target, matcher, Mode.IMM, workers=1)
    four, _ = batch_match(bench.target, matcher, Mode.IMM, workers=4, chunk_size=16)
    assert one == four


def test_batch_survives_record_failures(bench):
    ref = Corpus([PaperRecord("r1", "Learning Compact Widget Models", ("Ann Lee",), 2001)])

    def explode(v):
        raise RuntimeError("boom")
    m = _matcher(ref, model=StubModel(explode))
    targets = Corpus([PaperRecord("a", "Learning Compact Widget Models"), PaperRecord("b", "tiny")], Role.TARGET)
    results, stats = batch_match(targets, m, Mode.HMM)
    assert results == [] and stats.failures == 1 and stats.records == 2
