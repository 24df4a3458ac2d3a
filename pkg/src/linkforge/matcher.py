"""Header, citation and integrated matching over whole corpora.

``hmm_match`` classifies BM25 candidates in rank order and keeps the first
positive. ``cmm_match`` links papers through a shared citation and then
confirms the owning paper by title distance or by the overlap of the two
papers' reference-title vocabularies. ``imm_match`` runs the header
matcher first and falls back to citations only for low-quality titles.
"""
from __future__ import annotations

import concurrent.futures as cf
import enum
import logging
import multiprocessing as mp
import time
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .classifier import Model
from .corpus import Corpus, PaperRecord
from .features import header_features
from .index import BlockingIndex, query_for_record
from .tem import TitleEvaluator, is_low_quality
from .textsim import jaccard, normalize_title, simhash_distance

log = logging.getLogger(__name__)


class Provenance(str, enum.Enum):
    HMM = "hmm"
    CMM_TITLE = "cmm_title"
    CMM_BOW = "cmm_bow"


class Mode(str, enum.Enum):
    HMM = "hmm"
    CMM = "cmm"
    IMM = "imm"


@dataclass(frozen=True)
class MatchResult:
    target_id: str
    reference_id: str
    provenance: Provenance
    score: float

    def to_dict(self) -> dict:
        return {"target_id": self.target_id, "reference_id": self.reference_id,
                "provenance": self.provenance.value, "score": self.score}

    @classmethod
    def from_dict(cls, d: dict) -> "MatchResult":
        return cls(d["target_id"], d["reference_id"], Provenance(d["provenance"]), float(d["score"]))


@dataclass(frozen=True)
class MatcherConfig:
    k_candidates: int = 10
    theta_title: float = 0.35
    theta_ref: float = 0.5
    theta_tq: float = 0.2
    use_abstract: bool = True

    def __post_init__(self):
        if self.k_candidates < 1:
            raise ValueError("k_candidates must be >= 1")
        for name in ("theta_title", "theta_ref", "theta_tq"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


@dataclass
class RunStats:
    records: int = 0
    queried: int = 0
    candidates_retrieved: int = 0
    classified_positive: int = 0
    tem_scored: int = 0
    tem_gated: int = 0
    cmm_invoked: int = 0
    citation_queries: int = 0
    matched: int = 0
    failures: int = 0
    wall_time_s: float = 0.0

    def merge(self, other: "RunStats") -> None:
        for name, value in asdict(other).items():
            if name != "wall_time_s":
                setattr(self, name, getattr(self, name) + value)

    def to_dict(self) -> dict:
        return asdict(self)


class CmmEvent(NamedTuple):
    """A classifier-confirmed shared citation pointing at ``reference_id``."""
    reference_id: str
    probability: float
    title_distance: Optional[float]  # None when either title is unusable
    bow_similarity: float


def _title_distance(t_title: Optional[str], r_title: Optional[str]) -> Optional[float]:
    nt = normalize_title(t_title) if t_title else ""
    nr = normalize_title(r_title) if r_title else ""
    if not nt or not nr:
        return None
    return simhash_distance(nt, nr)


def reference_title_bow(rec: PaperRecord) -> frozenset:
    """Set of normalized unigrams over all citation titles of a paper."""
    return frozenset(tok for c in rec.citations if c.title for tok in normalize_title(c.title).split())


def bow_similarity(a: frozenset, b: frozenset) -> float:
    # two papers with no titled citations share no evidence
    if not a or not b:
        return 0.0
    return jaccard(a, b)


def decide_cmm(events: Iterable[CmmEvent], cfg: MatcherConfig) -> Optional[Tuple[str, Provenance, float]]:
    """First event passing the title test, else the reference-title test."""
    for ev in events:
        if ev.title_distance is not None and ev.title_distance < cfg.theta_title:
            return ev.reference_id, Provenance.CMM_TITLE, 1.0 - ev.title_distance
        if ev.bow_similarity > cfg.theta_ref:
            return ev.reference_id, Provenance.CMM_BOW, ev.bow_similarity
    return None


class Matcher:
    """Shared, read-only state for matching target records against a reference corpus."""

    def __init__(self, reference: Corpus, paper_index: Optional[BlockingIndex] = None,
                 citation_index: Optional[BlockingIndex] = None, model: Optional[Model] = None,
                 citation_model: Optional[Model] = None, tem: Optional[TitleEvaluator] = None,
                 cfg: MatcherConfig = MatcherConfig()):
        self.reference = reference
        self.paper_index = paper_index
        self.citation_index = citation_index
        self.model = model
        self.citation_model = citation_model or model
        self.tem = tem
        self.cfg = cfg
        self._bow_cache: Dict[str, frozenset] = {}

    def with_config(self, cfg: MatcherConfig) -> "Matcher":
        other = Matcher(self.reference, self.paper_index, self.citation_index, self.model,
                        self.citation_model, self.tem, cfg)
        other._bow_cache = self._bow_cache
        return other

    def _bow(self, rec: PaperRecord) -> frozenset:
        bow = self._bow_cache.get(rec.id)
        if bow is None:
            bow = self._bow_cache[rec.id] = reference_title_bow(rec)
        return bow

    # -- header matching ---------------------------------------------------

    def hmm_match(self, t: PaperRecord, stats: Optional[RunStats] = None) -> Optional[MatchResult]:
        stats = stats if stats is not None else RunStats()
        if self.paper_index is None or self.model is None:
            raise RuntimeError("header matching needs a paper index and a model")
        query = query_for_record(t)
        if query is None:
            return None
        stats.queried += 1
        hits = self.paper_index.search(query, self.cfg.k_candidates)
        stats.candidates_retrieved += len(hits)
        if not hits:
            return None
        vectors = [header_features(t, self.reference[rid], self.cfg.use_abstract) for rid, _ in hits]
        probs = self.model.score_vectors(vectors)
        for (rid, _), p in zip(hits, probs):
            if p >= self.model.decision_threshold:
                stats.classified_positive += 1
                return MatchResult(t.id, rid, Provenance.HMM, float(p))
        return None

    # -- citation matching -------------------------------------------------

    def cmm_events(self, t: PaperRecord, stats: Optional[RunStats] = None) -> Iterator[CmmEvent]:
        """Lazily yield confirmed shared citations in citation then rank order."""
        stats = stats if stats is not None else RunStats()
        if self.citation_index is None or self.citation_model is None:
            raise RuntimeError("citation matching needs a citation index and a model")
        t_bow = None
        model = self.citation_model
        for tc in t.citations:
            query = query_for_record(tc)
            if query is None:
                continue
            stats.citation_queries += 1
            hits = self.citation_index.search(query, self.cfg.k_candidates)
            if not hits:
                continue
            rcs = [self.reference.citation(cid) for cid, _ in hits]
            probs = model.score_vectors([header_features(tc, rc, use_abstract=False) for rc in rcs])
            for rc, p in zip(rcs, probs):
                if p < model.decision_threshold:
                    continue
                owner = self.reference[rc.cited_by]
                if t_bow is None:
                    t_bow = reference_title_bow(t)
                yield CmmEvent(owner.id, float(p), _title_distance(t.title, owner.title),
                               bow_similarity(t_bow, self._bow(owner)))

    def cmm_match(self, t: PaperRecord, stats: Optional[RunStats] = None) -> Optional[MatchResult]:
        stats = stats if stats is not None else RunStats()
        stats.cmm_invoked += 1
        found = decide_cmm(self.cmm_events(t, stats), self.cfg)
        if found is None:
            return None
        return MatchResult(t.id, found[0], found[1], found[2])

    # -- integration -------------------------------------------------------

    def imm_match(self, t: PaperRecord, stats: Optional[RunStats] = None) -> Optional[MatchResult]:
        stats = stats if stats is not None else RunStats()
        found = self.hmm_match(t, stats)
        if found is not None:
            return found
        if self.tem is None:
            raise RuntimeError("integrated matching needs a title evaluator")
        stats.tem_scored += 1
        if not is_low_quality(self.tem.score(t.title), self.cfg.theta_tq):
            return None
        stats.tem_gated += 1
        return self.cmm_match(t, stats)

    def match(self, t: PaperRecord, mode: Mode, stats: Optional[RunStats] = None) -> Optional[MatchResult]:
        mode = Mode(mode)
        if mode is Mode.HMM:
            return self.hmm_match(t, stats)
        if mode is Mode.CMM:
            return self.cmm_match(t, stats)
        return self.imm_match(t, stats)


def hmm_match(t: PaperRecord, ref_index: BlockingIndex, ref_corpus: Corpus, model: Model,
              cfg: MatcherConfig = MatcherConfig()) -> Optional[MatchResult]:
    return Matcher(ref_corpus, paper_index=ref_index, model=model, cfg=cfg).hmm_match(t)


def cmm_match(t: PaperRecord, citation_index: BlockingIndex, ref_corpus: Corpus, citation_model: Model,
              cfg: MatcherConfig = MatcherConfig()) -> Optional[MatchResult]:
    return Matcher(ref_corpus, citation_index=citation_index, citation_model=citation_model,
                   cfg=cfg).cmm_match(t)


def imm_match(t: PaperRecord, matcher: Matcher) -> Optional[MatchResult]:
    return matcher.imm_match(t)


# -- batch ------------------------------------------------------------------

_WORKER: Dict[str, object] = {}


def _match_one(matcher: Matcher, rec: PaperRecord, mode: Mode):
    stats = RunStats(records=1)
    try:
        result = matcher.match(rec, mode, stats)
    except Exception:  # one bad record must not end a long batch
        log.exception("matching failed for target %s", rec.id)
        stats.failures += 1
        result = None
    if result is not None:
        stats.matched += 1
    return result, stats


def _match_chunk(chunk: Sequence[PaperRecord]):
    matcher, mode = _WORKER["matcher"], _WORKER["mode"]
    return [_match_one(matcher, rec, mode) for rec in chunk]


def batch_match(target: Iterable[PaperRecord], matcher: Matcher, mode: Mode = Mode.IMM,
                workers: int = 1, chunk_size: int = 32) -> Tuple[List[MatchResult], RunStats]:
    """Match every target record; results keep target input order.

    With ``workers > 1`` records are split over forked processes that
    share the matcher read-only. Each record is matched independently, so
    the result does not depend on the worker count.
    """
    mode = Mode(mode)
    records = list(target)
    start = time.perf_counter()
    if workers > 1 and len(records) > chunk_size:
        chunks = [records[i:i + chunk_size] for i in range(0, len(records), chunk_size)]
        _WORKER.update(matcher=matcher, mode=mode)
        try:
            ctx = mp.get_context("fork")
            with cf.ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                outcomes = [o for part in pool.map(_match_chunk, chunks) for o in part]
        finally:
            _WORKER.clear()
    else:
        outcomes = [_match_one(matcher, rec, mode) for rec in records]
    stats = RunStats()
    results = []
    for result, s in outcomes:
        stats.merge(s)
        if result is not None:
            results.append(result)
    stats.wall_time_s = time.perf_counter() - start
    return results, stats
