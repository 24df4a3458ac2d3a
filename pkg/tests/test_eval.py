import pytest

from linkforge.corpus import Corpus, save_corpus
from linkforge.eval import (DEFAULT_THETA_REFS, DEFAULT_THETA_TITLES, NOISELESS, GroundTruth, NoiseSpec,
                            evaluate, generate_benchmark, load_pairs, save_pairs, sweep_cmm, training_pairs,
                            write_sweep_csv)
from linkforge.experiment import build_matcher, load_sample
from linkforge.index import paper_index
from linkforge.matcher import MatcherConfig, MatchResult, Mode, Provenance, batch_match


def _m(t, r, prov=Provenance.HMM):
    return MatchResult(t, r, prov, 1.0)


TRUTH = GroundTruth(frozenset({("t1", "r1"), ("t2", "r2"), ("t3", "r3"), ("t4", "r4")}), frozenset({"t5"}))


def test_evaluate_examples():
    exact = evaluate([_m(t, r) for t, r in TRUTH.pairs], TRUTH)
    assert (exact.precision, exact.recall, exact.f1) == (1.0, 1.0, 1.0)
    empty = evaluate([], TRUTH)
    assert (empty.precision, empty.recall, empty.f1) == (1.0, 0.0, 0.0)
    some = evaluate([_m("t1", "r1"), _m("t2", "r2", Provenance.CMM_BOW), _m("t5", "r9")], TRUTH)
    assert (some.precision, some.recall, some.f1) == pytest.approx((2 / 3, 1 / 2, 4 / 7))
    assert (some.tp, some.fp, some.fn) == (2, 1, 2)
    assert some.by_provenance == {"cmm_bow": {"tp": 1, "fp": 0}, "hmm": {"tp": 1, "fp": 1}}


def test_evaluate_subset():
    rep = evaluate([_m("t1", "r1"), _m("t5", "r9")], TRUTH, target_ids=["t1", "t2"])
    assert (rep.tp, rep.fp, rep.fn) == (1, 0, 1)


def test_ground_truth_io_and_validation(tmp_path):
    TRUTH.save(tmp_path / "truth.jsonl")
    assert GroundTruth.load(tmp_path / "truth.jsonl") == TRUTH
    with pytest.raises(ValueError):
        GroundTruth(frozenset({("t1", "r1")}), frozenset({"t1"}))


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(title_garbage_prob=1.5)
    with pytest.raises(ValueError):
        NoiseSpec.from_mapping({"nonsense": 1})
    assert NoiseSpec.from_mapping({"seed": 3}).seed == 3


def test_benchmark_shape(bench):
    assert len(bench.reference) == 1000
    assert len(bench.truth.pairs) == 300 and len(bench.truth.unmatched_targets) == 100
    assert len(bench.target) == 400
    held_out = {r.id for r in load_sample()} - set(bench.reference.ids)
    assert len(held_out) == 100
    assert all(r in bench.reference for _, r in bench.truth.pairs)


def test_benchmark_is_deterministic(tmp_path):
    clean = Corpus(list(load_sample())[:300])
    paths = []
    for n in range(2):
        target, reference, truth = generate_benchmark(clean, NoiseSpec(seed=9), n_unmatched=30)
        paths.append((tmp_path / f"t{n}.jsonl", tmp_path / f"g{n}.jsonl"))
        save_corpus(target, paths[-1][0])
        truth.save(paths[-1][1])
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()


def test_noiseless_benchmark(models):
    clean = Corpus(list(load_sample())[:400])
    target, reference, truth = generate_benchmark(clean, NOISELESS, n_unmatched=40)
    for t, r in truth.pairs:
        assert target[t].title == reference[r].title
    matcher = build_matcher(reference, models)
    results, _ = batch_match(target, matcher, Mode.HMM)
    assert evaluate(results, truth).recall == 1.0


def test_garbage_titles_are_flagged(models):
    clean = Corpus(list(load_sample())[:400])
    target, _, truth = generate_benchmark(clean, NoiseSpec(title_garbage_prob=1.0, seed=3), n_unmatched=40)
    flagged = [models.tem.score(target[t].title).theta < 0.2 for t, _ in truth.pairs]
    assert sum(flagged) / len(flagged) >= 0.95


def test_training_pairs_and_io(bench, tmp_path):
    pairs = training_pairs(bench.target, bench.reference, bench.truth, paper_index(bench.reference),
                           max_negatives=2)
    assert sum(p.label for p in pairs) == len(bench.truth.pairs)
    assert len(pairs) - len(bench.truth.pairs) <= 2 * len(bench.target)
    for suffix in (".csv", ".jsonl"):
        save_pairs(pairs, tmp_path / f"p{suffix}")
        assert load_pairs(tmp_path / f"p{suffix}") == pairs


def test_single_cell_sweep_equals_direct_run(bench, matcher):
    cfg = MatcherConfig(theta_ref=0.6, theta_title=0.25)
    [cell] = sweep_cmm(matcher, bench.target, bench.truth, [0.6], [0.25])
    direct, _ = batch_match(bench.target, matcher.with_config(cfg), Mode.CMM)
    assert cell.report == evaluate(direct, bench.truth)


def test_sweep_trends(sweep_cells, tmp_path):
    at = {(c.theta_ref, c.theta_title): c.report for c in sweep_cells}
    assert len(at) == len(DEFAULT_THETA_REFS) * len(DEFAULT_THETA_TITLES)
    assert all(at[(0.5, 0.35)].f1 >= at[(0.7, tt)].f1 for tt in DEFAULT_THETA_TITLES)
    assert all(at[(0.6, tt)].precision >= at[(0.4, tt)].precision for tt in DEFAULT_THETA_TITLES)
    write_sweep_csv(sweep_cells, tmp_path / "table.csv")
    lines = (tmp_path / "table.csv").read_text().splitlines()
    assert lines[0].startswith("theta_ref,theta_title,precision,recall,f1")
    assert len(lines) == 17
