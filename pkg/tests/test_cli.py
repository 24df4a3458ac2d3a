import csv
import io
import json

import pytest

from linkforge import __version__
from linkforge.cli import main
from linkforge.corpus import Corpus, save_corpus
from linkforge.experiment import load_sample, titles_path


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A small benchmark plus trained models, built through the CLI."""
    d = tmp_path_factory.mktemp("cli")
    save_corpus(Corpus(list(load_sample())[:200]), d / "clean.jsonl")
    (d / "noise.toml").write_text("seed = 5\ntitle_garbage_prob = 0.3\n")
    steps = [
        ["bench", "generate", "--clean", str(d / "clean.jsonl"), "--spec", str(d / "noise.toml"),
         "--unmatched", "20", "--out", str(d / "bench")],
        ["index", "--input", str(d / "bench/reference.jsonl"), "--field", "citations", "--out", str(d / "cite.idx")],
        ["bench", "pairs", "--target", str(d / "bench/target.jsonl"), "--reference", str(d / "bench/reference.jsonl"),
         "--truth", str(d / "bench/truth.jsonl"), "--out", str(d / "pairs.csv")],
        ["train", "--pairs", str(d / "pairs.csv"), "--hp", "n_trees=20", "--seed", "1", "--out", str(d / "m.bin")],
        ["train", "--target", str(d / "bench/target.jsonl"), "--reference", str(d / "bench/reference.jsonl"),
         "--truth", str(d / "bench/truth.jsonl"), "--no-abstract", "--hp", "n_trees=20", "--out", str(d / "c.bin")],
        ["tem", "train", "--good", str(titles_path()), "--synthetic-bad", "200", "--df", str(titles_path()),
         "--seed", "2", "--out", str(d / "tem.bin")],
    ]
    for argv in steps:
        assert main(argv) == 0, argv
    return d


def _bench_args(d):
    return ["--target", str(d / "bench/target.jsonl"), "--reference", str(d / "bench/reference.jsonl")]


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "match" in capsys.readouterr().out


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_usage_errors_exit_two(capsys):
    assert main(["match"]) == 2
    assert "--target" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2
    assert main(["index", "--input", "x", "--out", "y", "--field", "abstract"]) == 2


def test_operational_error_is_one_json_line(tmp_path, capsys):
    assert main(["evaluate", "--matches", str(tmp_path / "missing.jsonl"), "--truth", str(tmp_path / "t")]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    assert json.loads(err[0])["error"] == "FileNotFoundError"


def test_bench_outputs(workdir):
    b = workdir / "bench"
    assert {p.name for p in b.iterdir()} >= {"target.jsonl", "reference.jsonl", "truth.jsonl", "run.stats.json"}
    side = json.loads((b / "run.stats.json").read_text())
    assert side["noise"]["seed"] == 5 and side["noise"]["title_garbage_prob"] == 0.3
    assert side["version"] == __version__


def test_match_modes_and_sidecar(workdir, capsys):
    d = workdir
    common = _bench_args(d) + ["--model", str(d / "m.bin"), "--citation-model", str(d / "c.bin"),
                               "--tem", str(d / "tem.bin"), "--citation-index", str(d / "cite.idx")]
    for mode in ("hmm", "cmm", "imm"):
        assert main(["match", "--mode", mode, *common, "--out", str(d / f"{mode}.jsonl")]) == 0
        rows = [json.loads(x) for x in (d / f"{mode}.jsonl").read_text().splitlines()]
        assert all(set(r) == {"target_id", "reference_id", "provenance", "score"} for r in rows)
    side = json.loads((d / "imm.jsonl.stats.json").read_text())
    assert side["config"]["theta_tq"] == 0.2 and side["config"]["mode"] == "imm"
    assert side["stats"]["records"] == 54 + 20  # round(0.3 * 180) matched, 20 held out
    capsys.readouterr()
    assert main(["evaluate", "--matches", str(d / "imm.jsonl"), "--truth", str(d / "bench/truth.jsonl")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["precision"] >= 0.9


def test_match_with_wrong_index_kind_fails(workdir):
    d = workdir
    assert main(["match", "--mode", "hmm", *_bench_args(d), "--model", str(d / "m.bin"),
                 "--index", str(d / "cite.idx"), "--out", str(d / "x.jsonl")]) == 1


def test_imm_needs_all_models(workdir):
    assert main(["match", "--mode", "imm", *_bench_args(workdir), "--model", str(workdir / "m.bin"),
                 "--out", str(workdir / "x.jsonl")]) == 2


def test_config_file_and_flag_precedence(workdir):
    d = workdir
    (d / "run.toml").write_text("theta_tq = 0.0\n[match]\nk = 3\nworkers = 2\n")
    argv = ["--config", str(d / "run.toml"), "match", "--mode", "imm", *_bench_args(d),
            "--model", str(d / "m.bin"), "--citation-model", str(d / "c.bin"), "--tem", str(d / "tem.bin"),
            "--k", "7", "--out", str(d / "cfg.jsonl")]
    assert main(argv) == 0
    cfg = json.loads((d / "cfg.jsonl.stats.json").read_text())["config"]
    assert (cfg["theta_tq"], cfg["k"], cfg["workers"]) == (0.0, 7, 2)
    # with the gate closed the integrated run equals header matching
    assert main(["match", "--mode", "hmm", *_bench_args(d), "--model", str(d / "m.bin"), "--k", "7",
                 "--out", str(d / "h.jsonl")]) == 0
    assert (d / "cfg.jsonl").read_text() == (d / "h.jsonl").read_text()


def test_config_unknown_key(workdir):
    (workdir / "bad.toml").write_text("[evaluate]\nbogus = 1\n")
    assert main(["--config", str(workdir / "bad.toml"), "evaluate", "--matches", "a", "--truth", "b"]) == 2


def test_config_supplies_required_flags(workdir):
    d = workdir
    (d / "eval.toml").write_text(f'[evaluate]\nmatches = "{d / "hmm.jsonl"}"\ntruth = "{d / "bench/truth.jsonl"}"\n')
    assert main(["--config", str(d / "eval.toml"), "evaluate", "--out", str(d / "rep.json")]) == 0
    assert "f1" in json.loads((d / "rep.json").read_text())


def test_tem_score(workdir, capsys):
    assert main(["tem", "score", "--model", str(workdir / "tem.bin"), "--title",
                 "Efficient Query Processing for Large Graph Databases", "--title", "ÐÐÐ ÐÐÐÐ ÐÐ"]) == 0
    rows = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [r["low_quality"] for r in rows] == [False, True]


def test_features_dump(workdir, capsys):
    d = workdir
    pair = json.loads((d / "bench/truth.jsonl").read_text().splitlines()[0])
    assert main(["features", "dump", *_bench_args(d), "--pair", pair["target_id"], pair["reference_id"]]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1 and rows[0]["target_id"] == pair["target_id"]
    assert 0.0 <= float(rows[0]["title_jaccard"]) <= 1.0


def test_crossval_and_sweep(workdir, capsys):
    d = workdir
    assert main(["crossval", "--pairs", str(d / "pairs.csv"), "--k-folds", "3", "--hp", "n_trees=10",
                 "--info-gain"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["cv"]["k"] == 3 and len(out["information_gain"]) == 10
    assert main(["sweep", *_bench_args(d), "--truth", str(d / "bench/truth.jsonl"),
                 "--citation-model", str(d / "c.bin"), "--grid", "0.5,0.6:0.35", "--out", str(d / "t.csv")]) == 0
    assert len((d / "t.csv").read_text().splitlines()) == 3
    assert main(["sweep", *_bench_args(d), "--truth", str(d / "bench/truth.jsonl"),
                 "--citation-model", str(d / "c.bin"), "--grid", "nonsense", "--out", str(d / "t.csv")]) == 2
