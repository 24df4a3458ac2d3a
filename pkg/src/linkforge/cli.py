"""Command-line entry point.

Settings come from flags and an optional TOML file given with
``--config``. Top-level keys apply to every subcommand, and a table named
after the subcommand (``[match]``, ``[tem.train]``) applies to that one only.
Flags always win. Each run that writes an output file also writes
``<out>.stats.json`` with the effective settings and the tool version.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .classifier import (FOREST_GRID, LabeledPair, Model, cross_validate, grid_search,
                         information_gain, train)
from .corpus import Corpus, Role, load_corpus, save_corpus
from .eval import (DEFAULT_THETA_REFS, DEFAULT_THETA_TITLES, GroundTruth, NoiseSpec, evaluate,
                   generate_benchmark, load_pairs, save_pairs, sweep_cmm, training_pairs,
                   write_sweep_csv)
from .features import FEATURE_NAMES, header_features
from .index import K1, B, BlockingIndex, IndexKind, citation_index, paper_index
from .matcher import Matcher, MatcherConfig, MatchResult, Mode, batch_match
from .synth import JunkConfig
from .tem import (TitleEvaluator, build_df_table, is_low_quality, synthetic_labeled_titles,
                  tem_training_pairs, train_tem)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("linkforge")

_INTERNAL = {"func", "_parser", "_required", "_command"}


class UsageError(Exception):
    pass


# -- small io helpers ----------------------------------------------------------

def _read_lines(path) -> List[str]:
    return [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _effective(args) -> Dict[str, Any]:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _INTERNAL:
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _sidecar(args, out_path, **extra) -> Optional[Path]:
    """Record the effective settings of this run next to its output."""
    path = args.stats
    if path is None and out_path is not None:
        out_path = Path(out_path)
        path = out_path / "run.stats.json" if out_path.is_dir() else Path(f"{out_path}.stats.json")
    if path is None:
        return None
    _write_json({"tool": "linkforge", "version": __version__, "command": args._command,
                 "config": _effective(args), **extra}, path)
    return Path(path)


def _matcher_cfg(args) -> MatcherConfig:
    return MatcherConfig(k_candidates=args.k, theta_title=args.theta_title, theta_ref=args.theta_ref,
                         theta_tq=args.theta_tq, use_abstract=not args.no_abstract)


def _load_index(path, corpus: Corpus, kind: IndexKind) -> BlockingIndex:
    if path is not None:
        idx = BlockingIndex.load(path)
        if idx.kind != kind:
            raise ValueError(f"{path}: expected a {kind.value} index, found {idx.kind.value}")
        return idx
    return paper_index(corpus) if kind is IndexKind.PAPERS else citation_index(corpus)


def _hyperparams(pairs: Sequence[str]) -> Dict[str, Any]:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"--hp expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _pair_data(args) -> List[LabeledPair]:
    if args.pairs is not None:
        return load_pairs(args.pairs)
    missing = [f for f in ("target", "reference", "truth") if getattr(args, f) is None]
    if missing:
        raise UsageError("give --pairs or all of --target/--reference/--truth")
    target = load_corpus(args.target, Role.TARGET)
    reference = load_corpus(args.reference, Role.REFERENCE)
    idx = _load_index(args.index, reference, IndexKind.PAPERS)
    return training_pairs(target, reference, GroundTruth.load(args.truth), idx, k=args.k,
                          use_abstract=not args.no_abstract, max_negatives=args.max_negatives)


# -- commands ------------------------------------------------------------------

def cmd_index(args) -> int:
    corpus = load_corpus(args.input, Role.REFERENCE)
    build = paper_index if args.field == "title" else citation_index
    idx = build(corpus, k1=args.k1, b=args.b)
    idx.save(args.out)
    summary = {"records": len(corpus), "field": args.field, "out": str(args.out)}
    _sidecar(args, args.out, summary=summary)
    _print_json(summary)
    return 0


def cmd_train(args) -> int:
    data = _pair_data(args)
    model = train(data, args.kind, _hyperparams(args.hp), seed=args.seed, workers=args.workers,
                  decision_threshold=args.threshold)
    model.save(args.out)
    summary = {"pairs": len(data), "positives": sum(p.label for p in data), "kind": args.kind,
               "hyperparams": model.hyperparams, "out": str(args.out)}
    _sidecar(args, args.out, summary=summary)
    _print_json(summary)
    return 0


def cmd_crossval(args) -> int:
    data = _pair_data(args)
    result: Dict[str, Any] = {}
    if args.grid == "default":
        if args.kind != "forest":
            raise UsageError("the default grid is defined for --kind forest")
        hp, report = grid_search(data, args.kind, FOREST_GRID, k=args.k_folds, seed=args.seed,
                                 workers=args.workers)
        result["best_hyperparams"] = hp
    else:
        report = cross_validate(data, args.kind, _hyperparams(args.hp), k=args.k_folds,
                                seed=args.seed, workers=args.workers)
    result["cv"] = report.to_dict()
    if args.info_gain:
        result["information_gain"] = [[n, g] for n, g in information_gain(data)]
    if args.out is not None:
        _write_json(result, args.out)
    _sidecar(args, args.out, summary=result)
    _print_json(result)
    return 0


def cmd_tem_train(args) -> int:
    good = _read_lines(args.good)
    df = build_df_table(_read_lines(args.df))
    junk = JunkConfig(args.junk_null, args.junk_nonascii, args.junk_irrelevant, args.junk_scrambled)
    labeled = synthetic_labeled_titles(good, args.synthetic_bad, seed=args.seed,
                                       noisy_good_frac=args.noisy_good_frac, junk=junk)
    tem = train_tem(labeled, df, _hyperparams(args.hp), seed=args.seed)
    tem.save(args.out)
    summary: Dict[str, Any] = {"good": len(good), "bad": args.synthetic_bad, "df_docs": df.total_docs,
                               "out": str(args.out)}
    if args.cv:
        summary["cv"] = cross_validate(tem_training_pairs(labeled, df), "logreg",
                                       _hyperparams(args.hp), k=args.cv, seed=args.seed).to_dict()
    _sidecar(args, args.out, summary=summary)
    _print_json(summary)
    return 0


def cmd_tem_score(args) -> int:
    tem = TitleEvaluator.load(args.model)
    titles = list(args.title or [])
    if args.input is not None:
        titles += Path(args.input).read_text(encoding="utf-8").splitlines()
    if not titles:
        raise UsageError("give --title or --input")
    rows = []
    for title in titles:
        q = tem.score(title)
        rows.append({"title": title, "theta": q.theta, "low_quality": is_low_quality(q, args.theta_tq)})
    if args.out is not None:
        with Path(args.out).open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    else:
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
    _sidecar(args, args.out)
    return 0


def cmd_match(args) -> int:
    mode = Mode(args.mode)
    if mode in (Mode.CMM, Mode.IMM) and args.citation_model is None:
        raise UsageError(f"--mode {mode.value} needs --citation-model")
    if mode is Mode.IMM and args.tem is None:
        raise UsageError("--mode imm needs --tem")
    if mode in (Mode.HMM, Mode.IMM) and args.model is None:
        raise UsageError(f"--mode {mode.value} needs --model")
    cfg = _matcher_cfg(args)
    target = load_corpus(args.target, Role.TARGET)
    reference = load_corpus(args.reference, Role.REFERENCE)
    papers = _load_index(args.index, reference, IndexKind.PAPERS) if mode is not Mode.CMM else None
    cites = _load_index(args.citation_index, reference, IndexKind.CITATIONS) if mode is not Mode.HMM else None
    matcher = Matcher(reference, papers, cites,
                      Model.load(args.model) if args.model else None,
                      Model.load(args.citation_model) if args.citation_model else None,
                      TitleEvaluator.load(args.tem) if args.tem else None, cfg)
    results, stats = batch_match(target, matcher, mode, workers=args.workers)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict()) + "\n")
    _sidecar(args, args.out, stats=stats.to_dict())
    _print_json({"records": stats.records, "matched": stats.matched, "failures": stats.failures,
                 "out": str(args.out)})
    return 0


def cmd_bench_generate(args) -> int:
    if args.clean is not None:
        clean = load_corpus(args.clean, Role.REFERENCE)
    else:
        from .experiment import load_sample
        clean = load_sample()
    values = tomllib.loads(Path(args.spec).read_text(encoding="utf-8")) if args.spec else {}
    if args.seed is not None:
        values["seed"] = args.seed
    spec = NoiseSpec.from_mapping(values)
    target, reference, truth = generate_benchmark(clean, spec, args.match_frac, args.unmatched)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(target, out / "target.jsonl")
    save_corpus(reference, out / "reference.jsonl")
    truth.save(out / "truth.jsonl")
    summary = {"target": len(target), "reference": len(reference),
               "matched": len(truth.pairs), "unmatched": len(truth.unmatched_targets), "out": str(out)}
    _sidecar(args, out, noise=vars(spec), summary=summary)
    _print_json(summary)
    return 0


def cmd_bench_pairs(args) -> int:
    args.pairs = None
    data = _pair_data(args)
    save_pairs(data, args.out)
    summary = {"pairs": len(data), "positives": sum(p.label for p in data), "out": str(args.out)}
    _sidecar(args, args.out, summary=summary)
    _print_json(summary)
    return 0


def cmd_evaluate(args) -> int:
    with Path(args.matches).open(encoding="utf-8") as fh:
        matches = [MatchResult.from_dict(json.loads(ln)) for ln in fh if ln.strip()]
    report = evaluate(matches, GroundTruth.load(args.truth))
    if args.out is not None:
        _write_json(report.to_dict(), args.out)
    _sidecar(args, args.out)
    _print_json(report.to_dict())
    return 0


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    if args.grid == "default":
        refs, titles = DEFAULT_THETA_REFS, DEFAULT_THETA_TITLES
    else:
        try:
            r, t = args.grid.split(":")
            refs, titles = _floats(r), _floats(t)
        except ValueError:
            raise UsageError("--grid is 'default' or 'REFS:TITLES', e.g. 0.4,0.5:0.25,0.35") from None
    target = load_corpus(args.target, Role.TARGET)
    reference = load_corpus(args.reference, Role.REFERENCE)
    cites = _load_index(args.citation_index, reference, IndexKind.CITATIONS)
    matcher = Matcher(reference, None, cites, None, Model.load(args.citation_model), None,
                      MatcherConfig(k_candidates=args.k))
    cells = sweep_cmm(matcher, target, GroundTruth.load(args.truth), refs, titles)
    write_sweep_csv(cells, args.out)
    best = max(cells, key=lambda c: c.report.f1)
    summary = {"cells": len(cells), "best": {"theta_ref": best.theta_ref, "theta_title": best.theta_title,
                                             "f1": best.report.f1}, "out": str(args.out)}
    _sidecar(args, args.out, summary=summary)
    _print_json(summary)
    return 0


def cmd_features_dump(args) -> int:
    target = load_corpus(args.target, Role.TARGET)
    reference = load_corpus(args.reference, Role.REFERENCE)
    lines = [",".join(["target_id", "reference_id", *FEATURE_NAMES])]
    for tid, rid in args.pair:
        v = header_features(target[tid], reference[rid], use_abstract=not args.no_abstract)
        lines.append(",".join([tid, rid, *(repr(x) for x in v.as_array().tolist())]))
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    _sidecar(args, args.out)
    return 0


# -- parser --------------------------------------------------------------------

def _leaf(subparsers, name: str, command: str, func, required: Sequence[str] = (), **kw):
    p = subparsers.add_parser(name, **kw)
    p.set_defaults(func=func, _parser=p, _required=tuple(required), _command=command)
    p.add_argument("--stats", type=Path, default=None, help="sidecar path (default <out>.stats.json)")
    return p


def _add_matcher_flags(p) -> None:
    p.add_argument("--k", type=int, default=10, help="candidates per query")
    p.add_argument("--theta-title", type=float, default=0.35)
    p.add_argument("--theta-ref", type=float, default=0.5)
    p.add_argument("--theta-tq", type=float, default=0.2)
    p.add_argument("--no-abstract", action="store_true", help="mask abstract features")


def _add_pair_source(p) -> None:
    p.add_argument("--pairs", type=Path, help="labeled pairs (.csv or .jsonl)")
    p.add_argument("--target", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--truth", type=Path)
    p.add_argument("--index", type=Path, help="prebuilt title index for the reference")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--max-negatives", type=int, default=3)
    p.add_argument("--no-abstract", action="store_true")


def _add_model_flags(p) -> None:
    p.add_argument("--kind", choices=["forest", "logreg"], default="forest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hp", action="append", metavar="KEY=VALUE", help="hyperparameter override")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkforge", description="Scholarly metadata record linkage.")
    parser.add_argument("--version", action="version", version=f"linkforge {__version__}")
    parser.add_argument("--config", type=Path, help="TOML settings file; flags override it")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = _leaf(sub, "index", "index", cmd_index, ["input", "out"], help="build a blocking index")
    p.add_argument("--input", type=Path)
    p.add_argument("--field", choices=["title", "citations"], default="title")
    p.add_argument("--out", type=Path)
    p.add_argument("--k1", type=float, default=K1)
    p.add_argument("--b", type=float, default=B)

    p = _leaf(sub, "train", "train", cmd_train, ["out"], help="train a pair classifier")
    _add_pair_source(p)
    _add_model_flags(p)
    p.add_argument("--threshold", type=float, default=0.5, help="decision threshold")
    p.add_argument("--out", type=Path)

    p = _leaf(sub, "crossval", "crossval", cmd_crossval, help="k-fold cross-validation")
    _add_pair_source(p)
    _add_model_flags(p)
    p.add_argument("--k-folds", "--folds", dest="k_folds", type=int, default=10)
    p.add_argument("--grid", choices=["none", "default"], default="none")
    p.add_argument("--info-gain", action="store_true", help="also rank features by information gain")
    p.add_argument("--out", type=Path)

    tem = sub.add_parser("tem", help="title evaluation model")
    tsub = tem.add_subparsers(dest="tem_command", metavar="COMMAND")
    tsub.required = True
    p = _leaf(tsub, "train", "tem.train", cmd_tem_train, ["good", "df", "out"], help="train a TEM")
    p.add_argument("--good", type=Path, help="one good title per line")
    p.add_argument("--synthetic-bad", type=int, default=400)
    p.add_argument("--df", type=Path, help="titles for the document-frequency table")
    p.add_argument("--out", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hp", action="append", metavar="KEY=VALUE")
    p.add_argument("--cv", type=int, default=0, help="also report K-fold CV")
    p.add_argument("--noisy-good-frac", type=float, default=0.3)
    p.add_argument("--junk-null", type=float, default=JunkConfig.null_weight)
    p.add_argument("--junk-nonascii", type=float, default=JunkConfig.nonascii_weight)
    p.add_argument("--junk-irrelevant", type=float, default=JunkConfig.irrelevant_weight)
    p.add_argument("--junk-scrambled", type=float, default=JunkConfig.scrambled_weight)
    p = _leaf(tsub, "score", "tem.score", cmd_tem_score, ["model"], help="score titles")
    p.add_argument("--model", type=Path)
    p.add_argument("--title", action="append")
    p.add_argument("--input", type=Path, help="one title per line")
    p.add_argument("--theta-tq", type=float, default=0.2)
    p.add_argument("--out", type=Path)

    p = _leaf(sub, "match", "match", cmd_match, ["target", "reference", "out"], help="link target to reference")
    p.add_argument("--target", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="imm")
    p.add_argument("--model", type=Path, help="header classifier")
    p.add_argument("--citation-model", type=Path, help="citation classifier (trained without abstracts)")
    p.add_argument("--tem", type=Path)
    p.add_argument("--index", type=Path)
    p.add_argument("--citation-index", type=Path)
    _add_matcher_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)

    bench = sub.add_parser("bench", help="synthetic benchmark tools")
    bsub = bench.add_subparsers(dest="bench_command", metavar="COMMAND")
    bsub.required = True
    p = _leaf(bsub, "generate", "bench.generate", cmd_bench_generate, ["out"], help="noisy benchmark")
    p.add_argument("--clean", type=Path, help="clean corpus (default: bundled sample)")
    p.add_argument("--spec", type=Path, help="NoiseSpec TOML")
    p.add_argument("--seed", type=int, default=None, help="override the seed in the noise file")
    p.add_argument("--match-frac", type=float, default=0.3)
    p.add_argument("--unmatched", type=int, default=100)
    p.add_argument("--out", type=Path)
    p = _leaf(bsub, "pairs", "bench.pairs", cmd_bench_pairs, ["target", "reference", "truth", "out"],
              help="labeled training pairs")
    _add_pair_source(p)
    p.add_argument("--out", type=Path)

    p = _leaf(sub, "evaluate", "evaluate", cmd_evaluate, ["matches", "truth"], help="score matches")
    p.add_argument("--matches", type=Path)
    p.add_argument("--truth", type=Path)
    p.add_argument("--out", type=Path)

    p = _leaf(sub, "sweep", "sweep", cmd_sweep, ["target", "reference", "truth", "citation_model", "out"],
              help="citation matching threshold grid")
    p.add_argument("--target", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--truth", type=Path)
    p.add_argument("--citation-model", type=Path)
    p.add_argument("--citation-index", type=Path)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--grid", default="default")
    p.add_argument("--out", type=Path)

    feats = sub.add_parser("features", help="feature inspection")
    fsub = feats.add_subparsers(dest="features_command", metavar="COMMAND")
    fsub.required = True
    p = _leaf(fsub, "dump", "features.dump", cmd_features_dump, ["target", "reference", "pair"],
              help="feature vectors as CSV")
    p.add_argument("--target", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--pair", nargs=2, action="append", metavar=("TARGET_ID", "REFERENCE_ID"))
    p.add_argument("--no-abstract", action="store_true")
    p.add_argument("--out", type=Path)
    return parser


def _config_values(path: Path, command: str) -> Dict[str, Any]:
    data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    values = {k: v for k, v in data.items() if not isinstance(v, dict)}
    section: Any = data
    for part in command.split("."):
        section = section.get(part, {}) if isinstance(section, dict) else {}
    if isinstance(section, dict):
        values.update({k: v for k, v in section.items() if not isinstance(v, dict)})
    return {k.replace("-", "_"): v for k, v in values.items()}


def _apply_config(parser, args, argv) -> argparse.Namespace:
    leaf = args._parser
    values = _config_values(args.config, args._command)
    known = {a.dest for a in leaf._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        leaf.error(f"unknown settings in {args.config}: {', '.join(unknown)}")
    for action in leaf._actions:
        if action.dest in values and action.type is not None and values[action.dest] is not None:
            v = values[action.dest]
            values[action.dest] = [action.type(x) for x in v] if isinstance(v, list) else action.type(v)
    leaf.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config is not None:
            args = _apply_config(parser, args, argv)
        missing = [r for r in args._required if getattr(args, r, None) is None]
        if missing:
            args._parser.error("missing required " + ", ".join("--" + m.replace("_", "-") for m in missing))
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        try:
            args._parser.error(str(exc))
        except SystemExit as usage:
            return int(usage.code)
    except Exception as exc:  # operational failure: one parseable line
        log.debug("command failed", exc_info=True)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
