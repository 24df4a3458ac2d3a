"""Ground-truth evaluation, threshold sweeps and the noisy benchmark generator."""
from __future__ import annotations

import csv
import dataclasses
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .classifier import LabeledPair, prf_from_counts
from .corpus import CitationRecord, Corpus, PaperRecord, Role
from .features import FEATURE_NAMES, FEATURE_SCHEMA_VERSION, FeatureVector, header_features
from .index import BlockingIndex, query_for_record
from .matcher import Matcher, MatchResult, decide_cmm
from . import synth

DEFAULT_THETA_REFS = (0.4, 0.5, 0.6, 0.7)
DEFAULT_THETA_TITLES = (0.15, 0.25, 0.35, 0.45)


@dataclass(frozen=True)
class GroundTruth:
    pairs: frozenset  # of (target_id, reference_id)
    unmatched_targets: frozenset = frozenset()

    def __post_init__(self):
        overlap = {t for t, _ in self.pairs} & set(self.unmatched_targets)
        if overlap:
            raise ValueError(f"targets both matched and unmatched: {sorted(overlap)[:5]}")

    @property
    def matched_targets(self) -> frozenset:
        return frozenset(t for t, _ in self.pairs)

    def restrict(self, target_ids: Iterable[str]) -> "GroundTruth":
        keep = set(target_ids)
        return GroundTruth(frozenset(p for p in self.pairs if p[0] in keep),
                           frozenset(t for t in self.unmatched_targets if t in keep))

    def save(self, path: Union[str, Path]) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for t, r in sorted(self.pairs):
                fh.write(json.dumps({"target_id": t, "reference_id": r}) + "\n")
            for t in sorted(self.unmatched_targets):
                fh.write(json.dumps({"target_id": t, "reference_id": None}) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "GroundTruth":
        pairs, unmatched = set(), set()
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if obj.get("reference_id") is None:
                    unmatched.add(obj["target_id"])
                else:
                    pairs.add((obj["target_id"], obj["reference_id"]))
        return cls(frozenset(pairs), frozenset(unmatched))


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    by_provenance: Mapping[str, Mapping[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "tp": self.tp, "fp": self.fp, "fn": self.fn,
                "by_provenance": {k: dict(v) for k, v in self.by_provenance.items()}}


def evaluate(matches: Iterable[MatchResult], truth: GroundTruth,
             target_ids: Optional[Iterable[str]] = None) -> EvalReport:
    """Pair-level P/R/F1, optionally restricted to a subset of targets.

    Precision of an empty prediction set is 1.0.
    """
    if target_ids is not None:
        keep = set(target_ids)
        truth = truth.restrict(keep)
        matches = [m for m in matches if m.target_id in keep]
    predicted = {}
    for m in matches:
        predicted[(m.target_id, m.reference_id)] = m.provenance.value
    tp = sum(1 for p in predicted if p in truth.pairs)
    fp = len(predicted) - tp
    fn = sum(1 for p in truth.pairs if p not in predicted)
    breakdown: Dict[str, Counter] = {}
    for pair, prov in predicted.items():
        breakdown.setdefault(prov, Counter())["tp" if pair in truth.pairs else "fp"] += 1
    precision, recall, f1 = prf_from_counts(tp, fp, fn)
    return EvalReport(precision, recall, f1, tp, fp, fn,
                      {k: {"tp": v["tp"], "fp": v["fp"]} for k, v in sorted(breakdown.items())})


# -- noisy benchmark ----------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    title_char_error_rate: float = 0.02
    title_truncate_prob: float = 0.1
    title_garbage_prob: float = 0.25
    drop_abstract_prob: float = 0.3
    drop_year_prob: float = 0.15
    drop_author_prob: float = 0.1
    author_initialize_prob: float = 0.3
    citation_subset_frac: float = 0.7
    seed: int = 42

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if f.name != "seed" and not 0.0 <= getattr(self, f.name) <= 1.0:
                raise ValueError(f"{f.name} must be in [0, 1]")

    @classmethod
    def from_mapping(cls, values: Mapping) -> "NoiseSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown noise settings: {sorted(unknown)}")
        return cls(**values)


NOISELESS = NoiseSpec(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)


def _initialize(name: str) -> str:
    """Collapse given names to initials: ``"Jane Cole Huck" -> "J. C. Huck"``."""
    if "," in name:
        last, given = name.split(",", 1)
        initials = " ".join(p[0] + "." for p in given.split())
        return f"{last}, {initials}" if initials else name
    parts = name.split()
    if len(parts) < 2:
        return name
    return " ".join(p[0] + "." for p in parts[:-1]) + " " + parts[-1]


def _noisy_authors(authors: Sequence[str], spec: NoiseSpec, rng: random.Random) -> Tuple[str, ...]:
    if rng.random() < spec.drop_author_prob:
        return ()
    return tuple(_initialize(a) if rng.random() < spec.author_initialize_prob else a for a in authors)


def _noisy_title(title: Optional[str], authors: Sequence[str], spec: NoiseSpec,
                 rng: random.Random) -> Optional[str]:
    if rng.random() < spec.title_garbage_prob:
        return synth.junk_title(rng, source_title=title, authors=authors)
    if title is None:
        return None
    if rng.random() < spec.title_truncate_prob:
        title = synth.truncate_words(title, rng)
    return synth.char_noise(title, spec.title_char_error_rate, rng)


def noisy_copy(rec: PaperRecord, new_id: str, spec: NoiseSpec, rng: random.Random) -> PaperRecord:
    """A target-side copy of ``rec`` damaged the way header extraction damages records."""
    title = _noisy_title(rec.title, rec.authors, spec, rng)
    abstract = None if rng.random() < spec.drop_abstract_prob else rec.abstract
    year = None if rng.random() < spec.drop_year_prob else rec.year
    authors = _noisy_authors(rec.authors, spec, rng)
    kept = [c for c in rec.citations if rng.random() < spec.citation_subset_frac]
    citations = tuple(
        CitationRecord(
            raw_id=f"{new_id}#{i}",
            title=synth.char_noise(c.title, spec.title_char_error_rate, rng) if c.title else c.title,
            authors=tuple(_initialize(a) if rng.random() < spec.author_initialize_prob else a
                          for a in c.authors),
            year=None if rng.random() < spec.drop_year_prob else c.year,
            cited_by=new_id,
        )
        for i, c in enumerate(kept)
    )
    return PaperRecord(new_id, title, authors, year, rec.venue, abstract, citations)


def generate_benchmark(clean: Corpus, spec: NoiseSpec = NoiseSpec(), match_frac: float = 0.3,
                       n_unmatched: int = 100) -> Tuple[Corpus, Corpus, GroundTruth]:
    """Split a clean corpus into a reference corpus and a noisy target corpus.

    ``n_unmatched`` clean records are held out of the reference and put,
    damaged, into the target as records without a counterpart. A further
    ``round(match_frac * len(reference))`` reference records are copied
    into the target with noise; these are the true matches.
    """
    rng = random.Random(spec.seed)
    ids = list(clean.ids)
    if n_unmatched >= len(ids):
        raise ValueError(f"clean corpus of {len(ids)} records cannot hold out {n_unmatched}")
    order = ids[:]
    rng.shuffle(order)
    held_out = set(order[:n_unmatched])
    ref_ids = [i for i in ids if i not in held_out]
    n_matched = round(match_frac * len(ref_ids))
    if not 0 <= n_matched <= len(ref_ids):
        raise ValueError("match_frac must be in [0, 1]")
    matched_sources = rng.sample(ref_ids, n_matched)
    sources = [(s, True) for s in matched_sources] + [(s, False) for s in order[:n_unmatched]]
    rng.shuffle(sources)

    targets, pairs, unmatched = [], set(), set()
    for n, (src, is_match) in enumerate(sources):
        tid = f"t{n:05d}"
        targets.append(noisy_copy(clean[src], tid, spec, rng))
        if is_match:
            pairs.add((tid, src))
        else:
            unmatched.add(tid)
    reference = Corpus((clean[i] for i in ref_ids), Role.REFERENCE)
    target = Corpus(targets, Role.TARGET)
    return target, reference, GroundTruth(frozenset(pairs), frozenset(unmatched))


def training_pairs(target: Corpus, reference: Corpus, truth: GroundTruth, index: BlockingIndex,
                   k: int = 10, use_abstract: bool = True, max_negatives: int = 3) -> List[LabeledPair]:
    """Labeled header pairs: every true pair plus the top-ranked wrong candidates.

    True pairs missed by blocking are still included as positives.
    """
    true_ref = dict(truth.pairs)
    out = []
    for t in target:
        if t.id not in true_ref and t.id not in truth.unmatched_targets:
            continue
        ref_id = true_ref.get(t.id)
        if ref_id is not None:
            out.append(LabeledPair(header_features(t, reference[ref_id], use_abstract), 1))
        negatives = 0
        for rid, _ in index.search(query_for_record(t), k):
            if rid == ref_id:
                continue
            if negatives >= max_negatives:
                break
            out.append(LabeledPair(header_features(t, reference[rid], use_abstract), 0))
            negatives += 1
    return out


def save_pairs(pairs: Sequence[LabeledPair], path: Union[str, Path]) -> None:
    """Write header pairs as CSV (by ``.csv`` suffix) or JSONL."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if path.suffix == ".csv":
            w = csv.writer(fh)
            w.writerow([*FEATURE_NAMES, "label"])
            for p in pairs:
                w.writerow([*dataclasses.astuple(p.features), p.label])
        else:
            for p in pairs:
                fh.write(json.dumps({"schema_version": FEATURE_SCHEMA_VERSION,
                                     "features": dataclasses.asdict(p.features),
                                     "label": p.label}) + "\n")


def _vector(values: Mapping) -> FeatureVector:
    missing = set(FEATURE_NAMES) - set(values)
    if missing:
        raise ValueError(f"pair is missing features {sorted(missing)}")
    kinds = {f.name: f.type for f in dataclasses.fields(FeatureVector)}
    return FeatureVector(**{n: (int(float(values[n])) if kinds[n] in (int, "int") else float(values[n]))
                            for n in FEATURE_NAMES})


def load_pairs(path: Union[str, Path]) -> List[LabeledPair]:
    path = Path(path)
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        if path.suffix == ".csv":
            for row in csv.DictReader(fh):
                out.append(LabeledPair(_vector(row), int(row["label"])))
        else:
            for n, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                version = obj.get("schema_version", FEATURE_SCHEMA_VERSION)
                if version != FEATURE_SCHEMA_VERSION:
                    raise ValueError(f"{path}:{n}: feature schema {version}, expected {FEATURE_SCHEMA_VERSION}")
                out.append(LabeledPair(_vector(obj["features"]), int(obj["label"])))
    return out


# -- threshold sweep -------------------------------------------------------------

@dataclass(frozen=True)
class SweepCell:
    theta_ref: float
    theta_title: float
    report: EvalReport


def sweep_cmm(matcher: Matcher, target: Corpus, truth: GroundTruth,
              theta_refs: Sequence[float] = DEFAULT_THETA_REFS,
              theta_titles: Sequence[float] = DEFAULT_THETA_TITLES) -> List[SweepCell]:
    """Citation matching over a grid of (theta_ref, theta_title).

    Candidate retrieval and classification do not depend on the two
    thresholds, so the confirmed citation events are computed once per
    target and the decision rule is replayed for every cell.
    """
    events = {t.id: list(matcher.cmm_events(t)) for t in target}
    cells = []
    for theta_ref in theta_refs:
        for theta_title in theta_titles:
            cfg = dataclasses.replace(matcher.cfg, theta_ref=theta_ref, theta_title=theta_title)
            matches = []
            for t in target:
                found = decide_cmm(events[t.id], cfg)
                if found is not None:
                    matches.append(MatchResult(t.id, found[0], found[1], found[2]))
            cells.append(SweepCell(theta_ref, theta_title, evaluate(matches, truth)))
    return cells


def write_sweep_csv(cells: Sequence[SweepCell], path: Union[str, Path]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_ref", "theta_title", "precision", "recall", "f1", "tp", "fp", "fn"])
        for c in cells:
            r = c.report
            w.writerow([c.theta_ref, c.theta_title, f"{r.precision:.4f}", f"{r.recall:.4f}",
                        f"{r.f1:.4f}", r.tp, r.fp, r.fn])
