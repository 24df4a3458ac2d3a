"""The frozen synthetic benchmark and the model set trained for it."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .classifier import Model, train
from .corpus import Corpus, Role, load_corpus
from .eval import GroundTruth, NoiseSpec, generate_benchmark, training_pairs
from .index import BlockingIndex, citation_index, paper_index
from .matcher import Matcher, MatcherConfig
from .synth import synthetic_clean_corpus
from .tem import TitleEvaluator, build_df_table, synthetic_labeled_titles, train_tem

SAMPLE_SEED = 2018
SAMPLE_SIZE = 1100
TRAIN_SEED = 7
BENCH_SEED = 42
N_UNMATCHED = 100
MATCH_FRAC = 0.3
TEM_BAD_TITLES = 400


def sample_path() -> Path:
    return Path(str(resources.files("linkforge") / "data" / "sample_clean.jsonl"))


def titles_path() -> Path:
    return Path(str(resources.files("linkforge") / "data" / "sample_titles.txt"))


def load_sample() -> Corpus:
    """The bundled clean corpus (same content as ``synthetic_clean_corpus(1100, 2018)``)."""
    return load_corpus(sample_path(), Role.REFERENCE)


@dataclass
class Benchmark:
    target: Corpus
    reference: Corpus
    truth: GroundTruth


def standard_benchmark(clean: Optional[Corpus] = None, seed: int = BENCH_SEED) -> Benchmark:
    """1000 reference records, 300 noisy matches, 100 unmatched targets."""
    clean = clean if clean is not None else load_sample()
    target, reference, truth = generate_benchmark(clean, NoiseSpec(seed=seed), MATCH_FRAC, N_UNMATCHED)
    return Benchmark(target, reference, truth)


@dataclass
class ModelSet:
    header: Model
    citation: Model
    tem: TitleEvaluator


def train_models(df_titles, seed: int = TRAIN_SEED, kind: str = "forest", workers: int = 1) -> ModelSet:
    """Train header, citation and title models on an independent synthetic corpus.

    ``df_titles`` feeds the TEM document-frequency table; pass the
    reference corpus titles so word statistics come from the clean side.
    """
    clean = synthetic_clean_corpus(SAMPLE_SIZE, seed=seed, id_prefix="q")
    bench = standard_benchmark(clean, seed=seed)
    idx = paper_index(bench.reference)
    header = train(training_pairs(bench.target, bench.reference, bench.truth, idx),
                   kind, seed=seed, workers=workers)
    citation = train(training_pairs(bench.target, bench.reference, bench.truth, idx, use_abstract=False),
                     kind, seed=seed, workers=workers)
    labeled = synthetic_labeled_titles([r.title for r in clean if r.title], TEM_BAD_TITLES, seed=seed)
    tem = train_tem(labeled, build_df_table(df_titles), seed=seed)
    return ModelSet(header, citation, tem)


def build_matcher(reference: Corpus, models: ModelSet, cfg: MatcherConfig = MatcherConfig(),
                  papers: Optional[BlockingIndex] = None,
                  citations: Optional[BlockingIndex] = None) -> Matcher:
    return Matcher(reference,
                   papers if papers is not None else paper_index(reference),
                   citations if citations is not None else citation_index(reference),
                   models.header, models.citation, models.tem, cfg)
