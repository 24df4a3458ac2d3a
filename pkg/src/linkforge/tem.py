"""Title quality scoring.

A string is described by character-level counts and word-level document
frequency statistics, and a logistic-regression model turns those into
``theta``, the probability that the string is a genuine paper title.
Low-theta records are the ones handed to citation matching.
"""
from __future__ import annotations

import json
import random
import statistics
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .classifier import LabeledPair, Model, train
from .textsim import normalize_title
from . import synth

TEM_SCHEMA_VERSION = 1

# Lucene/Solr default English stop set
STOPWORDS = frozenset("""
a an and are as at be but by for if in into is it no not of on or such that the
their then there these they this to was will with
""".split())

CONTROLLED_TOKENS = frozenset({
    "abstract", "list", "acknowledgments", "notices", "content", "accepted",
    "authors", "references", "null", "chapter", "discussions", "summary",
})

CHAR_TYPES = ("punct", "digit", "letter")

TEM_FEATURE_NAMES = (
    "n_ascii", "n_nonascii", "n_spaces", "n_punct", "n_consec_punct", "n_digits",
    "first_is_punct", "first_is_digit", "first_is_letter",
    "last_is_punct", "last_is_digit", "last_is_letter",
    "df_max", "df_min", "df_median", "n_words", "has_controlled_token",
)


class DfTable:
    """Document frequency of normalized title unigrams."""

    def __init__(self, counts: Mapping[str, int], total_docs: int):
        self.counts = dict(counts)
        self.total_docs = total_docs

    def __getitem__(self, token: str) -> int:
        return self.counts.get(token, 0)

    def to_dict(self) -> dict:
        return {"total_docs": self.total_docs, "counts": self.counts}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DfTable":
        return cls(d["counts"], int(d["total_docs"]))


def build_df_table(titles: Iterable[Optional[str]]) -> DfTable:
    counts = Counter()
    total = 0
    for title in titles:
        total += 1
        counts.update(set(normalize_title(title or "").split()))
    if total == 0:
        raise ValueError("cannot build a DF table from an empty title list")
    return DfTable(counts, total)


def is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def char_type(ch: Optional[str]) -> Optional[str]:
    if ch is None:
        return None
    if ch.isalpha():
        return "letter"
    if ch.isdigit():
        return "digit"
    return "punct"


@dataclass(frozen=True)
class TitleFeatures:
    n_ascii: int
    n_nonascii: int
    n_spaces: int
    n_punct: int
    n_consec_punct: int
    n_digits: int
    first_char_type: Optional[str]
    last_char_type: Optional[str]
    df_max: float
    df_min: float
    df_median: float
    n_words: int
    has_controlled_token: int

    schema_version = TEM_SCHEMA_VERSION
    names = TEM_FEATURE_NAMES

    def as_array(self) -> np.ndarray:
        first = [float(self.first_char_type == t) for t in CHAR_TYPES]
        last = [float(self.last_char_type == t) for t in CHAR_TYPES]
        return np.asarray(
            [self.n_ascii, self.n_nonascii, self.n_spaces, self.n_punct,
             self.n_consec_punct, self.n_digits, *first, *last,
             self.df_max, self.df_min, self.df_median, self.n_words,
             self.has_controlled_token],
            dtype=float)


def _punct_runs(title: str) -> int:
    runs, length = 0, 0
    for ch in title + " ":
        if is_punct(ch):
            length += 1
            continue
        if length >= 2:
            runs += 1
        length = 0
    return runs


def tem_features(title: Optional[str], df: DfTable) -> TitleFeatures:
    title = title or ""
    stripped = title.strip()
    tokens = normalize_title(title).split()
    dfs = [df[t] for t in tokens if t not in STOPWORDS]
    return TitleFeatures(
        n_ascii=sum(1 for c in title if ord(c) < 128),
        n_nonascii=sum(1 for c in title if ord(c) >= 128),
        n_spaces=sum(1 for c in title if c.isspace()),
        n_punct=sum(1 for c in title if is_punct(c)),
        n_consec_punct=_punct_runs(title),
        n_digits=sum(1 for c in title if c.isdigit()),
        first_char_type=char_type(stripped[0] if stripped else None),
        last_char_type=char_type(stripped[-1] if stripped else None),
        df_max=float(max(dfs)) if dfs else 0.0,
        df_min=float(min(dfs)) if dfs else 0.0,
        df_median=float(statistics.median(dfs)) if dfs else 0.0,
        n_words=len(title.split()),
        has_controlled_token=int(any(t in CONTROLLED_TOKENS for t in tokens)),
    )


@dataclass(frozen=True)
class TitleQuality:
    theta: float


def score_title(model: Model, title: Optional[str], df: DfTable) -> TitleQuality:
    p = model.score_vectors([tem_features(title, df)])[0]
    return TitleQuality(float(p))


def is_low_quality(q: TitleQuality, theta_tq: float) -> bool:
    return q.theta < theta_tq


class TitleEvaluator:
    """A trained TEM model bundled with the DF table it was trained against."""

    FORMAT = "linkforge-tem"

    def __init__(self, model: Model, df: DfTable):
        model.check_schema(TEM_FEATURE_NAMES, TEM_SCHEMA_VERSION)
        self.model = model
        self.df = df

    def score(self, title: Optional[str]) -> TitleQuality:
        return score_title(self.model, title, self.df)

    def save(self, path: Union[str, Path]) -> None:
        payload = {"format": self.FORMAT, "model": self.model.to_dict(), "df": self.df.to_dict()}
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TitleEvaluator":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != cls.FORMAT:
            raise ValueError(f"{path}: not a TEM model file")
        return cls(Model.from_dict(payload["model"]), DfTable.from_dict(payload["df"]))


# -- synthetic training data -----------------------------------------------

def synthetic_labeled_titles(good_titles: Sequence[str], n_bad: int, seed: int = 0,
                             noisy_good_frac: float = 0.3,
                             junk: Optional[synth.JunkConfig] = None) -> List[Tuple[Optional[str], int]]:
    """Label real titles 1 and generated junk 0.

    A ``noisy_good_frac`` share of the good titles get light character
    noise or truncation, since extraction typos do not make a string any
    less of a title. Junk follows the low-quality rules: null strings,
    non-ASCII heavy strings, irrelevant header text, and scrambled
    (non-English looking) text.
    """
    rng = random.Random(seed)
    junk = junk or synth.JunkConfig()
    out: List[Tuple[Optional[str], int]] = []
    for title in good_titles:
        if rng.random() < noisy_good_frac:
            title = synth.light_noise(title, rng)
        out.append((title, 1))
    for _ in range(n_bad):
        out.append((synth.junk_title(rng, junk), 0))
    rng.shuffle(out)
    return out


def tem_training_pairs(labeled: Sequence[Tuple[Optional[str], int]], df: DfTable) -> List[LabeledPair]:
    return [LabeledPair(tem_features(t, df), y) for t, y in labeled]


def train_tem(labeled: Sequence[Tuple[Optional[str], int]], df: DfTable,
              hyperparams: Optional[Mapping] = None, seed: int = 0) -> TitleEvaluator:
    model = train(tem_training_pairs(labeled, df), "logreg", hyperparams, seed=seed)
    return TitleEvaluator(model, df)
