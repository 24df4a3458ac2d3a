"""Embedded BM25 inverted index and the blocking query builder.

Two physical indexes are built from a reference corpus: one over papers
and one over the citations those papers make. Each is a
:class:`BlockingIndex` holding a title sub-index and a composite
"last names + year" sub-index, so every branch of the query builder has
a field to search.
"""
from __future__ import annotations

import enum
import json
import math
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .corpus import Corpus
from .textsim import normalize_author, normalize_title

K1 = 1.2
B = 0.75
MIN_TITLE_QUERY_CHARS = 20

INDEX_MAGIC = b"LINKFORGE-INDEX\n"
INDEX_FORMAT_VERSION = 1


class InvertedIndexError(Exception):
    """Raised for invalid index construction or lookups."""


class QueryKind(str, enum.Enum):
    TITLE = "title"
    LASTNAME_YEAR = "lastname_year"
    LASTNAME = "lastname"


@dataclass(frozen=True)
class Query:
    terms: Tuple[str, ...]
    kind: QueryKind

    def __post_init__(self):
        if not self.terms:
            raise ValueError("query must have at least one term")


def build_query(title: Optional[str], last_name: Optional[str], year: Optional[int]) -> Optional[Query]:
    """Choose the blocking query for a record.

    Titles longer than 20 raw characters are queried directly; otherwise
    the first author's last name (with the year when known) is used.
    A branch whose text normalizes to nothing falls through to the next.
    """
    if title is not None and len(title) > MIN_TITLE_QUERY_CHARS:
        terms = normalize_title(title).split()
        if terms:
            return Query(tuple(terms), QueryKind.TITLE)
    name_terms = normalize_title(last_name).split() if last_name else []
    if name_terms and year is not None:
        return Query(tuple(name_terms) + (str(year),), QueryKind.LASTNAME_YEAR)
    if name_terms:
        return Query(tuple(name_terms), QueryKind.LASTNAME)
    return None


def query_for_record(rec) -> Optional[Query]:
    """Apply :func:`build_query` to a paper or citation record."""
    last = normalize_author(rec.authors[0]).last if rec.authors else None
    return build_query(rec.title, last, rec.year)


class InvertedIndex:
    def __init__(self, field: str = "title", k1: float = K1, b: float = B):
        self.field = field
        self.k1 = k1
        self.b = b
        self.postings = {}
        self.doc_lengths = {}
        self.avg_doc_length = 0.0
        self._idf = {}
        self._doc_ids = []
        self._arrays = {}

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    def _add(self, doc_id: str, tokens: Sequence[str]) -> None:
        if doc_id in self.doc_lengths:
            raise InvertedIndexError(f"duplicate document id {doc_id!r}")
        self.doc_lengths[doc_id] = len(tokens)
        for term, tf in Counter(tokens).items():
            self.postings.setdefault(term, []).append((doc_id, tf))

    def _finalize(self) -> None:
        n = self.doc_count
        self.avg_doc_length = sum(self.doc_lengths.values()) / n if n else 0.0
        self._idf = {t: idf(n, len(p)) for t, p in self.postings.items()}
        # dense doc numbering in id order, so ascending number == ascending id
        self._doc_ids = sorted(self.doc_lengths)
        number = {d: i for i, d in enumerate(self._doc_ids)}
        lengths = np.array([self.doc_lengths[d] for d in self._doc_ids], dtype=float)
        ratio = lengths / self.avg_doc_length if self.avg_doc_length else np.zeros(n)
        norm = self.k1 * (1.0 - self.b + self.b * ratio)
        self._arrays = {}
        for term, plist in self.postings.items():
            docs = np.array([number[d] for d, _ in plist], dtype=np.int64)
            tf = np.array([tf for _, tf in plist], dtype=float)
            weights = self._idf[term] * (tf * (self.k1 + 1.0)) / (tf + norm[docs])
            self._arrays[term] = (docs, weights)

    def idf(self, term: str) -> float:
        return self._idf.get(term, 0.0)

    def _length_norm(self, doc_id: str) -> float:
        length = self.doc_lengths[doc_id]
        ratio = length / self.avg_doc_length if self.avg_doc_length else 0.0
        return self.k1 * (1.0 - self.b + self.b * ratio)

    def term_weight(self, term: str, tf: int, doc_id: str) -> float:
        return self._idf[term] * (tf * (self.k1 + 1.0)) / (tf + self._length_norm(doc_id))

    # serialization helpers
    def to_dict(self) -> dict:
        return {
            "field": self.field, "k1": self.k1, "b": self.b,
            "doc_lengths": self.doc_lengths,
            "postings": {t: [[d, tf] for d, tf in p] for t, p in self.postings.items()},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InvertedIndex":
        idx = cls(obj["field"], obj["k1"], obj["b"])
        idx.doc_lengths = dict(obj["doc_lengths"])
        idx.postings = {t: [(d, tf) for d, tf in p] for t, p in obj["postings"].items()}
        idx._finalize()
        return idx


def idf(doc_count: int, doc_freq: int) -> float:
    return math.log(1.0 + (doc_count - doc_freq + 0.5) / (doc_freq + 0.5))


def build_index(docs: Iterable[Tuple[str, Optional[str]]], field: str = "title",
                k1: float = K1, b: float = B) -> InvertedIndex:
    """Index ``(doc_id, text)`` pairs; text is title-normalized then split."""
    idx = InvertedIndex(field, k1, b)
    for doc_id, text in docs:
        idx._add(doc_id, normalize_title(text or "").split())
    idx._finalize()
    return idx


def bm25_score(index: InvertedIndex, query: Query, doc_id: str) -> float:
    if doc_id not in index.doc_lengths:
        raise InvertedIndexError(f"unknown document {doc_id!r}")
    score = 0.0
    for term in query.terms:
        for d, tf in index.postings.get(term, ()):
            if d == doc_id:
                score += index.term_weight(term, tf, doc_id)
                break
    return score


def query_top_k(index: InvertedIndex, query: Query, k: int) -> List[Tuple[str, float]]:
    """Top ``k`` documents with positive score, ties broken by ascending id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = np.zeros(index.doc_count)
    # terms are accumulated in query order so sums match a per-document scorer
    for term in query.terms:
        arrays = index._arrays.get(term)
        if arrays is not None:
            scores[arrays[0]] += arrays[1]
    hits = np.flatnonzero(scores > 0.0)
    if len(hits) > k:
        kth = np.partition(scores[hits], len(hits) - k)[len(hits) - k]
        hits = hits[scores[hits] >= kth]
    order = np.lexsort((hits, -scores[hits]))[:k]
    return [(index._doc_ids[i], float(scores[i])) for i in hits[order]]


# -- blocking index over a corpus -------------------------------------------

def _names_text(rec) -> str:
    lasts = [normalize_author(a).last for a in rec.authors]
    parts = [n for n in lasts if n]
    if rec.year is not None:
        parts.append(str(rec.year))
    return " ".join(parts)


class IndexKind(str, enum.Enum):
    PAPERS = "title"
    CITATIONS = "citations"


class BlockingIndex:
    """A title sub-index plus a last-names/year sub-index over the same records."""

    def __init__(self, kind: Union[IndexKind, str], title: InvertedIndex, names: InvertedIndex):
        self.kind = IndexKind(kind)
        self.title = title
        self.names = names

    def __len__(self) -> int:
        return self.title.doc_count

    def sub_index(self, query: Query) -> InvertedIndex:
        return self.title if query.kind is QueryKind.TITLE else self.names

    def search(self, query: Optional[Query], k: int) -> List[Tuple[str, float]]:
        if query is None:
            return []
        return query_top_k(self.sub_index(query), query, k)

    @classmethod
    def from_records(cls, records, kind: Union[IndexKind, str], k1: float = K1, b: float = B) -> "BlockingIndex":
        records = list(records)
        ids = [r.raw_id if hasattr(r, "raw_id") else r.id for r in records]
        title = build_index(zip(ids, (r.title for r in records)), "title", k1, b)
        names = build_index(zip(ids, (_names_text(r) for r in records)), "lastname_year", k1, b)
        return cls(kind, title, names)

    def save(self, path: Union[str, Path]) -> None:
        payload = {
            "version": INDEX_FORMAT_VERSION,
            "kind": self.kind.value,
            "title": self.title.to_dict(),
            "names": self.names.to_dict(),
        }
        blob = zlib.compress(json.dumps(payload, separators=(",", ":")).encode("utf-8"))
        Path(path).write_bytes(INDEX_MAGIC + blob)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "BlockingIndex":
        raw = Path(path).read_bytes()
        if not raw.startswith(INDEX_MAGIC):
            raise InvertedIndexError(f"{path}: not a linkforge index file")
        payload = json.loads(zlib.decompress(raw[len(INDEX_MAGIC):]))
        if payload.get("version") != INDEX_FORMAT_VERSION:
            raise InvertedIndexError(f"{path}: unsupported index version {payload.get('version')}")
        return cls(payload["kind"], InvertedIndex.from_dict(payload["title"]),
                   InvertedIndex.from_dict(payload["names"]))


def paper_index(corpus: Corpus, k1: float = K1, b: float = B) -> BlockingIndex:
    return BlockingIndex.from_records(corpus, IndexKind.PAPERS, k1, b)


def citation_index(corpus: Corpus, k1: float = K1, b: float = B) -> BlockingIndex:
    return BlockingIndex.from_records(corpus.iter_citations(), IndexKind.CITATIONS, k1, b)
