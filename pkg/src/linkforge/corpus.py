"""Record data model and JSONL corpus I/O."""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

log = logging.getLogger(__name__)

YEAR_RANGE = (1000, 3000)


class CorpusError(Exception):
    pass


class EmptyCorpusError(CorpusError):
    pass


class DuplicateIdError(CorpusError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id: {record_id!r}")
        self.record_id = record_id


class RecordNotFoundError(CorpusError, KeyError):
    def __init__(self, record_id: str):
        super().__init__(f"no record with id {record_id!r}")
        self.record_id = record_id

    def __str__(self) -> str:
        return self.args[0]


class Role(str, enum.Enum):
    TARGET = "target"
    REFERENCE = "reference"


@dataclass(frozen=True)
class CitationRecord:
    raw_id: str
    title: Optional[str]
    authors: Tuple[str, ...]
    year: Optional[int]
    cited_by: str

    # citations never carry an abstract; matchers read it uniformly
    abstract = None


@dataclass(frozen=True)
class PaperRecord:
    id: str
    title: Optional[str] = None
    authors: Tuple[str, ...] = ()
    year: Optional[int] = None
    venue: Optional[str] = None
    abstract: Optional[str] = None
    citations: Tuple[CitationRecord, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("record id must be a non-empty string")
        if self.year is not None and not (YEAR_RANGE[0] <= self.year <= YEAR_RANGE[1]):
            raise ValueError(f"year {self.year} outside {YEAR_RANGE}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "authors": list(self.authors),
            "year": self.year,
            "venue": self.venue,
            "abstract": self.abstract,
            "citations": [_citation_dict(c, n) for n, c in enumerate(self.citations)],
        }


def _citation_dict(c: CitationRecord, ordinal: int) -> dict:
    out = {"title": c.title, "authors": list(c.authors), "year": c.year}
    if c.raw_id != f"{c.cited_by}#{ordinal}":
        out["raw_id"] = c.raw_id
    return out


def _opt_str(value, name: str) -> Optional[str]:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"{name} must be a string or null")
    return value


def _opt_year(value) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError("year must be an integer or null")
    return value


def _authors(value) -> Tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list) or not all(isinstance(a, str) for a in value):
        raise ValueError("authors must be a list of strings")
    return tuple(value)


def record_from_dict(obj: Mapping) -> PaperRecord:
    """Build a PaperRecord from one parsed JSONL object, validating types."""
    if not isinstance(obj, Mapping):
        raise ValueError("record must be a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise ValueError("id must be a non-empty string")
    cites = []
    for n, c in enumerate(obj.get("citations") or []):
        if not isinstance(c, Mapping):
            raise ValueError("citation must be an object")
        year = _opt_year(c.get("year"))
        if year is not None and not (YEAR_RANGE[0] <= year <= YEAR_RANGE[1]):
            raise ValueError(f"citation year {year} out of range")
        cites.append(CitationRecord(
            raw_id=c.get("raw_id") or f"{rid}#{n}",
            title=_opt_str(c.get("title"), "citation title"),
            authors=_authors(c.get("authors")),
            year=year,
            cited_by=rid,
        ))
    return PaperRecord(
        id=rid,
        title=_opt_str(obj.get("title"), "title"),
        authors=_authors(obj.get("authors")),
        year=_opt_year(obj.get("year")),
        venue=_opt_str(obj.get("venue"), "venue"),
        abstract=_opt_str(obj.get("abstract"), "abstract"),
        citations=tuple(cites),
    )


class Corpus:
    """Immutable id-keyed collection of papers; iteration follows input order."""

    def __init__(self, records: Iterable[PaperRecord], role: Union[Role, str] = Role.REFERENCE):
        self.role = Role(role)
        by_id = {}
        for rec in records:
            if rec.id in by_id:
                raise DuplicateIdError(rec.id)
            by_id[rec.id] = rec
        self._records = MappingProxyType(by_id)
        cites = {}
        for rec in by_id.values():
            for c in rec.citations:
                if c.raw_id in cites:
                    raise DuplicateIdError(c.raw_id)
                cites[c.raw_id] = c
        self._citations = MappingProxyType(cites)
        self.malformed_lines = 0

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self._records.values())

    def __contains__(self, record_id) -> bool:
        return record_id in self._records

    def __getitem__(self, record_id: str) -> PaperRecord:
        try:
            return self._records[record_id]
        except KeyError:
            raise RecordNotFoundError(record_id) from None

    @property
    def ids(self) -> Sequence[str]:
        return list(self._records)

    def citation(self, raw_id: str) -> CitationRecord:
        try:
            return self._citations[raw_id]
        except KeyError:
            raise RecordNotFoundError(raw_id) from None

    def iter_citations(self) -> Iterator[CitationRecord]:
        return iter(self._citations.values())

    @property
    def n_citations(self) -> int:
        return len(self._citations)


def get_citations(corpus: Corpus, paper_id: str) -> list:
    return list(corpus[paper_id].citations)


def load_corpus(path: Union[str, Path], role: Union[Role, str] = Role.REFERENCE) -> Corpus:
    """Read a JSONL corpus.

    Malformed lines are skipped with a warning and counted in
    ``Corpus.malformed_lines``; the load fails only when no line is usable
    or an id repeats.
    """
    path = Path(path)
    records, bad = [], 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except (ValueError, TypeError) as exc:
                bad += 1
                log.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
    if not records:
        raise EmptyCorpusError(f"{path}: no well-formed records ({bad} malformed)")
    corpus = Corpus(records, role)
    corpus.malformed_lines = bad
    return corpus


def save_corpus(corpus: Iterable[PaperRecord], path: Union[str, Path]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
