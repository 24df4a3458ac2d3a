"""Pairwise header features for a (target, candidate) record pair.

The vector layout is frozen; models store ``FEATURE_SCHEMA_VERSION`` and
refuse vectors from another layout. Absent inputs are encoded as the
worst value of each feature: distances 1.0, similarities 0.0 and the
year difference at its cap of 100.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Optional, Sequence

import numpy as np

from .textsim import AuthorName, jaccard, normalize_author, normalize_title, simhash_distance

FEATURE_SCHEMA_VERSION = 1
FEATURE_NAMES = (
    "title_simhash_lev",
    "abstract_simhash_lev",
    "title_jaccard",
    "abstract_jaccard",
    "year_absdiff",
    "first_author_code",
    "last_author_code",
    "first_author_lastname_sim",
    "last_author_lastname_sim",
    "all_lastnames_jaccard",
)

MISSING_DISTANCE = 1.0
MISSING_SIMILARITY = 0.0
YEAR_DIFF_CAP = 100


@dataclass(frozen=True)
class FeatureVector:
    title_simhash_lev: float
    abstract_simhash_lev: float
    title_jaccard: float
    abstract_jaccard: float
    year_absdiff: int
    first_author_code: int
    last_author_code: int
    first_author_lastname_sim: int
    last_author_lastname_sim: int
    all_lastnames_jaccard: float

    schema_version = FEATURE_SCHEMA_VERSION
    names = FEATURE_NAMES

    def as_array(self) -> np.ndarray:
        return np.asarray(astuple(self), dtype=float)


def fullname_code(a: AuthorName, b: AuthorName) -> int:
    """3-bit last/middle-initial/first-initial agreement code read as 0..7.

    >>> fullname_code(normalize_author("Jane C. Huck"), normalize_author("J. Huck"))
    5
    """
    code = 0
    if a.last and b.last and a.last == b.last:
        code |= 4
    if a.middle_initial and b.middle_initial and a.middle_initial == b.middle_initial:
        code |= 2
    if a.first_initial and b.first_initial and a.first_initial == b.first_initial:
        code |= 1
    return code


def lastname_sim(a: Optional[str], b: Optional[str]) -> int:
    """0 if both known and different, 1 if either is missing, 2 if equal."""
    if not a or not b:
        return 1
    return 2 if a == b else 0


def all_lastnames_jaccard(t_authors: Sequence[AuthorName], r_authors: Sequence[AuthorName]) -> float:
    return jaccard({a.last for a in t_authors if a.last}, {a.last for a in r_authors if a.last})


def _title_features(t_title, r_title):
    nt = normalize_title(t_title) if t_title else ""
    nr = normalize_title(r_title) if r_title else ""
    if not nt or not nr:
        return MISSING_DISTANCE, MISSING_SIMILARITY
    return simhash_distance(nt, nr), jaccard(nt.split(), nr.split())


def _abstract_features(t_abs, r_abs):
    # abstracts are fingerprinted as given; Jaccard uses lowercased tokens
    if not t_abs or not r_abs or not t_abs.split() or not r_abs.split():
        return MISSING_DISTANCE, MISSING_SIMILARITY
    return (simhash_distance(t_abs, r_abs),
            jaccard(t_abs.lower().split(), r_abs.lower().split()))


def header_features(t, r, use_abstract: bool = True) -> FeatureVector:
    """Feature vector for a target record ``t`` and candidate ``r``.

    Works on papers and citations alike. Pass ``use_abstract=False`` for
    citation pairs; abstract fields then hold the missing-value encoding.
    """
    title_lev, title_jac = _title_features(t.title, r.title)
    if use_abstract:
        abs_lev, abs_jac = _abstract_features(t.abstract, r.abstract)
    else:
        abs_lev, abs_jac = MISSING_DISTANCE, MISSING_SIMILARITY

    if t.year is None or r.year is None:
        year_diff = YEAR_DIFF_CAP
    else:
        year_diff = min(abs(t.year - r.year), YEAR_DIFF_CAP)

    ta = [normalize_author(a) for a in t.authors]
    ra = [normalize_author(a) for a in r.authors]
    if ta and ra:
        first_code = fullname_code(ta[0], ra[0])
        last_code = fullname_code(ta[-1], ra[-1])
    else:
        first_code = last_code = 0
    first_ln = lastname_sim(ta[0].last if ta else None, ra[0].last if ra else None)
    last_ln = lastname_sim(ta[-1].last if ta else None, ra[-1].last if ra else None)

    return FeatureVector(
        title_simhash_lev=title_lev,
        abstract_simhash_lev=abs_lev,
        title_jaccard=title_jac,
        abstract_jaccard=abs_jac,
        year_absdiff=year_diff,
        first_author_code=first_code,
        last_author_code=last_code,
        first_author_lastname_sim=first_ln,
        last_author_lastname_sim=last_ln,
        all_lastnames_jaccard=all_lastnames_jaccard(ta, ra),
    )


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.vstack([v.as_array() for v in vectors])
