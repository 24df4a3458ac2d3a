"""String normalization, simhash fingerprints and similarity primitives."""
from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

# Letters that NFKD does not decompose into base + combining mark.
_FOLD_EXTRA = str.maketrans({
    "ß": "ss", "æ": "ae", "œ": "oe", "ø": "o", "ł": "l", "đ": "d",
    "ð": "d", "þ": "th", "ı": "i", "ŀ": "l", "ħ": "h",
})

_NON_ALNUM = re.compile(r"[^a-z0-9]+")
_DROP_TOKENS = frozenset({"s", "t"})

DEFAULT_NAME_AFFIXES = frozenset({
    "prof", "professor", "dr", "mr", "mrs", "ms",
    "jr", "sr", "ii", "iii", "iv",
})


def fold_diacritics(text: str) -> str:
    """Lowercase and strip combining marks, e.g. ``"Á" -> "a"``."""
    text = text.lower().translate(_FOLD_EXTRA)
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(c for c in decomposed if not unicodedata.combining(c))


@lru_cache(maxsize=1 << 18)
def normalize_title(raw: str) -> str:
    """Normalize a title for comparison.

    Lowercases, folds diacritics, turns punctuation (and any other
    character outside ``[a-z0-9]``) into a space, drops the stray
    tokens ``s`` and ``t`` left behind by apostrophes, and collapses
    whitespace. The result always matches ``^[a-z0-9 ]*$``.

    >>> normalize_title("Can't Stop")
    'can stop'
    """
    if not raw:
        return ""
    folded = fold_diacritics(raw)
    tokens = _NON_ALNUM.sub(" ", folded).split()
    return " ".join(t for t in tokens if t not in _DROP_TOKENS)


@dataclass(frozen=True)
class AuthorName:
    first: Optional[str] = None
    middle: Optional[str] = None
    last: Optional[str] = None

    @property
    def first_initial(self) -> Optional[str]:
        return self.first[0] if self.first else None

    @property
    def middle_initial(self) -> Optional[str]:
        return self.middle[0] if self.middle else None


def _name_tokens(part: str, affixes: frozenset) -> list:
    out = []
    for tok in re.split(r"[\s.]+", part):
        # hyphens and apostrophes inside a name are joined, not split
        tok = re.sub(r"[^a-z0-9]", "", tok)
        if tok and tok not in affixes:
            out.append(tok)
    return out


@lru_cache(maxsize=1 << 18)
def _normalize_author(raw: str, affixes: frozenset) -> AuthorName:
    folded = fold_diacritics(raw)
    parts = [_name_tokens(p, affixes) for p in folded.split(",")]
    parts = [p for p in parts if p]
    if len(parts) == 2:
        # "Last, First Middle" ordering
        tokens = parts[1] + parts[0]
    else:
        tokens = [t for p in parts for t in p]
    if not tokens:
        return AuthorName()
    if len(tokens) == 1:
        return AuthorName(last=tokens[0])
    if len(tokens) == 2:
        return AuthorName(first=tokens[0], last=tokens[1])
    return AuthorName(first=tokens[0], middle=tokens[1], last=tokens[-1])


def normalize_author(raw: Optional[str], affixes: Iterable[str] = DEFAULT_NAME_AFFIXES) -> AuthorName:
    """Split a raw person name into normalized first/middle/last parts.

    One token is a last name, two are (first, last), three or more are
    (first, second-as-middle, final-as-last). Prefixes and suffixes in
    ``affixes`` are removed. A single comma is read as ``Last, First``.
    """
    if not raw:
        return AuthorName()
    return _normalize_author(raw, frozenset(affixes))


# -- simhash ---------------------------------------------------------------

SIMHASH_BITS = 64
_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
SIMHASH_SEED = 0x5EED1E55


@lru_cache(maxsize=1 << 20)
def token_hash64(token: str, seed: int = SIMHASH_SEED) -> int:
    """FNV-1a over UTF-8 bytes followed by the murmur3 fmix64 finalizer."""
    h = (_FNV_OFFSET ^ seed) & _MASK64
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK64
    h ^= h >> 33
    return h


@dataclass(frozen=True)
class Simhash:
    digest: int

    def hex(self) -> str:
        return format(self.digest, "016x")

    def __str__(self) -> str:
        return self.hex()


@lru_cache(maxsize=1 << 18)
def simhash(text: str) -> Simhash:
    """64-bit simhash over whitespace-delimited tokens, weighted by count."""
    counts = Counter(text.split()) if text else Counter()
    if not counts:
        return Simhash(0)
    acc = [0] * SIMHASH_BITS
    for token, weight in counts.items():
        h = token_hash64(token)
        for bit in range(SIMHASH_BITS):
            if (h >> bit) & 1:
                acc[bit] += weight
            else:
                acc[bit] -= weight
    digest = 0
    for bit, total in enumerate(acc):
        if total > 0:
            digest |= 1 << bit
    return Simhash(digest)


# -- distances -------------------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


@lru_cache(maxsize=1 << 18)
def simhash_distance(a: str, b: str) -> float:
    """Normalized Levenshtein distance between the hex simhashes of two texts."""
    return normalized_levenshtein(simhash(a).hex(), simhash(b).hex())


def jaccard(a: Iterable, b: Iterable) -> float:
    """Set Jaccard similarity; two empty sets count as identical."""
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)
