"""Tokenization and structural similarity shared by every stage of the attack."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from fractions import Fraction

# ASCII punctuation, removed outright (not replaced by a space).
STRIP_SET = string.punctuation
_STRIP_TABLE = str.maketrans("", "", STRIP_SET)


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    raw: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def replace(self, position: int, token: str) -> "TokenSeq":
        toks = list(self.tokens)
        toks[position] = token
        return TokenSeq(tuple(toks), self.raw)


def preprocess(raw: str) -> TokenSeq:
    """Lowercase, drop ASCII punctuation, split on whitespace runs."""
    cleaned = raw.lower().translate(_STRIP_TABLE)
    return TokenSeq(tuple(cleaned.split()), raw)


def as_tokens(x) -> tuple[str, ...]:
    if isinstance(x, TokenSeq):
        return x.tokens
    if isinstance(x, str):
        return preprocess(x).tokens
    return tuple(x)


def _pair_counts(a, b) -> tuple[int, int]:
    a, b = as_tokens(a), as_tokens(b)
    if not a or not b:
        raise ValueError("positional_jaccard is undefined for empty sequences")
    inter = sum(1 for x, y in zip(a, b) if x == y)
    return inter, len(a) + len(b) - inter


def positional_jaccard(a, b) -> float:
    """Jaccard coefficient over the sets of (position, token) pairs."""
    inter, union = _pair_counts(a, b)
    return inter / union


def positional_jaccard_exact(a, b) -> Fraction:
    inter, union = _pair_counts(a, b)
    return Fraction(inter, union)


def words_replaced(a, b) -> int:
    a, b = as_tokens(a), as_tokens(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)
