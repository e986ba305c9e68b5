"""Word-vector tables and cosine-threshold synonym search."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_DELTA = 0.6
DEFAULT_K = 8


class EmbeddingFormatError(ValueError):
    pass


@dataclass(eq=False)
class WordEmbeddingTable:
    """Unit-normalized word vectors with exact cosine search.

    Vectors live in one row-major matrix; ``index`` maps a word to its row.
    """

    words: list[str]
    matrix: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.words):
            raise ValueError("matrix must have one row per word")
        norms = np.linalg.norm(self.matrix, axis=1)
        if np.any(norms == 0):
            bad = self.words[int(np.argmin(norms))]
            raise EmbeddingFormatError(f"zero vector for {bad!r}")
        self.matrix = self.matrix / norms[:, None]
        self.matrix.setflags(write=False)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words; use load_table to resolve them")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, word) -> bool:
        return word in self.index

    def __len__(self):
        return len(self.words)

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self.index[word]]

    def get(self, word: str):
        i = self.index.get(word)
        return None if i is None else self.matrix[i]

    def similarities(self, word: str) -> np.ndarray:
        """Cosine of ``word`` against every row of the table."""
        return self.matrix @ self.vector(word)

    def similarity(self, a: str, b: str) -> float:
        return float(self.vector(a) @ self.vector(b))


def load_table(source) -> WordEmbeddingTable:
    """Parse ``<word> <f1> ... <fd>`` lines; later duplicates overwrite earlier ones."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_table(fh)
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))

    rows: dict[str, list[float]] = {}
    dim = None
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        parts = line.split(" ")
        if len(parts) < 2:
            raise EmbeddingFormatError(f"line {lineno}: expected a word followed by floats")
        word, fields = parts[0], parts[1:]
        try:
            vec = [float(x) for x in fields]
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric field") from None
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise EmbeddingFormatError(
                f"line {lineno}: dimensionality mismatch ({len(vec)} != {dim})"
            )
        rows.pop(word, None)
        rows[word] = vec
    if not rows:
        raise EmbeddingFormatError("no vectors found")
    words = list(rows)
    return WordEmbeddingTable(words, np.array([rows[w] for w in words]))


def save_table(table: WordEmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w, row in zip(table.words, table.matrix):
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in row) + "\n")


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine is undefined for a zero vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def nearest_synonyms(word, general, counterfitted, delta=DEFAULT_DELTA, k=DEFAULT_K):
    """Neighbours of ``word`` passing ``delta`` in both spaces.

    Search runs in the general space and is filtered by the counter-fitted
    one. Returns ``[(token, general_similarity), ...]`` sorted by similarity
    descending, ties broken lexicographically.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must be in (0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    if word not in general or word not in counterfitted:
        return []
    sims = general.similarities(word)
    hits = []
    for i in np.flatnonzero(sims >= delta):
        cand = general.words[i]
        if cand == word or cand not in counterfitted:
            continue
        if counterfitted.similarity(word, cand) >= delta:
            hits.append((cand, float(sims[i])))
    hits.sort(key=lambda t: (-t[1], t[0]))
    return hits[:k]


class SynonymIndex:
    """Memoized ``nearest_synonyms`` over a fixed table pair."""

    def __init__(self, general, counterfitted, delta=DEFAULT_DELTA, k=DEFAULT_K):
        self.general = general
        self.counterfitted = counterfitted
        self.delta = delta
        self.k = k
        self._cache: dict[str, tuple[str, ...]] = {}

    def __call__(self, word: str) -> tuple[str, ...]:
        hit = self._cache.get(word)
        if hit is None:
            hit = tuple(
                w for w, _ in nearest_synonyms(word, self.general, self.counterfitted, self.delta, self.k)
            )
            self._cache[word] = hit
        return hit

    def satisfies(self, a: str, b: str) -> bool:
        """Both-space threshold check used for post-hoc verification."""
        if a not in self.general or b not in self.general:
            return False
        if a not in self.counterfitted or b not in self.counterfitted:
            return False
        return (
            self.general.similarity(a, b) >= self.delta
            and self.counterfitted.similarity(a, b) >= self.delta
        )
