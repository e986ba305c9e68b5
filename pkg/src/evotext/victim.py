"""Black-box classifiers: the query contract, a naive-Bayes stand-in and a remote client."""

from __future__ import annotations

import csv
import json
import math
import threading
from collections import Counter
from dataclasses import dataclass

import numpy as np

from evotext.remote import JsonClient, MalformedResponse
from evotext.text import TokenSeq, as_tokens, preprocess

PROB_TOL = 1e-6


class DistributionError(ValueError):
    """A classifier returned something that is not a probability distribution."""


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class LabelDistribution:
    probs: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2 or len(probs) != len(self.labels):
            raise DistributionError(
                f"need >= 2 labels and one prob per label, got {len(probs)} probs for {len(self.labels)} labels"
            )
        if any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in probs):
            raise DistributionError(f"probabilities out of [0, 1]: {probs}")
        if abs(sum(probs) - 1.0) > PROB_TOL:
            raise DistributionError(f"probabilities sum to {sum(probs)!r}")

    @property
    def argmax(self) -> int:
        return max(range(len(self.probs)), key=lambda i: (self.probs[i], -i))

    @property
    def label(self) -> str:
        return self.labels[self.argmax]

    def prob(self, label) -> float:
        return self.probs[self.labels.index(label)]


class VictimModel:
    """Contract for the classifier under attack.

    Subclasses implement ``_classify_batch``; ``classify`` and
    ``classify_batch`` validate input and count queries (one per text).
    """

    labels: tuple[str, ...]

    def __init__(self):
        self._queries = 0
        self._qlock = threading.Lock()

    @property
    def queries(self) -> int:
        return self._queries

    def classify(self, text) -> LabelDistribution:
        return self.classify_batch([text])[0]

    def classify_batch(self, texts) -> list[LabelDistribution]:
        seqs = [as_tokens(t) for t in texts]
        if not seqs:
            return []
        if any(len(s) == 0 for s in seqs):
            raise ValueError("cannot classify an empty token sequence")
        out = self._classify_batch(seqs)
        with self._qlock:
            self._queries += len(seqs)
        return out

    def _classify_batch(self, seqs):
        raise NotImplementedError


class NaiveBayesVictim(VictimModel):
    """Multinomial naive Bayes over unigram counts with additive smoothing."""

    def __init__(self, labels, class_docs, word_counts, smoothing):
        super().__init__()
        self.labels = tuple(labels)
        self.class_docs = {c: int(class_docs[c]) for c in self.labels}
        self.word_counts = {c: dict(word_counts[c]) for c in self.labels}
        self.smoothing = float(smoothing)
        vocab = set()
        for c in self.labels:
            vocab.update(self.word_counts[c])
        self.vocab = frozenset(vocab)
        n_docs = sum(self.class_docs.values())
        V = len(self.vocab)
        self._log_prior = np.array([math.log(self.class_docs[c] / n_docs) for c in self.labels])
        totals = [sum(self.word_counts[c].values()) for c in self.labels]
        denom = [t + self.smoothing * V for t in totals]
        self._log_unseen = np.array([math.log(self.smoothing / d) for d in denom])
        self._log_lik = {
            w: np.array(
                [math.log((self.word_counts[c].get(w, 0) + self.smoothing) / d) for c, d in zip(self.labels, denom)]
            )
            for w in self.vocab
        }

    def log_joint(self, tokens) -> np.ndarray:
        acc = self._log_prior.copy()
        for w in tokens:
            acc += self._log_lik.get(w, self._log_unseen)
        return acc

    def _classify_batch(self, seqs):
        out = []
        for toks in seqs:
            joint = self.log_joint(toks)
            joint -= joint.max()
            p = np.exp(joint)
            p /= p.sum()
            out.append(LabelDistribution(tuple(p.tolist()), self.labels))
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "multinomial_nb",
            "labels": list(self.labels),
            "smoothing": self.smoothing,
            "class_docs": self.class_docs,
            "word_counts": {c: dict(sorted(self.word_counts[c].items())) for c in self.labels},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesVictim":
        if d.get("kind") != "multinomial_nb":
            raise ValueError(f"unsupported model kind {d.get('kind')!r}")
        return cls(d["labels"], d["class_docs"], d["word_counts"], d["smoothing"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "NaiveBayesVictim":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train_bow(corpus, smoothing: float = 1.0) -> NaiveBayesVictim:
    """Fit naive Bayes on ``[(label, text), ...]``; labels are ordered by first appearance."""
    corpus = list(corpus)
    if not corpus:
        raise CorpusError("empty training corpus")
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    labels = list(dict.fromkeys(label for label, _ in corpus))
    if len(labels) < 2:
        raise CorpusError(f"corpus has a single label ({labels[0]!r}); need at least 2")
    docs = Counter()
    counts = {c: Counter() for c in labels}
    for label, text in corpus:
        docs[label] += 1
        counts[label].update(as_tokens(text))
    return NaiveBayesVictim(labels, docs, counts, smoothing)


def read_labeled_csv(path) -> list[tuple[str, str]]:
    """Read a ``label,text`` CSV; raises CorpusError naming the offending row."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["label", "text"]:
            raise CorpusError(f"{path}: expected header 'label,text', got {header!r}")
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise CorpusError(f"{path}: row {rowno} has {len(row)} fields, expected 2")
            label, text = row[0].strip(), row[1]
            if not label:
                raise CorpusError(f"{path}: row {rowno} has an empty label")
            rows.append((label, text))
    return rows


class RemoteVictim(VictimModel):
    """Client for ``POST /classify`` returning ``{"labels": [...], "probs": [[...], ...]}``."""

    def __init__(self, endpoint: str, retries: int = 2, timeout: float = 10.0):
        super().__init__()
        self.client = JsonClient(endpoint, retries=retries, timeout=timeout)
        self.labels = None

    def _classify_batch(self, seqs):
        resp = self.client.post("/classify", {"texts": [" ".join(s) for s in seqs]})
        try:
            labels = tuple(resp["labels"])
            rows = resp["probs"]
        except (KeyError, TypeError):
            raise MalformedResponse("response lacks 'labels'/'probs'") from None
        if not isinstance(rows, list) or len(rows) != len(seqs):
            raise MalformedResponse(f"expected {len(seqs)} distributions, got {len(rows) if isinstance(rows, list) else rows!r}")
        if self.labels is None:
            self.labels = labels
        elif labels != self.labels:
            raise MalformedResponse(f"label order changed from {self.labels} to {labels}")
        return [LabelDistribution(tuple(r), labels) for r in rows]


def remote_classify(endpoint: str, texts, retries: int = 2) -> list[LabelDistribution]:
    if not texts:
        raise ValueError("empty batch")
    return RemoteVictim(endpoint, retries=retries).classify_batch(texts)


def load_victim(spec: str) -> VictimModel:
    """Resolve ``builtin:<model-file>`` or ``remote:<url>``."""
    kind, _, target = spec.partition(":")
    if kind == "builtin" and target:
        return NaiveBayesVictim.load(target)
    if kind == "remote" and target:
        return RemoteVictim(target)
    raise ValueError(f"victim spec must be builtin:<file> or remote:<url>, got {spec!r}")


class CachedVictim(VictimModel):
    """Memoizes posteriors by token tuple; ``queries`` counts only real lookups."""

    def __init__(self, inner: VictimModel):
        super().__init__()
        self.inner = inner
        self._cache: dict[tuple, LabelDistribution] = {}

    @property
    def labels(self):
        return self.inner.labels

    def _classify_batch(self, seqs):
        missing = list(dict.fromkeys(s for s in seqs if s not in self._cache))
        if missing:
            for s, d in zip(missing, self.inner.classify_batch(missing)):
                self._cache[s] = d
        return [self._cache[s] for s in seqs]

    def classify_batch(self, texts):
        seqs = [as_tokens(t) for t in texts]
        if any(len(s) == 0 for s in seqs):
            raise ValueError("cannot classify an empty token sequence")
        before = self.inner.queries
        out = self._classify_batch(seqs)
        with self._qlock:
            self._queries += self.inner.queries - before
        return out


__all__ = [
    "LabelDistribution",
    "VictimModel",
    "NaiveBayesVictim",
    "RemoteVictim",
    "CachedVictim",
    "train_bow",
    "remote_classify",
    "read_labeled_csv",
    "load_victim",
    "preprocess",
    "TokenSeq",
]
