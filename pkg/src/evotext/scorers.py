"""Sentence encoders, language models and word-importance rankers."""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from evotext.remote import JsonClient, MalformedResponse
from evotext.text import as_tokens

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"


# -- sentence encoders -------------------------------------------------------


class SentenceEncoder:
    """``encode(tokens)`` returns ``(vector, ok)``; ``ok`` is False for the zero sentinel."""

    dim: int

    def encode(self, tokens):
        raise NotImplementedError


def encode_mean(tokens, table):
    """Unit-normalized mean of the in-vocabulary token vectors."""
    toks = as_tokens(tokens)
    if not toks:
        raise ValueError("cannot encode an empty sequence")
    rows = [table.index[w] for w in toks if w in table.index]
    if not rows:
        return np.zeros(table.dim), False
    v = table.matrix[rows].mean(axis=0)
    n = np.linalg.norm(v)
    if n == 0:
        return np.zeros(table.dim), False
    return v / n, True


class MeanEmbeddingEncoder(SentenceEncoder):
    def __init__(self, table):
        self.table = table
        self.dim = table.dim
        self._cache = {}

    def encode(self, tokens):
        toks = as_tokens(tokens)
        hit = self._cache.get(toks)
        if hit is None:
            hit = self._cache[toks] = encode_mean(toks, self.table)
        return hit


class RemoteEncoder(SentenceEncoder):
    """``POST /encode {"texts": [...]}`` -> ``{"vectors": [[...], ...]}``."""

    def __init__(self, endpoint, retries=2):
        self.client = JsonClient(endpoint, retries=retries)
        self.dim = None
        self._cache = {}

    def encode(self, tokens):
        toks = as_tokens(tokens)
        if toks in self._cache:
            return self._cache[toks]
        resp = self.client.post("/encode", {"texts": [" ".join(toks)]})
        try:
            vec = np.asarray(resp["vectors"][0], dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError):
            raise MalformedResponse("response lacks 'vectors'") from None
        if self.dim is None:
            self.dim = vec.shape[0]
        elif vec.shape != (self.dim,):
            raise MalformedResponse(f"encoder dimensionality changed to {vec.shape}")
        n = np.linalg.norm(vec)
        out = (vec / n, True) if n > 0 else (np.zeros(self.dim), False)
        self._cache[toks] = out
        return out


def semantic_similarity(a, b, encoder: SentenceEncoder) -> float:
    """Cosine of the two encodings; 0 when either side is the zero sentinel."""
    va, ok_a = encoder.encode(a)
    vb, ok_b = encoder.encode(b)
    if not (ok_a and ok_b):
        return 0.0
    return float(np.clip(va @ vb, -1.0, 1.0))


# -- language models ---------------------------------------------------------


class LanguageModel:
    """``nll(tokens)``: mean per-word negative log-likelihood in nats."""

    def nll(self, tokens) -> float:
        raise NotImplementedError

    def perplexity(self, tokens) -> float:
        return math.exp(self.nll(tokens))


class NGramLM(LanguageModel):
    """Additive-smoothed n-gram model.

    Predictions range over the training vocabulary plus ``<unk>`` and
    ``</s>``; each sentence is padded with ``n-1`` start symbols and one end
    symbol, so a k-word sentence contributes k+1 predictions.
    """

    def __init__(self, order, smoothing, ngram_counts, context_counts, vocab):
        self.order = order
        self.smoothing = smoothing
        self.ngram_counts = ngram_counts
        self.context_counts = context_counts
        self.vocab = frozenset(vocab)
        self.outcomes = sorted(self.vocab | {UNK, EOS})

    def _norm(self, w):
        return w if w in self.vocab else UNK

    def prob(self, word, context) -> float:
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        num = self.ngram_counts.get(ctx + (word,), 0) + self.smoothing
        den = self.context_counts.get(ctx, 0) + self.smoothing * len(self.outcomes)
        return num / den

    def _events(self, tokens):
        seq = [BOS] * (self.order - 1) + [self._norm(w) for w in tokens] + [EOS]
        for i in range(self.order - 1, len(seq)):
            yield tuple(seq[i - self.order + 1 : i]), seq[i]

    def nll(self, tokens) -> float:
        toks = as_tokens(tokens)
        if not toks:
            raise ValueError("nll of an empty sequence")
        total = 0.0
        n = 0
        for ctx, w in self._events(toks):
            total -= math.log(self.prob(w, ctx))
            n += 1
        return total / n


def train_ngram_lm(corpus, order: int = 3, smoothing: float = 0.1) -> NGramLM:
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    sents = [as_tokens(s) for s in corpus]
    sents = [s for s in sents if s]
    if not sents:
        raise ValueError("empty language-model corpus")
    vocab = {w for s in sents for w in s}
    ngrams = Counter()
    contexts = Counter()
    for s in sents:
        seq = [BOS] * (order - 1) + list(s) + [EOS]
        for i in range(order - 1, len(seq)):
            ctx = tuple(seq[i - order + 1 : i])
            ngrams[ctx + (seq[i],)] += 1
            contexts[ctx] += 1
    return NGramLM(order, smoothing, dict(ngrams), dict(contexts), vocab)


def read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


class RemoteLM(LanguageModel):
    """``POST /nll {"texts": [...]}`` -> ``{"nll": [...]}``."""

    def __init__(self, endpoint, retries=2):
        self.client = JsonClient(endpoint, retries=retries)

    def nll(self, tokens) -> float:
        resp = self.client.post("/nll", {"texts": [" ".join(as_tokens(tokens))]})
        try:
            value = float(resp["nll"][0])
        except (KeyError, IndexError, TypeError, ValueError):
            raise MalformedResponse("response lacks 'nll'") from None
        if not math.isfinite(value) or value < 0:
            raise MalformedResponse(f"invalid nll {value!r}")
        return value


# -- word importance ---------------------------------------------------------


class WordImportance:
    def rank(self, tokens, model) -> list[float]:
        raise NotImplementedError


def word_importance_loo(tokens, model) -> list[float]:
    """Drop in original-label posterior when each position is removed.

    One-word inputs substitute the unknown-word type instead of deleting.
    """
    toks = as_tokens(tokens)
    if not toks:
        raise ValueError("empty sequence")
    if len(toks) == 1:
        variants = [(UNK,)]
    else:
        variants = [toks[:i] + toks[i + 1 :] for i in range(len(toks))]
    dists = model.classify_batch([toks] + variants)
    base = dists[0]
    label = base.argmax
    return [base.probs[label] - d.probs[label] for d in dists[1:]]


class LeaveOneOutImportance(WordImportance):
    def rank(self, tokens, model):
        return word_importance_loo(tokens, model)
