"""Final adversary selection and the reported attack metrics."""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from evotext.engine import Adversary, final_score
from evotext.text import as_tokens, words_replaced


class NoSuccessError(ValueError):
    pass


def pick_best(population, orig, victim, lm, alpha=1.2, label_index=None):
    """Highest-scoring label-flipping ``ind_mut`` in ``population``, or None.

    Ties go to the higher structural similarity, then the lexicographically
    smaller token sequence.
    """
    orig = as_tokens(orig)
    base = victim.classify(orig)
    label_index = base.argmax if label_index is None else label_index
    seen = {}
    for cand in population:
        seen.setdefault(tuple(cand.ind_mut), cand)
    if not seen:
        return None
    forms = list(seen)
    dists = victim.classify_batch(forms)
    best = None
    for form, dist in zip(forms, dists):
        if dist.argmax == label_index:
            continue
        cand = seen[form]
        f2, f3 = cand.fitness[1], cand.fitness[2]
        loss = lm.nll(form)
        key = (-final_score(f2, f3, loss, alpha), -f2, form)
        if best is None or key < best[0]:
            best = (key, Adversary(form, -key[0], tuple(cand.fitness), loss, dist.label))
    return None if best is None else best[1]


def success_rate(outcomes) -> float:
    """Percent of attacked (originally correct) inputs whose label flipped."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("no attack outcomes")
    return 100.0 * sum(1 for o in outcomes if o.success) / len(outcomes)


def degraded_accuracy(original_acc: float, outcomes) -> float:
    return original_acc * (1.0 - success_rate(outcomes) / 100.0)


def awr(outcomes) -> float:
    """Average words replaced over the successful attacks."""
    counts = [words_replaced(o.original, o.chosen.tokens) for o in outcomes if o.success]
    if not counts:
        raise NoSuccessError("AWR needs at least one successful attack")
    return sum(counts) / len(counts)


def transferability(pairs, model_b) -> tuple[float, list]:
    """Share of adversaries that also flip ``model_b``.

    ``pairs`` holds ``(original_tokens, adversary_tokens, true_label)``;
    pairs whose original ``model_b`` misclassifies are filtered out first.
    Returns the percentage and a per-pair flag (None for filtered pairs).
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no adversaries to transfer")
    origs = model_b.classify_batch([p[0] for p in pairs])
    advs = model_b.classify_batch([p[1] for p in pairs])
    flags = []
    for (_, _, label), do, da in zip(pairs, origs, advs):
        if do.label != label:
            flags.append(None)
        else:
            flags.append(da.label != do.label)
    kept = [f for f in flags if f is not None]
    if not kept:
        raise ValueError("model B misclassifies every original input")
    return 100.0 * sum(kept) / len(kept), flags


# -- overlap metrics ---------------------------------------------------------


def _ngrams(toks, n):
    return Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))


def bleu(reference, hypothesis, max_n: int = 4) -> float:
    """Sentence BLEU with add-one smoothing on the 2..4-gram precisions."""
    ref, hyp = as_tokens(reference), as_tokens(hypothesis)
    if not ref or not hyp:
        raise ValueError("bleu needs non-empty sentences")
    logs = 0.0
    for n in range(1, max_n + 1):
        h, r = _ngrams(hyp, n), _ngrams(ref, n)
        match = sum(min(c, r[g]) for g, c in h.items())
        total = sum(h.values())
        if n > 1:
            match, total = match + 1, total + 1
        if match == 0:
            return 0.0
        logs += math.log(match / total)
    bp = 1.0 if len(hyp) > len(ref) else math.exp(1 - len(ref) / len(hyp))
    return bp * math.exp(logs / max_n)


def _vectors(toks, table):
    return [(w, table.vector(w)) for w in toks if w in table]


def greedy_matching(a, b, table):
    va, vb = _vectors(as_tokens(a), table), _vectors(as_tokens(b), table)
    if not va or not vb:
        return None

    def one_way(xs, ys):
        total = 0.0
        for wx, x in xs:
            best = -1.0
            for wy, y in ys:
                s = 1.0 if wx == wy else float(x @ y)
                best = max(best, s)
            total += best
        return total / len(xs)

    return 0.5 * (one_way(va, vb) + one_way(vb, va))


def _extrema(vecs):
    M = np.stack([v for _, v in vecs])
    hi, lo = M.max(axis=0), M.min(axis=0)
    return np.where(np.abs(lo) > np.abs(hi), lo, hi)


def vector_extrema(a, b, table):
    va, vb = _vectors(as_tokens(a), table), _vectors(as_tokens(b), table)
    if not va or not vb:
        return None
    ea, eb = _extrema(va), _extrema(vb)
    if np.array_equal(ea, eb):
        return 1.0
    na, nb = np.linalg.norm(ea), np.linalg.norm(eb)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(ea @ eb / (na * nb), -1.0, 1.0))


def overlap_metrics(orig, adv, table) -> dict:
    return {
        "bleu": bleu(orig, adv),
        "gms": greedy_matching(orig, adv, table),
        "vecs": vector_extrema(orig, adv, table),
    }


# -- distributions -----------------------------------------------------------

HIST_EDGES = {
    "f2": np.linspace(0.0, 1.0, 11).tolist(),
    "f3": np.linspace(-1.0, 1.0, 21).tolist(),
    "lm": np.linspace(0.0, 15.0, 16).tolist(),
    "bleu": np.linspace(0.0, 1.0, 11).tolist(),
    "gms": np.linspace(-1.0, 1.0, 21).tolist(),
    "vecs": np.linspace(-1.0, 1.0, 21).tolist(),
}


def histogram(values, edges) -> dict:
    vals = [v for v in values if v is not None]
    counts, _ = np.histogram(np.clip(vals, edges[0], edges[-1]), bins=edges) if vals else (np.zeros(len(edges) - 1, int), None)
    return {"edges": list(edges), "counts": [int(c) for c in counts]}
