"""Independent reference computations used by the test-suite."""

import math
from collections import Counter
from fractions import Fraction


def dominates_ref(a, b):
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))


def pareto_peel(points):
    """O(n^2 m) peeling: each front is the set not dominated by any remaining point."""
    remaining = set(range(len(points)))
    fronts = []
    while remaining:
        front = sorted(i for i in remaining if not any(dominates_ref(points[j], points[i]) for j in remaining))
        fronts.append(front)
        remaining -= set(front)
    return fronts


def crowding_ref(front):
    n = len(front)
    if n <= 2:
        return [math.inf] * n
    dist = [0.0] * n
    for m in range(len(front[0])):
        order = sorted(range(n), key=lambda i: front[i][m])
        lo, hi = front[order[0]][m], front[order[-1]][m]
        if hi == lo:
            continue
        dist[order[0]] = math.inf
        dist[order[-1]] = math.inf
        for k in range(1, n - 1):
            dist[order[k]] += (front[order[k + 1]][m] - front[order[k - 1]][m]) / (hi - lo)
    return dist


def bleu_ref(ref, hyp):
    """Sentence BLEU-4 with add-one smoothing for n >= 2, from raw n-gram counts."""
    precisions = []
    for n in range(1, 5):
        hyp_grams = Counter()
        for i in range(len(hyp) - n + 1):
            hyp_grams[" ".join(hyp[i : i + n])] += 1
        ref_grams = Counter()
        for i in range(len(ref) - n + 1):
            ref_grams[" ".join(ref[i : i + n])] += 1
        clipped = 0
        for g in hyp_grams:
            clipped += min(hyp_grams[g], ref_grams[g])
        total = max(len(hyp) - n + 1, 0)
        if n >= 2:
            clipped += 1
            total += 1
        precisions.append((clipped, total))
    if any(c == 0 for c, _ in precisions):
        return 0.0
    log_mean = sum(math.log(c / t) for c, t in precisions) / 4
    bp = 1.0 if len(hyp) > len(ref) else math.exp(1 - len(ref) / len(hyp))
    return bp * math.exp(log_mean)


def nb_oracle(corpus, alpha, query):
    """Log-space multinomial naive Bayes written from the textbook formula."""
    labels = []
    for lab, _ in corpus:
        if lab not in labels:
            labels.append(lab)
    docs = {c: 0 for c in labels}
    counts = {c: {} for c in labels}
    vocab = set()
    for lab, text in corpus:
        docs[lab] += 1
        for w in text.split():
            counts[lab][w] = counts[lab].get(w, 0) + 1
            vocab.add(w)
    scores = []
    for c in labels:
        total = sum(counts[c].values())
        s = math.log(docs[c] / len(corpus))
        for w in query:
            s += math.log((counts[c].get(w, 0) + alpha) / (total + alpha * len(vocab)))
        scores.append(s)
    m = max(scores)
    z = sum(math.exp(s - m) for s in scores)
    return labels, [math.exp(s - m) / z for s in scores]


def pair_set_jaccard(a, b):
    A = set(enumerate(a))
    B = set(enumerate(b))
    return Fraction(len(A & B), len(A | B))
