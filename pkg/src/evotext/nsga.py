"""Pareto machinery for maximization problems (NSGA-II sorting, crowding, truncation)."""

from __future__ import annotations

import math

import numpy as np


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    better = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            better = True
    return better


def domination_matrix(points) -> np.ndarray:
    """``D[i, j]`` is True when point i dominates point j."""
    F = np.asarray(points, dtype=np.float64)
    if F.ndim != 2:
        F = F.reshape(len(F), -1)
    ge = (F[:, None, :] >= F[None, :, :]).all(axis=2)
    gt = (F[:, None, :] > F[None, :, :]).any(axis=2)
    return ge & gt


def fast_nondominated_sort(points) -> list[list[int]]:
    """Partition indices into successive non-dominated fronts (each sorted ascending)."""
    n = len(points)
    if n == 0:
        return []
    D = domination_matrix(points)
    dominated_by = D.sum(axis=0)
    fronts = []
    current = sorted(np.flatnonzero(dominated_by == 0).tolist())
    while current:
        fronts.append(current)
        nxt = []
        for p in current:
            for q in np.flatnonzero(D[p]):
                dominated_by[q] -= 1
                if dominated_by[q] == 0:
                    nxt.append(int(q))
        current = sorted(nxt)
    return fronts


def crowding_distance(front) -> list[float]:
    """NSGA-II density estimate for the members of one front.

    Fronts of at most two members are all boundary points. An objective with
    zero range across the front contributes nothing, including at its ends.
    """
    F = np.asarray(front, dtype=np.float64)
    n = len(F)
    if n == 0:
        raise ValueError("empty front")
    if n <= 2:
        return [math.inf] * n
    dist = np.zeros(n)
    for m in range(F.shape[1]):
        col = F[:, m]
        order = np.argsort(col, kind="stable")
        lo, hi = col[order[0]], col[order[-1]]
        span = hi - lo
        if span == 0:
            continue
        dist[order[0]] = dist[order[-1]] = math.inf
        gaps = (col[order[2:]] - col[order[:-2]]) / span
        dist[order[1:-1]] += gaps
    return dist.tolist()


def rank_and_crowding(points):
    """Per-index front rank and within-front crowding distance."""
    fronts = fast_nondominated_sort(points)
    rank = [0] * len(points)
    crowd = [0.0] * len(points)
    for r, front in enumerate(fronts):
        for i, d in zip(front, crowding_distance([points[i] for i in front])):
            rank[i] = r
            crowd[i] = d
    return fronts, rank, crowd


def select_nsga2(points, size: int) -> list[int]:
    """Elitist truncation to ``size`` indices: whole fronts first, then by crowding.

    Ties in crowding distance keep insertion order.
    """
    if size > len(points):
        raise ValueError(f"cannot keep {size} of {len(points)} members")
    chosen: list[int] = []
    for front in fast_nondominated_sort(points):
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            if len(chosen) == size:
                break
            continue
        dist = crowding_distance([points[i] for i in front])
        ranked = sorted(range(len(front)), key=lambda k: (-dist[k], front[k]))
        chosen.extend(front[k] for k in ranked[: size - len(chosen)])
        break
    return chosen
