"""Independent brute-force oracles used to cross-check the library.

These deliberately avoid the library's own algorithms: shortest paths via
dense dynamic programming, clustering via exhaustive enumeration, pair
rates via a double loop.
"""

from itertools import combinations

import numpy as np


def floyd_warshall(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths by dynamic programming over a dense matrix.

    ``weights[i, j]`` is the direct edge weight or +inf; the diagonal is 0.
    """
    dist = weights.copy()
    n = dist.shape[0]
    np.fill_diagonal(dist, 0.0)
    for k in range(n):
        via = dist[:, k, None] + dist[None, k, :]
        dist = np.minimum(dist, via)
    return dist


def brute_force_kmedoids(values: np.ndarray, k: int) -> float:
    """Exact optimum of the k-medoids objective by enumerating medoid sets."""
    n = values.shape[0]
    best = np.inf
    for medoids in combinations(range(n), k):
        objective = values[:, medoids].min(axis=1).sum()
        if objective < best:
            best = objective
    return float(best)


def pair_rates_brute(assignments, truth) -> tuple[float, float]:
    """Rate of true and false association via an explicit pair loop."""
    n = len(truth)
    same_together = same_total = cross_together = cross_total = 0
    for i in range(n):
        for j in range(i + 1, n):
            if truth[i] == truth[j]:
                same_total += 1
                if assignments[i] == assignments[j]:
                    same_together += 1
            else:
                cross_total += 1
                if assignments[i] == assignments[j]:
                    cross_together += 1
    return 100.0 * same_together / same_total, 100.0 * cross_together / cross_total


def error_rate_brute(assignments, truth) -> float:
    """Error rate via explicit per-cluster majority votes."""
    assignments = list(assignments)
    truth = list(truth)
    wrong = 0
    for cluster in sorted(set(assignments)):
        members = [t for a, t in zip(assignments, truth) if a == cluster]
        counts = {}
        for t in members:
            counts[t] = counts.get(t, 0) + 1
        top = max(counts.values())
        majority = min(t for t, c in counts.items() if c == top)
        wrong += sum(1 for t in members if t != majority)
    return 100.0 * wrong / len(truth)
