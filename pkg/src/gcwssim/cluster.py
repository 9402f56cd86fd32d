"""k-medoids clustering on a precomputed distance matrix.

The solver alternates two steps until the assignments stop changing:
assign every point to its closest medoid, then move each medoid to the
cluster member minimizing the within-cluster distance sum. Medoids are
always data points. Restarts rerun the solver from different seeded
initializations and keep the lowest-objective result.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .manifold import DistanceMatrix

MAX_ITERATIONS = 200


@dataclass(frozen=True)
class ClusteringResult:
    medoids: tuple[int, ...]
    assignments: np.ndarray
    objective: float
    iterations: int
    seed: int
    hit_iteration_cap: bool = False
    history: tuple[float, ...] = ()
    restart_objectives: tuple[float, ...] | None = None
    restart_cap_hits: int | None = None

    @property
    def k(self) -> int:
        return len(self.medoids)


def assign(D: DistanceMatrix, medoids) -> np.ndarray:
    """Closest-medoid cluster index per point; ties go to the lowest cluster."""
    medoids = np.asarray(medoids, dtype=np.int64)
    if len(np.unique(medoids)) != len(medoids):
        raise ValueError(f"duplicate medoids: {medoids.tolist()}")
    if medoids.min() < 0 or medoids.max() >= D.n:
        raise ValueError(f"medoid index out of range 0..{D.n - 1}")
    return np.argmin(D.values[:, medoids], axis=1)


def update_medoids(D: DistanceMatrix, assignments) -> np.ndarray:
    """Per cluster, the member minimizing the summed distance to all members;
    ties go to the lowest point index."""
    assignments = np.asarray(assignments, dtype=np.int64)
    k = int(assignments.max()) + 1
    medoids = np.empty(k, dtype=np.int64)
    for j in range(k):
        members = np.flatnonzero(assignments == j)
        if members.size == 0:
            raise ValueError(f"cluster {j} is empty")
        within = D.values[np.ix_(members, members)]
        medoids[j] = members[np.argmin(within.sum(axis=0))]
    return medoids


def objective_value(D: DistanceMatrix, medoids, assignments) -> float:
    """Sum over points of the distance to their assigned medoid."""
    medoids = np.asarray(medoids, dtype=np.int64)
    assignments = np.asarray(assignments, dtype=np.int64)
    return float(D.values[np.arange(D.n), medoids[assignments]].sum())


def _assign_with_repair(D: DistanceMatrix, medoids: np.ndarray):
    """Assign points; if a cluster comes back empty, move its medoid to the
    point farthest from the old medoid and try again."""
    medoids = medoids.copy()
    k = len(medoids)
    for _ in range(2 * k + 1):
        assignments = assign(D, medoids)
        counts = np.bincount(assignments, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return medoids, assignments
        for j in empty:
            candidates = D.values[:, medoids[j]].copy()
            candidates[medoids] = -1.0
            medoids[j] = int(np.argmax(candidates))
    raise RuntimeError("could not repair empty clusters (degenerate distance ties)")


def kmedoids(
    D: DistanceMatrix, k: int, seed: int, max_iter: int = MAX_ITERATIONS
) -> ClusteringResult:
    """One seeded run: uniform medoid initialization without replacement,
    then alternate assignment and medoid updates until assignments settle."""
    n = D.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    medoids = rng.choice(n, size=k, replace=False).astype(np.int64)
    medoids, assignments = _assign_with_repair(D, medoids)
    history = [objective_value(D, medoids, assignments)]

    iterations = 0
    converged = False
    for _ in range(max_iter):
        iterations += 1
        new_medoids = update_medoids(D, assignments)
        history.append(objective_value(D, new_medoids, assignments))
        new_medoids, new_assignments = _assign_with_repair(D, new_medoids)
        history.append(objective_value(D, new_medoids, new_assignments))
        if np.array_equal(new_assignments, assignments) and np.array_equal(
            new_medoids, medoids
        ):
            converged = True
            medoids, assignments = new_medoids, new_assignments
            break
        medoids, assignments = new_medoids, new_assignments

    return ClusteringResult(
        medoids=tuple(int(m) for m in medoids),
        assignments=assignments,
        objective=objective_value(D, medoids, assignments),
        iterations=iterations,
        seed=seed,
        hit_iteration_cap=not converged,
        history=tuple(history),
    )


def kmedoids_restarts(
    D: DistanceMatrix, k: int, n_restarts: int, seed: int, threads: int = 1
) -> ClusteringResult:
    """Best of ``n_restarts`` runs with seeds seed, seed+1, ...; ties keep the
    earliest restart. The reduction is deterministic regardless of threads."""
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    seeds = [seed + r for r in range(n_restarts)]
    if threads <= 1:
        results = [kmedoids(D, k, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: kmedoids(D, k, s), seeds))
    best_index = min(range(n_restarts), key=lambda r: (results[r].objective, r))
    return dataclasses.replace(
        results[best_index],
        restart_objectives=tuple(res.objective for res in results),
        restart_cap_hits=sum(res.hit_iteration_cap for res in results),
    )
