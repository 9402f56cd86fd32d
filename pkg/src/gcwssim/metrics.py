"""Categorization quality criteria for a learned clustering vs. true labels.

Three measures: the error rate (points whose cluster's majority true
category is not their own), the rate of true association (same-category
pairs kept together) and the rate of false association (cross-category
pairs lumped together). All are percentages; lower is better for the
first and last, higher for the middle one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalReport:
    r_e: float
    r_t: float
    r_f: float
    n: int
    k_learned: int
    k_true: int
    label_map: dict


def _contingency(assignments, truth):
    assignments = np.asarray(assignments)
    truth = np.asarray(truth)
    if assignments.shape != truth.shape or assignments.ndim != 1:
        raise ValueError(
            f"assignments and truth must be equal-length vectors, "
            f"got {assignments.shape} and {truth.shape}"
        )
    if assignments.size == 0:
        raise ValueError("empty labelings")
    learned_ids, learned_idx = np.unique(assignments, return_inverse=True)
    true_ids, true_idx = np.unique(truth, return_inverse=True)
    table = np.zeros((len(learned_ids), len(true_ids)), dtype=np.int64)
    np.add.at(table, (learned_idx, true_idx), 1)
    return table, learned_ids, true_ids


def error_rate(assignments, truth) -> float:
    """Percentage of points outside their cluster's majority true category.

    Each learned cluster is labeled with the true category holding most of
    its members (ties to the smaller category id).
    """
    table, _, _ = _contingency(assignments, truth)
    correct = int(table.max(axis=1).sum())
    n = int(table.sum())
    return 100.0 * (n - correct) / n


def true_association_rate(assignments, truth) -> float:
    """Percentage of same-true-category pairs placed in the same cluster."""
    table, _, _ = _contingency(assignments, truth)
    same_and_together = int((table * (table - 1) // 2).sum())
    per_category = table.sum(axis=0)
    same_total = int((per_category * (per_category - 1) // 2).sum())
    if same_total == 0:
        raise ValueError("no pair of points shares a true category")
    return 100.0 * same_and_together / same_total


def false_association_rate(assignments, truth) -> float:
    """Percentage of cross-true-category pairs placed in the same cluster."""
    table, _, _ = _contingency(assignments, truth)
    n = int(table.sum())
    all_pairs = n * (n - 1) // 2
    per_category = table.sum(axis=0)
    same_total = int((per_category * (per_category - 1) // 2).sum())
    cross_total = all_pairs - same_total
    if cross_total == 0:
        raise ValueError("no pair of points crosses true categories")
    per_cluster = table.sum(axis=1)
    together = int((per_cluster * (per_cluster - 1) // 2).sum())
    same_and_together = int((table * (table - 1) // 2).sum())
    return 100.0 * (together - same_and_together) / cross_total


def evaluate(assignments, truth) -> EvalReport:
    """All three criteria plus the learned-cluster -> majority-category map."""
    table, learned_ids, true_ids = _contingency(assignments, truth)
    label_map = {
        learned_ids[j].item(): true_ids[int(np.argmax(table[j]))].item()
        for j in range(len(learned_ids))
    }
    return EvalReport(
        r_e=error_rate(assignments, truth),
        r_t=true_association_rate(assignments, truth),
        r_f=false_association_rate(assignments, truth),
        n=int(table.sum()),
        k_learned=len(learned_ids),
        k_true=len(true_ids),
        label_map=label_map,
    )
