"""Partition and edge-label comparison scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix


@dataclass(frozen=True)
class PartitionScore:
    rand_index: float
    variation_of_information: float

    def as_dict(self) -> dict:
        return {"rand_index": self.rand_index, "variation_of_information": self.variation_of_information}


def _contingency(p1, p2):
    p1, p2 = np.asarray(p1), np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValueError(f"partition lengths differ ({len(p1)} vs {len(p2)})")
    _, a = np.unique(p1, return_inverse=True)
    _, b = np.unique(p2, return_inverse=True)
    table = coo_matrix((np.ones(len(a)), (a.ravel(), b.ravel()))).tocsr()
    table.sum_duplicates()
    return table, len(p1)


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * (x - 1.0) / 2.0))


def rand_index(p1, p2) -> float:
    """Fraction of node pairs on which both partitions agree."""
    table, n = _contingency(p1, p2)
    if n < 2:
        raise ValueError("rand index needs at least two nodes")
    total = n * (n - 1) / 2.0
    both = _pairs(table.data)
    same1 = _pairs(np.asarray(table.sum(axis=1)).ravel())
    same2 = _pairs(np.asarray(table.sum(axis=0)).ravel())
    # agreeing = together in both + apart in both
    return (total + 2.0 * both - same1 - same2) / total


def variation_of_information(p1, p2) -> float:
    """``H(p1) + H(p2) - 2 I(p1; p2)`` in nats."""
    table, n = _contingency(p1, p2)
    if n == 0:
        return 0.0
    joint = table.data / n
    r = np.asarray(table.sum(axis=1)).ravel() / n
    c = np.asarray(table.sum(axis=0)).ravel() / n
    rows, cols = table.nonzero()
    h1 = -np.sum(r[r > 0] * np.log(r[r > 0]))
    h2 = -np.sum(c[c > 0] * np.log(c[c > 0]))
    mi = np.sum(joint * np.log(joint / (r[rows] * c[cols])))
    return max(0.0, float(h1 + h2 - 2.0 * mi))


def partition_score(p1, p2) -> PartitionScore:
    return PartitionScore(rand_index(p1, p2), variation_of_information(p1, p2))


def edge_prf(predicted, truth) -> tuple[float, float, float]:
    """Precision, recall and F1 of the cut class.

    No predicted cuts gives precision 1; no true cuts gives recall 1.
    """
    predicted, truth = np.asarray(predicted) != 0, np.asarray(truth) != 0
    if predicted.shape != truth.shape:
        raise ValueError("labelings differ in length")
    tp = int(np.count_nonzero(predicted & truth))
    n_pred, n_true = int(predicted.sum()), int(truth.sum())
    precision = tp / n_pred if n_pred else 1.0
    recall = tp / n_true if n_true else 1.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f
