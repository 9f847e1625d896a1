"""Partition agreement metrics: adjusted Rand index and pairwise F-measure."""

import numpy as np


def _contingency(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"label vectors differ in length: {a.shape} vs {b.shape}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    na = ai.max() + 1
    nb = bi.max() + 1
    table = np.zeros((na, nb), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1.0) / 2.0


def adjusted_rand_index(a, b):
    """Chance-adjusted pair-counting agreement; 1 iff the partitions are
    identical up to relabeling."""
    table = _contingency(a, b)
    n = table.sum()
    if n < 2:
        raise ValueError("need at least 2 points")
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / _comb2(n)
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        # Both partitions degenerate the same way (all singletons or one
        # cluster): agreement is exact.
        return 1.0
    return float((index - expected) / (maximum - expected))


def pairwise_f_measure(pred, truth):
    """F-measure of same-cluster point pairs, predicted against reference.

    Precision counts predicted same-cluster pairs that the reference also
    groups together, recall the converse; empty pair sets contribute 0 (the
    0/0 convention), so an all-singleton reference scores 0 unless the
    prediction is also all singletons.
    """
    table = _contingency(pred, truth)
    tp = _comb2(table).sum()
    pred_pairs = _comb2(table.sum(axis=1)).sum()
    truth_pairs = _comb2(table.sum(axis=0)).sum()
    if pred_pairs == 0 and truth_pairs == 0:
        return 1.0
    precision = tp / pred_pairs if pred_pairs else 0.0
    recall = tp / truth_pairs if truth_pairs else 0.0
    if precision + recall == 0:
        return 0.0
    return float(2.0 * precision * recall / (precision + recall))
