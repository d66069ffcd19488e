"""Retrieval metrics over ranked relevance lists."""

import math

import numpy as np

from .errors import InvalidInputError

GRID_STEPS = 20
RECALL_GRID = tuple(j / GRID_STEPS for j in range(1, GRID_STEPS + 1))


def precision_recall_curve(relevant, n_relevant, steps=GRID_STEPS):
    """Precision at recall levels 1/steps, 2/steps, ..., 1.

    ``relevant`` flags the ranked list. The precision for level r is taken at
    the first position where recall reaches r; levels never reached get 0.
    """
    if n_relevant <= 0:
        raise InvalidInputError("query class has no relevant items in the index")
    out = np.zeros(steps)
    level = 1
    hits = 0
    for pos, rel in enumerate(relevant, start=1):
        if rel:
            hits += 1
            # recall >= level/steps, compared in integers
            while level <= steps and hits * steps >= level * n_relevant:
                out[level - 1] = hits / pos
                level += 1
        if level > steps:
            break
    return out


def average_precision(relevant):
    """Mean of the precision values at each relevant item of the ranked list."""
    precisions = []
    hits = 0
    for pos, rel in enumerate(relevant, start=1):
        if rel:
            hits += 1
            precisions.append(hits / pos)
    return math.fsum(precisions) / len(precisions) if precisions else 0.0


def mean_average_precision(relevance_lists):
    lists = list(relevance_lists)
    if not lists:
        raise InvalidInputError("no queries")
    return math.fsum(average_precision(r) for r in lists) / len(lists)


def f1_score(precision_at_full_recall):
    p = float(precision_at_full_recall)
    return 2 * p / (p + 1) if p > 0 else 0.0


def bucket_precision_recall(relevant, bucket_sizes, n_relevant):
    """Cumulative (precision, recall) after each whole bucket of a ranked list."""
    if n_relevant <= 0:
        raise InvalidInputError("query class has no relevant items in the index")
    out, pos, hits = [], 0, 0
    for size in bucket_sizes:
        hits += sum(1 for r in relevant[pos:pos + size] if r)
        pos += size
        out.append((hits / pos if pos else 0.0, hits / n_relevant))
    return out
