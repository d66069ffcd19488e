"""Hierarchy codebook: medoid-shift clustering of the pairwise TED matrix."""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIndexError, InvalidInputError, InvalidParameterError
from .tree_edit import distance_prepared, prepare

BANDWIDTH_GRID_LOW = (0.1, 0.3, 0.5, 0.7, 0.9)
BANDWIDTH_GRID_HIGH = (1.1, 1.3, 1.5, 1.7, 1.9)


def pairwise_dissimilarity(hierarchies, model):
    """Symmetric TED matrix; each unordered pair is evaluated once."""
    prepared = [prepare(h, model) for h in hierarchies]
    n = len(prepared)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = distance_prepared(prepared[i], prepared[j], model)
            out[i, j] = out[j, i] = d
    return out


def medoid_shift(dist, bandwidth):
    """Mode seeking restricted to data points.

    Point ``y`` moves to the point ``x_i`` minimizing
    ``sum_j exp(-d(y, x_j)^2 / h^2) * d(x_i, x_j)^2``; trajectories are
    followed to a fixed point. A trajectory that cycles (possible only under
    exact ties) settles on the smallest index in the cycle. Returns the mode
    index of every point.
    """
    d = np.asarray(dist, dtype=np.float64)
    if not bandwidth > 0:
        raise InvalidParameterError("bandwidth must be positive")
    n = len(d)
    d2 = d * d
    weights = np.exp(-d2 / (bandwidth * bandwidth))
    # score[y, i] = sum_j w[y, j] * d2[i, j]; argmin takes the lowest index on ties
    step = np.argmin(weights @ d2, axis=1)
    modes = np.empty(n, dtype=np.int64)
    for start in range(n):
        path, seen = [start], {start}
        y = start
        for _ in range(n):
            nxt = int(step[y])
            if nxt == y:
                break
            if nxt in seen:
                cycle = path[path.index(nxt):]
                y = min(cycle)
                break
            path.append(nxt)
            seen.add(nxt)
            y = nxt
        modes[start] = y
    return modes


@dataclass
class HierarchyCodebook:
    bandwidth: float
    labels: np.ndarray  # label of every training hierarchy
    medoids: list  # training index of each label's medoid
    medoid_hierarchies: list
    label_distance: np.ndarray  # TED between medoids
    modes: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_labels(self):
        return len(self.medoids)


def _cluster_medoid(d2, members):
    sub = d2[np.ix_(members, members)].sum(axis=1)
    return int(members[int(np.argmin(sub))])


def mean_shift_cluster(dist, bandwidth, hierarchies=None):
    """Cluster a dissimilarity matrix; labels are numbered by first member index.

    A label's medoid is the member with the least summed squared distance to
    the other members (ties to the lowest index).
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or len(d) == 0:
        raise InvalidInputError("dissimilarity matrix must be square and non-empty")
    modes = medoid_shift(d, bandwidth)
    label_of_mode = {}
    labels = np.empty(len(d), dtype=np.int64)
    for i, m in enumerate(modes):
        labels[i] = label_of_mode.setdefault(int(m), len(label_of_mode))
    d2 = d * d
    medoids = [_cluster_medoid(d2, np.nonzero(labels == lab)[0]) for lab in range(len(label_of_mode))]
    label_distance = d[np.ix_(medoids, medoids)].copy()
    med_h = [hierarchies[m] for m in medoids] if hierarchies is not None else []
    return HierarchyCodebook(float(bandwidth), labels, medoids, med_h, label_distance, modes)


def medoid_distances(h, theta, model):
    if theta.n_labels == 0:
        raise EmptyIndexError("hierarchy codebook has no labels")
    p = prepare(h, model)
    return np.array([distance_prepared(p, prepare(m, model), model) for m in theta.medoid_hierarchies])


def assign_label(h, theta, model):
    """Label of the nearest medoid by TED; ties to the lowest label."""
    return int(np.argmin(medoid_distances(h, theta, model)))


def label_neighborhood(label, theta):
    """All labels by increasing medoid distance from ``label``, itself first."""
    if not 0 <= label < theta.n_labels:
        raise InvalidInputError(f"unknown label {label}")
    row = theta.label_distance[label]
    rest = sorted((lab for lab in range(theta.n_labels) if lab != label), key=lambda lab: (row[lab], lab))
    return [label] + rest
