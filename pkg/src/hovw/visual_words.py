"""Visual-word codebook: k-means over standardized shape feature vectors."""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, TrainingError

MAX_ITER = 300
_CHUNK = 256


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension z-scoring; dimensions with zero spread keep scale 1."""
    mean: np.ndarray
    scale: np.ndarray
    enabled: bool = True

    def transform(self, features):
        x = np.asarray(features, dtype=np.float64)
        if not self.enabled:
            return x.copy()
        return (x - self.mean) / self.scale


def fit_standardizer(features, enabled=True):
    x = np.asarray(features, dtype=np.float64)
    if not enabled:
        d = x.shape[1]
        return Standardizer(np.zeros(d), np.ones(d), enabled=False)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    return Standardizer(mean, scale, enabled=True)


def nearest(points, centroids):
    """Index of the nearest centroid for each row, lowest index on ties, plus squared distances."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    centroids = np.asarray(centroids, dtype=np.float64)
    idx = np.empty(len(points), dtype=np.int64)
    best = np.empty(len(points))
    for start in range(0, len(points), _CHUNK):
        block = points[start:start + _CHUNK]
        diff = block[:, None, :] - centroids[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        # argmin returns the first minimum, which is the lowest id
        j = np.argmin(d2, axis=1)
        idx[start:start + len(block)] = j
        best[start:start + len(block)] = d2[np.arange(len(block)), j]
    return idx, best


def _kmeanspp(x, k, rng):
    n = len(x)
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise TrainingError("k-means++ ran out of distinct points")
        pick = int(rng.choice(n, p=d2 / total))
        chosen.append(pick)
        d2 = np.minimum(d2, ((x - x[pick]) ** 2).sum(axis=1))
    return x[chosen].copy()


def kmeans(x, k, seed=0, max_iter=MAX_ITER):
    """Lloyd's algorithm from k-means++ seeds.

    Stops when no assignment changes or after ``max_iter`` rounds. An empty
    cluster takes the point farthest from its current centroid. Returns
    ``(centroids, labels, inertia_trace)``, the trace holding the inertia after
    every assignment step.
    """
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)
    labels, d2 = nearest(x, centroids)
    trace = [float(d2.sum())]
    for _ in range(max_iter):
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
        # reseed empty clusters one at a time from the current worst-fit point
        counts = np.bincount(labels, minlength=k)
        for j in np.nonzero(counts == 0)[0]:
            _, d2 = nearest(x, centroids)
            far = int(np.argmax(d2))
            centroids[j] = x[far]
            labels[far] = j
        new_labels, d2 = nearest(x, centroids)
        trace.append(float(d2.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centroids, labels, trace


def _mean_pairwise(centroids):
    m = len(centroids)
    if m < 2:
        raise InvalidParameterError("mean pairwise word distance needs at least 2 words")
    dists = []
    for i in range(m - 1):
        diff = centroids[i + 1:] - centroids[i]
        dists.append(np.sqrt((diff * diff).sum(axis=1)))
    return math.fsum(np.concatenate(dists)) * 2.0 / (m * (m - 1))


@dataclass
class VisualWordCodebook:
    centroids: np.ndarray  # k x d, standardized space
    standardizer: Standardizer
    seed: int = 0
    inertia_trace: list = field(default_factory=list)
    _mean_distance: float | None = field(default=None, repr=False)

    @property
    def k(self):
        return len(self.centroids)

    @property
    def mean_pairwise_distance(self):
        if self._mean_distance is None:
            self._mean_distance = _mean_pairwise(self.centroids)
        return self._mean_distance

    def fingerprint(self):
        """Short digest of everything that determines word assignment."""
        h = hashlib.sha1()
        for arr in (self.centroids, self.standardizer.mean, self.standardizer.scale):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        h.update(b"1" if self.standardizer.enabled else b"0")
        return h.hexdigest()[:16]

    def word_distances(self):
        """k x k Euclidean distances between centroids (exactly symmetric)."""
        c = self.centroids
        out = np.empty((len(c), len(c)))
        for i in range(len(c)):
            diff = c - c[i]
            out[i] = np.sqrt((diff * diff).sum(axis=1))
        return out

    def assign(self, features):
        """Word ids for raw (unstandardized) feature rows."""
        idx, _ = nearest(self.standardizer.transform(features), self.centroids)
        return idx


def train_visual_words(features, k, seed=0, standardize=True, max_iter=MAX_ITER):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise TrainingError("no shape features to cluster")
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if len(x) < k:
        raise TrainingError(f"k = {k} exceeds the number of shape features ({len(x)})")
    std = fit_standardizer(x, enabled=standardize)
    z = std.transform(x)
    distinct = len(np.unique(z, axis=0))
    if distinct < k:
        raise TrainingError(f"k = {k} exceeds the number of distinct feature vectors ({distinct})")
    centroids, _, trace = kmeans(z, k, seed=seed, max_iter=max_iter)
    return VisualWordCodebook(centroids=centroids, standardizer=std, seed=seed, inertia_trace=trace)


def assign_word(f, codebook):
    """Nearest word for one standardized feature vector; ties go to the lowest id."""
    idx, _ = nearest(np.asarray(f, dtype=np.float64)[None, :], codebook.centroids)
    return int(idx[0])


def mean_pairwise_word_distance(codebook):
    return codebook.mean_pairwise_distance
