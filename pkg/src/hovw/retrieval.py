"""Label-bucketed retrieval index and ranked queries.

Entries are grouped by hierarchy-codebook label. A query visits buckets in
order of medoid distance from its own label and ranks each bucket's entries by
tree edit distance, taking whole buckets until enough results are gathered.
Equal edit distances are ordered by the distance between whole-image Zernike
vectors and then by image id.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyIndexError, HovwError, InvalidInputError, InvalidParameterError
from .hierarchy_codebook import assign_label, label_neighborhood
from .pipeline import analyze_image, encode
from .tree_edit import distance_prepared, prepare


@dataclass
class IndexEntry:
    image_id: str
    hierarchy: object
    label: int
    zm: np.ndarray


@dataclass
class RetrievalIndex:
    entries: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    @property
    def buckets(self):
        out = {}
        for i, e in enumerate(self.entries):
            out.setdefault(e.label, []).append(i)
        return out


@dataclass
class ResultItem:
    image_id: str
    dissimilarity: float
    label: int
    bucket_rank: int
    tie_break: float = 0.0


@dataclass
class RankedResult:
    items: list
    query_label: int | None = None
    buckets: list = field(default_factory=list)  # labels visited, in order

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def image_ids(self):
        return [it.image_id for it in self.items]


def index_analyses(model, analyses, failures=None):
    entries = []
    for a in analyses:
        h = encode(a, model.visual_words)
        lab = assign_label(h, model.hierarchies, model.costs)
        entries.append(IndexEntry(a.image_id, h, lab, np.asarray(a.zm_global, dtype=np.float64)))
    return RetrievalIndex(entries, dict(failures or {}))


def build_index(dataset, model):
    """Encode and label every image of ``dataset``; failing images are recorded and skipped."""
    analyses, failures = [], {}
    for item in dataset.items:
        try:
            analyses.append(analyze_image(item.load(), item.image_id, model.preprocess, model.min_area))
        except (HovwError, OSError) as exc:
            failures[item.image_id] = str(exc)
    if dataset.items and not analyses:
        raise EmptyIndexError(f"all {len(dataset.items)} images failed to process")
    return index_analyses(model, analyses, failures)


def _zm_distance(a, b):
    d = np.asarray(a) - np.asarray(b)
    return float(np.sqrt((d * d).sum()))


def query_analysis(index, model, analysis, n, max_buckets=None):
    """Ranked results for an already analysed query image."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not index.entries:
        raise EmptyIndexError("index is empty")
    h = encode(analysis, model.visual_words)
    costs = model.costs
    label = assign_label(h, model.hierarchies, costs)
    buckets = index.buckets
    qp = prepare(h, costs)
    items, visited = [], []
    for lab in label_neighborhood(label, model.hierarchies):
        if len(items) >= n or (max_buckets is not None and len(visited) >= max_buckets):
            break
        members = buckets.get(lab)
        if not members:
            continue
        block = []
        for i in members:
            e = index.entries[i]
            d = distance_prepared(qp, prepare(e.hierarchy, costs), costs)
            block.append(ResultItem(e.image_id, d, e.label, len(visited),
                                    _zm_distance(analysis.zm_global, e.zm)))
        block.sort(key=lambda r: (r.dissimilarity, r.tie_break, r.image_id))
        items.extend(block)
        visited.append(lab)
    return RankedResult(items, label, visited)


def query(index, model, image, n, max_buckets=None, image_id="query"):
    """Encode ``image`` with the model's settings and query the index."""
    try:
        analysis = analyze_image(image, image_id, model.preprocess, model.min_area)
    except HovwError as exc:
        raise InvalidInputError(f"cannot process query image: {exc}") from exc
    return query_analysis(index, model, analysis, n, max_buckets)


def query_baseline_zm_analysis(index, analysis, n):
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not index.entries:
        raise EmptyIndexError("index is empty")
    items = [ResultItem(e.image_id, _zm_distance(analysis.zm_global, e.zm), e.label, 0)
             for e in index.entries]
    items.sort(key=lambda r: (r.dissimilarity, r.image_id))
    return RankedResult(items[:n])


def query_baseline_zm(index, model, image, n, image_id="query"):
    """Rank all entries by distance between whole-image Zernike vectors."""
    try:
        analysis = analyze_image(image, image_id, model.preprocess, model.min_area)
    except HovwError as exc:
        raise InvalidInputError(f"cannot process query image: {exc}") from exc
    return query_baseline_zm_analysis(index, analysis, n)
