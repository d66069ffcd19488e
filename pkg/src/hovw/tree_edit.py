"""Visual hierarchies (trees of word ids) and their tree edit distance.

Costs follow the codebook: renaming a node costs the Euclidean distance
between the two words' centroids; inserting or deleting node ``n`` costs
``alpha(n) * mu`` where ``mu`` is the mean pairwise centroid distance and
``alpha = min(1/log2(max(L, 2)), 1/log2(max(D, 2)))`` with ``D`` the node's
depth (root = 1) and ``L`` the number of nodes at that depth.
"""

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import InvalidInputError, InvalidParameterError


@dataclass(frozen=True)
class VisualHierarchy:
    """Rooted ordered tree stored in preorder: ``words[i]`` and ``parent[i]`` (-1 for the root)."""
    words: tuple
    parent: tuple
    image_id: str | None = None
    codebook_id: str | None = None

    def __post_init__(self):
        if len(self.words) != len(self.parent):
            raise InvalidInputError("words and parent lengths differ")
        for i, p in enumerate(self.parent):
            if (i == 0) != (p == -1) or p >= i:
                raise InvalidInputError("parent links must describe a preorder tree rooted at 0")

    def __len__(self):
        return len(self.words)

    @cached_property
    def children(self):
        kids = [[] for _ in self.words]
        for i, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(i)
        return kids

    @cached_property
    def depths(self):
        d = [1] * len(self.words)
        for i, p in enumerate(self.parent):
            if p >= 0:
                d[i] = d[p] + 1
        return d

    @cached_property
    def level_widths(self):
        counts = {}
        for d in self.depths:
            counts[d] = counts.get(d, 0) + 1
        return [counts[d] for d in self.depths]

    def to_nested(self, node=0):
        return (self.words[node], [self.to_nested(c) for c in self.children[node]])

    def to_bracket(self):
        return _bracket(self.to_nested()) if self.words else "{}"

    def with_ids(self, image_id=None, codebook_id=None):
        return VisualHierarchy(self.words, self.parent,
                               image_id if image_id is not None else self.image_id,
                               codebook_id if codebook_id is not None else self.codebook_id)


def _bracket(nested):
    word, kids = nested
    return "{" + str(word) + "".join(_bracket(k) for k in kids) + "}"


def from_nested(nested, image_id=None, codebook_id=None):
    """Build from ``(word, [child, ...])`` tuples, keeping the given child order."""
    words, parent = [], []
    stack = [(nested, -1)]
    while stack:
        (word, kids), par = stack.pop()
        idx = len(words)
        words.append(int(word))
        parent.append(par)
        for k in reversed(kids):
            stack.append((k, idx))
    return VisualHierarchy(tuple(words), tuple(parent), image_id, codebook_id)


_TOKEN = re.compile(r"\s*(\{|\}|-?\d+)")


def parse_bracket(text, image_id=None, codebook_id=None):
    """Inverse of :meth:`VisualHierarchy.to_bracket`, e.g. ``{3{1}{4{1}}}``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InvalidInputError(f"bad bracket text at offset {pos}: {text!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def parse(i):
        if i + 1 >= len(tokens) or tokens[i] != "{" or tokens[i + 1] in "{}":
            raise InvalidInputError(f"malformed bracket text: {text!r}")
        word = int(tokens[i + 1])
        i += 2
        kids = []
        while i < len(tokens) and tokens[i] == "{":
            kid, i = parse(i)
            kids.append(kid)
        if i >= len(tokens) or tokens[i] != "}":
            raise InvalidInputError(f"unbalanced bracket text: {text!r}")
        return (word, kids), i + 1

    nested, end = parse(0)
    if end != len(tokens):
        raise InvalidInputError(f"trailing tokens in bracket text: {text!r}")
    return from_nested(nested, image_id, codebook_id)


def _canonical_nested(nested):
    word, kids = nested
    canon = [_canonical_nested(k) for k in kids]
    # word, size, preorder words, then the full bracket string as a total order
    canon.sort(key=lambda t: (t[0][0], t[1], t[2], t[3]))
    size = 1 + sum(c[1] for c in canon)
    seq = (word,) + tuple(w for c in canon for w in c[2])
    node = (word, [c[0] for c in canon])
    return node, size, seq, _bracket(node)


def canonicalize(h):
    """Sort siblings by (word id, subtree size, subtree preorder words), recursively.

    Ties left after these keys are broken by the bracket text, which only
    coincides for identical subtrees, so the result does not depend on the
    input sibling order.
    """
    if not h.words:
        return h
    node = _canonical_nested(h.to_nested())[0]
    return from_nested(node, h.image_id, h.codebook_id)


def alpha(depth, level_width):
    return min(1.0 / math.log2(max(level_width, 2)), 1.0 / math.log2(max(depth, 2)))


class EditCostModel:
    """Rename and insert/delete costs derived from a visual-word codebook."""

    def __init__(self, codebook):
        self.codebook = codebook
        self.mu = float(codebook.mean_pairwise_distance)
        if not self.mu > 0:
            raise InvalidParameterError("mean pairwise word distance must be positive")
        self.word_distance = codebook.word_distances()
        self.codebook_id = codebook.fingerprint()

    @property
    def k(self):
        return len(self.word_distance)

    def _check_word(self, w):
        if not 0 <= w < self.k:
            raise InvalidInputError(f"unknown visual word {w}")

    def rename_cost(self, a, b):
        self._check_word(a)
        self._check_word(b)
        return float(self.word_distance[a, b])

    def insert_delete_cost(self, depth, level_width):
        return alpha(depth, level_width) * self.mu

    def node_costs(self, h):
        return np.array([self.insert_delete_cost(d, w) for d, w in zip(h.depths, h.level_widths)])


@dataclass
class _Postorder:
    words: np.ndarray
    lmld: np.ndarray
    keyroots: np.ndarray
    cost: np.ndarray


def prepare(h, model):
    """Postorder arrays the edit distance kernel consumes."""
    if h.codebook_id is not None and h.codebook_id != model.codebook_id:
        raise InvalidInputError("hierarchy was encoded with a different codebook")
    n = len(h)
    for w in h.words:
        model._check_word(w)
    cost_pre = model.node_costs(h) if n else np.zeros(0)
    order = []
    stack = [(0, False)] if n else []
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        stack.append((node, True))
        for c in reversed(h.children[node]):
            stack.append((c, False))
    post_of = {node: i for i, node in enumerate(order)}
    lmld = np.empty(n, dtype=np.int64)
    for i, node in enumerate(order):
        kids = h.children[node]
        lmld[i] = i if not kids else lmld[post_of[kids[0]]]
    last = {}
    for i in range(n):
        last[int(lmld[i])] = i
    keyroots = np.array(sorted(last.values()), dtype=np.int64)
    words = np.array([h.words[node] for node in order], dtype=np.int64)
    return _Postorder(words, lmld, keyroots, cost_pre[order] if n else cost_pre)


def distance_prepared(p1, p2, model):
    rename = model.word_distance[np.ix_(p1.words, p2.words)]
    return kernels.tree_distance(p1.lmld, p1.keyroots, p1.cost, p2.lmld, p2.keyroots, p2.cost, rename)


def tree_edit_distance(h1, h2, model):
    """Exact ordered tree edit distance (Zhang-Shasha) under the codebook costs."""
    return distance_prepared(prepare(h1, model), prepare(h2, model), model)
