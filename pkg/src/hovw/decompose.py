"""Split binary images into objects and holes and relate them by inclusion.

Objects are 8-connected foreground sets, holes 4-connected background sets.
A one-pixel background frame is added around the image, so the background
component touching it (the root) always exists. Shape coordinates are image
coordinates, so frame pixels sit at -1 and at width/height.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConsistencyError, InvalidParameterError
from .kernels import trace_outer_border

OBJECT = "object"
HOLE = "hole"

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass
class ComponentShape:
    id: int
    kind: str
    area: int
    origin: tuple  # (x, y) of the bounding box corner, image coordinates
    mask: np.ndarray  # own pixels over the bounding box
    filled: np.ndarray  # own pixels plus everything they enclose
    contour: np.ndarray  # (n, 2) int (x, y), counterclockwise as displayed
    parent: int | None = None

    @property
    def filled_area(self):
        return int(self.filled.sum())

    def pixels(self):
        """(n, 2) int array of the shape's own (x, y) pixels."""
        ys, xs = np.nonzero(self.mask)
        return np.column_stack([xs + self.origin[0], ys + self.origin[1]])


@dataclass
class HierarchySkeleton:
    nodes: list
    parent: dict
    root: int
    children: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.children:
            kids = {n: [] for n in self.nodes}
            for child, par in self.parent.items():
                kids[par].append(child)
            self.children = {n: sorted(v) for n, v in kids.items()}

    def depth(self, node):
        d = 1
        while node != self.root:
            node = self.parent[node]
            d += 1
        return d

    def preorder(self):
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(self.children[n]))
        return out


@dataclass
class Decomposition:
    shapes: list
    skeleton: HierarchySkeleton
    labels: np.ndarray  # padded label map, value = shape id + 1
    shape_size: tuple  # (height, width) of the unpadded image

    def shape(self, sid):
        return self.shapes[sid]


def _component_map(padded):
    fg, nf = ndimage.label(padded, structure=_EIGHT)
    bg, nb = ndimage.label(~padded, structure=_FOUR)
    comp = np.where(padded, fg, bg + nf)
    return comp, nf, nb


def _adjacency(comp):
    pairs = []
    for a, b in ((comp[:, :-1], comp[:, 1:]), (comp[:-1, :], comp[1:, :])):
        diff = a != b
        if diff.any():
            pairs.append(np.column_stack([a[diff], b[diff]]))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    edges = np.sort(np.concatenate(pairs), axis=1)
    return np.unique(edges, axis=0)


def extract_component_shapes(img):
    """Decompose a binary image into objects and holes with parent links.

    Works as a worklist: starting from the background region touching the
    frame, every popped shape yields the not-yet-extracted regions of the
    opposite kind bordering it, which are the shapes it directly surrounds.
    Returns a :class:`Decomposition`.
    """
    img = np.asarray(img, dtype=bool)
    padded = np.pad(img, 1, mode="constant", constant_values=False)
    comp, nf, nb = _component_map(padded)
    ncomp = nf + nb

    # raster index of each component's first pixel gives a deterministic order
    flat = comp.ravel()
    first = np.full(ncomp + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size))

    edges = _adjacency(comp)
    if len(edges) != ncomp - 1:
        raise ConsistencyError(
            f"component adjacency is not a tree ({len(edges)} edges, {ncomp} components)")
    neighbours = [[] for _ in range(ncomp + 1)]
    for a, b in edges:
        neighbours[a].append(b)
        neighbours[b].append(a)

    root_comp = int(comp[0, 0])
    order = []  # component ids in extraction order
    parent_comp = {root_comp: None}
    worklist = deque([root_comp])
    while worklist:
        m = worklist.popleft()
        order.append(m)
        inner = sorted((c for c in neighbours[m] if c not in parent_comp), key=lambda c: first[c])
        for c in inner:
            parent_comp[c] = m
            worklist.append(c)
    if len(order) != ncomp:
        raise ConsistencyError("decomposition left components unreachable from the root")

    sid_of = np.zeros(ncomp + 1, dtype=np.int64)
    for sid, c in enumerate(order):
        sid_of[c] = sid
    labels = (sid_of[comp] + 1).astype(np.int64)

    # subtree membership in postorder so filled masks include descendants
    kids = {c: [] for c in order}
    for c in order[1:]:
        kids[parent_comp[c]].append(c)
    subtree = {}
    for c in reversed(order):
        s = [c]
        for k in kids[c]:
            s.extend(subtree[k])
        subtree[c] = s

    slices = ndimage.find_objects(comp)
    shapes = []
    for sid, c in enumerate(order):
        sl = slices[c - 1]
        window = comp[sl]
        mask = window == c
        if len(subtree[c]) == 1:
            filled = mask.copy()
        else:
            filled = np.isin(window, np.asarray(subtree[c]))
        contour = _outer_contour(filled)
        y0, x0 = sl[0].start - 1, sl[1].start - 1
        contour[:, 0] += x0
        contour[:, 1] += y0
        par = parent_comp[c]
        shapes.append(ComponentShape(
            id=sid,
            kind=OBJECT if c <= nf else HOLE,
            area=int(mask.sum()),
            origin=(x0, y0),
            mask=mask,
            filled=filled,
            contour=contour,
            parent=None if par is None else int(sid_of[par]),
        ))
    skeleton = build_hierarchy_skeleton(shapes)
    return Decomposition(shapes=shapes, skeleton=skeleton, labels=labels, shape_size=img.shape)


def _outer_contour(filled):
    """(x, y) outer border of a blob mask, relative to the mask's corner."""
    m = np.pad(filled, 1, mode="constant").astype(np.uint8)
    idx = int(np.argmax(m.ravel()))
    r0, c0 = divmod(idx, m.shape[1])
    rc = trace_outer_border(m, r0, c0)
    return np.column_stack([rc[:, 1] - 1, rc[:, 0] - 1]).astype(np.int64)


def build_hierarchy_skeleton(shapes):
    """Inclusion tree from parent links; the single parentless shape is the root."""
    roots = [s.id for s in shapes if s.parent is None]
    if len(roots) != 1:
        raise ConsistencyError(f"expected exactly one root shape, found {len(roots)}")
    ids = {s.id for s in shapes}
    parent = {}
    for s in shapes:
        if s.parent is not None:
            if s.parent not in ids:
                raise ConsistencyError(f"shape {s.id} has unknown parent {s.parent}")
            parent[s.id] = s.parent
    root = roots[0]
    for s in shapes:
        seen, n = set(), s.id
        while n != root:
            if n in seen:
                raise ConsistencyError("parent links contain a cycle")
            seen.add(n)
            n = parent[n]
    return HierarchySkeleton(nodes=sorted(ids), parent=parent, root=root)


def filter_small_shapes(skeleton, shapes, min_area=9):
    """Drop shapes smaller than ``min_area`` pixels; orphans move up to the nearest kept ancestor."""
    if min_area < 0:
        raise InvalidParameterError("min_area must be >= 0")
    area = {s.id: s.area for s in shapes}
    if area[skeleton.root] < min_area:
        raise InvalidParameterError("min_area would prune the root shape")
    keep = [n for n in skeleton.nodes if n == skeleton.root or area[n] >= min_area]
    kept = set(keep)
    parent = {}
    for n in keep:
        if n == skeleton.root:
            continue
        p = skeleton.parent[n]
        while p not in kept:
            p = skeleton.parent[p]
        parent[n] = p
    return HierarchySkeleton(nodes=keep, parent=parent, root=skeleton.root)


def skeleton_to_text(skeleton, shapes):
    """S-expression rendering, e.g. ``(hole#0 area=120 (object#1 area=40))``."""
    by_id = {s.id: s for s in shapes}

    def render(n):
        s = by_id[n]
        inner = "".join(" " + render(c) for c in skeleton.children[n])
        return f"({s.kind}#{n} area={s.area}{inner})"

    return render(skeleton.root)


def decompose(img, min_area=9):
    """Extract shapes and return ``(decomposition, pruned_skeleton)``."""
    dec = extract_component_shapes(img)
    return dec, filter_small_shapes(dec.skeleton, dec.shapes, min_area)
