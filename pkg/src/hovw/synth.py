"""Synthetic logo corpus: class prototypes composed of primitive shapes.

A prototype is a small tree of filled outlines (objects) and cut-outs (holes).
Instances re-render it with independent jitter per element, global rotation,
scale and translation, plus mild radial noise on every outline, so that each
class keeps its topology while pixel layouts differ.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Item
from .errors import InvalidParameterError

OUTLINES = ("disk", "ellipse", "ngon", "star", "blob", "rect")


def fill_polygon(canvas, poly, value=True):
    """Set pixels whose centres lie inside ``poly`` ((n, 2) float x, y), even-odd rule."""
    h, w = canvas.shape
    x0 = max(int(math.floor(poly[:, 0].min())), 0)
    x1 = min(int(math.ceil(poly[:, 0].max())), w - 1)
    y0 = max(int(math.floor(poly[:, 1].min())), 0)
    y1 = min(int(math.ceil(poly[:, 1].max())), h - 1)
    if x1 < x0 or y1 < y0:
        return canvas
    yy, xx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    px = xx.astype(np.float64)
    py = yy.astype(np.float64)
    inside = np.zeros(px.shape, dtype=bool)
    xa, ya = poly[:, 0], poly[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    for ax, ay, bx, by in zip(xa, ya, xb, yb):
        if ay == by:
            continue
        cond = (ay > py) != (by > py)
        xcross = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= cond & (px < xcross)
    canvas[y0:y1 + 1, x0:x1 + 1][inside] = value
    return canvas


def outline(kind, params, n=96):
    """Closed unit-size outline centred at the origin, (n, 2)."""
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    if kind == "disk":
        r = np.ones_like(t)
    elif kind == "ellipse":
        a, b = 1.0, params.get("aspect", 0.6)
        return np.column_stack([a * np.cos(t), b * np.sin(t)])
    elif kind == "rect":
        asp = params.get("aspect", 0.6)
        q = n // 4
        s = np.linspace(-1, 1, q, endpoint=False)
        pts = np.concatenate([
            np.column_stack([s, -asp * np.ones(q)]),
            np.column_stack([np.ones(q), asp * s]),
            np.column_stack([-s, asp * np.ones(q)]),
            np.column_stack([-np.ones(q), -asp * s]),
        ])
        return pts
    elif kind == "ngon":
        k = params.get("sides", 5)
        # polygon radius as a function of angle
        seg = 2 * math.pi / k
        r = math.cos(seg / 2) / np.cos((t % seg) - seg / 2)
    elif kind == "star":
        k = params.get("points", 5)
        inner = params.get("inner", 0.55)
        phase = (t * k / (2 * math.pi)) % 1.0
        tri = np.abs(2 * phase - 1)
        r = inner + (1 - inner) * tri
    elif kind == "blob":
        r = np.ones_like(t)
        for k, (amp, ph) in enumerate(params.get("harmonics", ()), start=2):
            r = r + amp * np.cos(k * t + ph)
    else:
        raise InvalidParameterError(f"unknown outline {kind!r}")
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def random_outline_params(rng, kind=None):
    kind = kind or OUTLINES[rng.integers(len(OUTLINES))]
    if kind == "ellipse":
        params = {"aspect": float(rng.uniform(0.35, 0.75))}
    elif kind == "rect":
        params = {"aspect": float(rng.uniform(0.3, 0.8))}
    elif kind == "ngon":
        params = {"sides": int(rng.integers(3, 8))}
    elif kind == "star":
        params = {"points": int(rng.integers(4, 8)), "inner": float(rng.uniform(0.45, 0.65))}
    elif kind == "blob":
        nh = int(rng.integers(1, 4))
        params = {"harmonics": [(float(rng.uniform(0.05, 0.18)), float(rng.uniform(0, 2 * math.pi)))
                                for _ in range(nh)]}
    else:
        params = {}
    return kind, params


@dataclass
class Element:
    """One outline in prototype units; ``children`` sit inside it with opposite polarity."""
    kind: str
    params: dict
    center: tuple
    radius: float
    angle: float
    children: list = field(default_factory=list)


def _inner_radius(kind, params):
    pts = outline(kind, params, n=256)
    return float(np.sqrt((pts ** 2).sum(axis=1)).min())


def _place_children(rng, n, container_radius, child_scale):
    """Non-overlapping slots for ``n`` children inside a disk of ``container_radius``."""
    if n == 0:
        return []
    if n == 1:
        return [((0.0, 0.0), container_radius * child_scale)]
    r_child = container_radius * min(child_scale, 0.75 / (1 + 1 / math.sin(math.pi / n)))
    ring = container_radius * 0.88 - r_child * 1.25
    phase = rng.uniform(0, 2 * math.pi)
    return [((ring * math.cos(phase + 2 * math.pi * i / n), ring * math.sin(phase + 2 * math.pi * i / n)),
             r_child) for i in range(n)]


def _smallest_radius(proto):
    out = math.inf
    for el in proto:
        out = min(out, el.radius * _inner_radius(el.kind, el.params), _smallest_radius(el.children))
    return out


def random_prototype(rng, min_fraction=0.07):
    """A random class prototype: 1-3 top-level objects with optional nested holes.

    Prototypes whose smallest element would be under ``min_fraction`` of the
    layout extent are redrawn, so median filtering cannot erase them.
    """
    while True:
        proto = _draw_prototype(rng)
        extent = max(math.hypot(*el.center) + el.radius * 1.1 for el in proto)
        if _smallest_radius(proto) >= min_fraction * extent:
            return proto


def _draw_prototype(rng):
    n_top = int(rng.choice([1, 1, 2, 3]))
    if n_top == 1:
        slots = [((0.0, 0.0), 1.0)]
    else:
        slots = [((1.15 * math.cos(2 * math.pi * i / n_top + 0.3), 1.15 * math.sin(2 * math.pi * i / n_top + 0.3)),
                  0.62 if n_top == 2 else 0.5) for i in range(n_top)]
    top = []
    for center, radius in slots:
        kind, params = random_outline_params(rng, kind=rng.choice(["disk", "ngon", "blob", "rect", "ellipse", "disk"]))
        if kind == "ngon":
            params["sides"] = max(params["sides"], 5)
        el = Element(kind, params, center, radius, float(rng.uniform(0, 2 * math.pi)))
        n_holes = int(rng.choice([0, 1, 1, 2, 3]))
        inner = radius * _inner_radius(kind, params)
        if inner < 0.5 * radius:
            n_holes = min(n_holes, 1)
        for hc, hr in _place_children(rng, n_holes, inner, 0.5 if n_holes == 1 else 0.45):
            hk, hp = random_outline_params(rng, kind=rng.choice(["disk", "ngon", "star", "rect", "blob"]))
            # slot is a disk of radius hr: scale the outline to fit inside it
            fit = hr / float(np.sqrt((outline(hk, hp) ** 2).sum(axis=1)).max())
            hole = Element(hk, hp, (center[0] + hc[0], center[1] + hc[1]), fit * 0.95, float(rng.uniform(0, 2 * math.pi)))
            if rng.random() < 0.4 and hk != "star":
                ik, ip = random_outline_params(rng, kind=rng.choice(["disk", "ngon", "blob"]))
                room = hole.radius * _inner_radius(hk, hp)
                hole.children.append(Element(ik, ip, hole.center, room * 0.5, float(rng.uniform(0, 2 * math.pi))))
            el.children.append(hole)
        top.append(el)
    return top


def _signature(elements):
    return tuple(sorted((el.kind, el.params.get("sides", 0), _signature(el.children)) for el in elements))


@dataclass(frozen=True)
class Variation:
    """Per-element instance variation: position sd (prototype units), relative size sd,
    angle sd (radians) and relative radial boundary noise."""
    position: float = 0.03
    scale: float = 0.03
    angle: float = 0.12
    noise: float = 0.01


RIGID = Variation(0.0, 0.0, 0.0, 0.0)


def _render_element(canvas, el, value, to_px, var, rng):
    dx, dy = rng.normal(0, var.position, size=2) if var.position else (0.0, 0.0)
    scale = el.radius * (1 + (rng.normal(0, var.scale) if var.scale else 0.0))
    ang = el.angle + (rng.normal(0, var.angle) if var.angle else 0.0)
    noise = var.noise
    pts = outline(el.kind, el.params)
    if noise:
        pts = pts * (1 + rng.normal(0, noise, size=(len(pts), 1)))
    c, s = math.cos(ang), math.sin(ang)
    pts = pts @ np.array([[c, s], [-s, c]]) * scale
    pts = pts + np.array([el.center[0] + dx, el.center[1] + dy])
    fill_polygon(canvas, to_px(pts), value)
    for child in el.children:
        _render_element(canvas, child, not value, to_px, var, rng)


def render_prototype(proto, size=128, rotation=0.0, scale=1.0, shift=(0.0, 0.0), rng=None,
                     variation=RIGID):
    """Rasterize a prototype to a ``size`` x ``size`` bool image."""
    rng = rng if rng is not None else np.random.default_rng(0)
    extent = max(math.hypot(*el.center) + el.radius * 1.1 for el in proto)
    px_per_unit = 0.42 * size * scale / extent
    c, s = math.cos(rotation), math.sin(rotation)
    rot = np.array([[c, s], [-s, c]])
    mid = (size - 1) / 2.0

    def to_px(pts):
        return pts @ rot * px_per_unit + np.array([mid + shift[0], mid + shift[1]])

    canvas = np.zeros((size, size), dtype=bool)
    for el in proto:
        _render_element(canvas, el, True, to_px, variation, rng)
    return canvas


def render_shape(kind, params, angle, radius):
    """Rasterize one outline of the given radius (pixels), centred in a square canvas."""
    pts = outline(kind, params, n=128)
    c, s = math.cos(angle), math.sin(angle)
    pts = pts @ np.array([[c, s], [-s, c]]) * radius
    size = int(math.ceil(2.6 * radius)) + 8
    pts = pts + (size - 1) / 2.0
    return fill_polygon(np.zeros((size, size), dtype=bool), pts, True)


def random_shape(rng, radius=40.0):
    """A single random hole-free outline; returns ``(image, (kind, params, angle))``."""
    kind, params = random_outline_params(rng)
    angle = float(rng.uniform(0, 2 * math.pi))
    return render_shape(kind, params, angle, radius), (kind, params, angle)


def generate_synthetic_corpus(classes, per_class, seed=0, size=128, variation=Variation()):
    """Labelled corpus of ``classes`` x ``per_class`` binary images (uint8 0/255).

    Returns a :class:`~hovw.dataset.Dataset`; prototypes are stored on the
    dataset as ``prototypes`` for callers that want ground-truth structure.
    """
    if classes < 2 or per_class < 2:
        raise InvalidParameterError("need at least 2 classes and 2 instances per class")
    rng = np.random.default_rng(seed)
    prototypes, seen = [], set()
    while len(prototypes) < classes:
        proto = random_prototype(rng)
        sig = _signature(proto)
        if sig in seen:
            continue
        seen.add(sig)
        prototypes.append(proto)
    items = []
    for ci, proto in enumerate(prototypes):
        for j in range(per_class):
            img = render_prototype(
                proto, size=size,
                rotation=float(rng.uniform(0, 2 * math.pi)),
                scale=float(rng.uniform(0.85, 1.05)),
                shift=tuple(rng.uniform(-4, 4, size=2)),
                rng=rng, variation=variation)
            items.append(Item(image_id=f"class{ci:02d}-{j + 1}", label=ci,
                              array=img.astype(np.uint8) * 255))
    ds = Dataset(f"synthetic-{classes}x{per_class}-s{seed}", items,
                 [f"class{ci:02d}" for ci in range(classes)])
    ds.prototypes = prototypes
    return ds
