"""Compare the compiled and pure-Python kernels on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from hovw import _kernels_py
from hovw.synth import random_shape
from hovw.tree_edit import EditCostModel, VisualHierarchy, prepare
from hovw.visual_words import train_visual_words

try:
    from hovw import _kernels
except ImportError:
    _kernels = None


def random_tree(rng, n, k):
    parent = [-1] + [int(rng.integers(0, i)) for i in range(1, n)]
    # re-number into preorder
    kids = [[] for _ in range(n)]
    for i, p in enumerate(parent[1:], start=1):
        kids[p].append(i)
    order, stack = [], [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids[v]))
    pos = {v: i for i, v in enumerate(order)}
    return VisualHierarchy(tuple(int(rng.integers(0, k)) for _ in order),
                           tuple(-1 if v == 0 else pos[parent[v]] for v in order))


def border_cases(rng, count):
    cases = []
    for _ in range(count):
        img, _ = random_shape(rng, radius=60.0)
        mask = np.pad(img, 1)
        r, c = np.argwhere(mask)[0]
        cases.append((np.ascontiguousarray(mask, dtype=np.uint8), int(r), int(c)))
    return cases


def ted_cases(rng, count, size):
    feats = rng.normal(size=(200, 29))
    model = EditCostModel(train_visual_words(feats, 20, seed=0))
    pairs = []
    for _ in range(count):
        p1 = prepare(random_tree(rng, size, 20), model)
        p2 = prepare(random_tree(rng, size, 20), model)
        pairs.append((p1.lmld, p1.keyroots, p1.cost, p2.lmld, p2.keyroots, p2.cost,
                      np.ascontiguousarray(model.word_distance[np.ix_(p1.words, p2.words)])))
    return pairs


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tree-size", type=int, default=12)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    borders = border_cases(rng, 20)
    teds = ted_cases(rng, 200, args.tree_size)
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels is not None else [])
    if _kernels is None:
        print("compiled extension not built; timing the Python fallback only")

    rows = []
    for name, mod in backends:
        t_border = best_of(lambda: [mod.trace_outer_border(*c) for c in borders], args.repeat)
        t_ted = best_of(lambda: [mod.tree_distance(*p) for p in teds], args.repeat)
        rows.append((name, t_border, t_ted))

    # both backends must agree before their timings mean anything
    if len(backends) == 2:
        for c in borders:
            assert np.array_equal(_kernels_py.trace_outer_border(*c), _kernels.trace_outer_border(*c))
        for p in teds:
            assert abs(_kernels_py.tree_distance(*p) - _kernels.tree_distance(*p)) <= 1e-9

    print(f"{'backend':8s} {'border x20 (ms)':>16s} {'TED x200 (ms)':>14s}")
    for name, tb, tt in rows:
        print(f"{name:8s} {tb * 1e3:16.2f} {tt * 1e3:14.2f}")
    if len(rows) == 2:
        print(f"speed-up: border {rows[0][1] / rows[1][1]:.1f}x, TED {rows[0][2] / rows[1][2]:.1f}x")


if __name__ == "__main__":
    main()
