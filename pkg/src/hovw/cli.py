"""Command line interface: ``hovw <subcommand> ...``."""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, parse_bool
from .dataset import load_dataset
from .decompose import decompose, skeleton_to_text
from .descriptors import FEATURE_NAMES, describe_shape
from .errors import HovwError, ModelFormatError
from .experiment import HOVW, interior_maximum, run_experiment, write_reports, write_sweep
from .imageio import label_image, read_image, write_image
from .model_io import load_model, save_model
from .pipeline import DEFAULT_MIN_AREA, train_model
from .preprocess import binarize_pipeline
from .retrieval import build_index, query, query_baseline_zm
from .synth import Variation, generate_synthetic_corpus

log = logging.getLogger("hovw")

# exit codes
EXIT_ERROR = 1
EXIT_MODEL_FORMAT = 10  # plus the error's own code


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _add_config(p):
    g = p.add_argument_group("preprocessing (override the --config file)")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--median-window", dest="median.window", type=int)
    g.add_argument("--bilateral", dest="bilateral.enabled", type=parse_bool, metavar="BOOL")
    g.add_argument("--sigma-spatial", dest="bilateral.sigma_spatial", type=float)
    g.add_argument("--sigma-range", dest="bilateral.sigma_range", type=float)
    g.add_argument("--invert", dest="binarize.invert", type=parse_bool, metavar="BOOL",
                   help="treat dark pixels as foreground")
    g.add_argument("--min-area", type=int, default=DEFAULT_MIN_AREA,
                   help="drop shapes smaller than this many pixels")


def _add_dataset(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", help="image folder or manifest CSV (path,class)")
    src.add_argument("--synthetic", metavar="CxN",
                     help="generated corpus of C classes with N instances, e.g. 10x20")


def _config(args):
    keys = ("median.window", "bilateral.enabled", "bilateral.sigma_spatial", "bilateral.sigma_range",
            "binarize.invert")
    return load_config(args.config, {k: getattr(args, k) for k in keys})


def _dataset(args):
    if args.synthetic:
        try:
            c, n = (int(v) for v in args.synthetic.lower().split("x"))
        except ValueError:
            raise HovwError(f"--synthetic expects CxN, got {args.synthetic!r}") from None
        return generate_synthetic_corpus(c, n, seed=args.seed)
    return load_dataset(args.dataset)


def cmd_synth(args):
    var = Variation(*args.variation) if args.variation else Variation()
    ds = generate_synthetic_corpus(args.classes, args.per_class, seed=args.seed, size=args.size,
                                   variation=var)
    manifest = ds.write(args.out)
    print(f"wrote {len(ds)} images in {len(ds.class_names)} classes to {manifest}")


def cmd_binarize(args):
    binary = binarize_pipeline(read_image(args.image), _config(args))
    write_image(args.out, binary)
    print(f"{args.out}: {int(binary.sum())} foreground pixels of {binary.size}")


def cmd_decompose(args):
    binary = binarize_pipeline(read_image(args.image), _config(args))
    dec, skel = decompose(binary, args.min_area)
    print(skeleton_to_text(skel, dec.shapes))
    if args.labels:
        # pruned shapes take the colour of their nearest kept ancestor
        keep = set(skel.nodes)
        lut = np.zeros(len(dec.shapes) + 1, dtype=np.int64)
        for s in dec.shapes:
            a = s.id
            while a not in keep:
                a = dec.skeleton.parent[a]
            lut[s.id + 1] = a + 1
        write_image(args.labels, label_image(lut[dec.labels[1:-1, 1:-1]], seed=args.seed))


def cmd_features(args):
    cfg = _config(args)
    if args.image:
        sources = [(Path(args.image).stem, read_image(args.image))]
    else:
        sources = ((it.image_id, it.load()) for it in _dataset(args).items)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["image_id", "shape_id"] + list(FEATURE_NAMES))
        for image_id, img in sources:
            try:
                dec, skel = decompose(binarize_pipeline(img, cfg), args.min_area)
            except HovwError as exc:
                log.warning("skipping %s: %s", image_id, exc)
                continue
            for sid in skel.preorder():
                f = describe_shape(dec.shapes[sid])
                w.writerow([image_id, sid] + [repr(float(v)) for v in f])
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_train(args):
    ds = _dataset(args)
    model = train_model(ds, args.k, args.bandwidth, seed=args.seed, config=_config(args),
                        min_area=args.min_area, standardize=not args.no_standardize,
                        build_index=not args.no_index)
    size = save_model(model, args.out)
    n_idx = len(model.index) if model.index is not None else 0
    print(f"{args.out}: k={model.k} h={model.bandwidth:g} labels={model.hierarchies.n_labels} "
          f"indexed={n_idx} bytes={size}")
    if model.index is not None and model.index.failures:
        print(f"{len(model.index.failures)} images failed; see log", file=sys.stderr)
    if args.hierarchies:
        with open(args.hierarchies, "w") as fh:
            for e in model.index.entries if model.index is not None else []:
                fh.write(f"{e.image_id}\t{e.label}\t{e.hierarchy.to_bracket()}\n")


def cmd_index(args):
    model = load_model(args.model)
    model.index = build_index(_dataset(args), model)
    save_model(model, args.out or args.model)
    print(f"indexed {len(model.index)} images, {len(model.index.failures)} failed")


def _emit(result, fmt, stream):
    rows = [(rank, it.image_id, it.dissimilarity, it.label) for rank, it in enumerate(result, start=1)]
    if fmt == "csv":
        w = csv.writer(stream)
        w.writerow(["rank", "image_id", "dissimilarity", "label"])
        w.writerows([(r, i, repr(d), lab) for r, i, d, lab in rows])
    elif fmt == "json-lines":
        for r, i, d, lab in rows:
            stream.write(json.dumps({"rank": r, "image_id": i, "dissimilarity": d, "label": lab}) + "\n")
    else:
        for r, i, d, lab in rows:
            stream.write(f"{r:4d}  {i:<24s} {d:12.6f}  {lab}\n")


def cmd_query(args):
    model = load_model(args.model)
    if model.index is None or not model.index.entries:
        raise HovwError("model has no index; run `hovw index` first")
    img = read_image(args.image)
    image_id = Path(args.image).stem
    if args.baseline == "zm":
        result = query_baseline_zm(model.index, model, img, args.n, image_id=image_id)
    else:
        result = query(model.index, model, img, args.n, max_buckets=args.max_buckets, image_id=image_id)
        if args.format == "text":
            print(f"# query label {result.query_label}, buckets visited {result.buckets}")
    _emit(result, args.format, sys.stdout)


def _report_summary(reports):
    for cell in reports:
        for r in cell.values():
            print(f"{r.method:5s} k={r.k:<5d} h={r.bandwidth:<6g} MAP={r.map:.4f} "
                  f"P@R1={r.precision_at_full_recall:.4f} F1={r.f1:.4f} queries={r.n_queries}")


def cmd_eval(args):
    ds = _dataset(args)
    reports = run_experiment(ds, [(args.k, args.bandwidth)], seed=args.seed, folds=args.folds,
                             config=_config(args), min_area=args.min_area,
                             baseline=not args.no_baseline)
    _report_summary(reports)
    if args.out:
        summary, long = write_reports(reports, args.out, args.stem)
        print(f"wrote {summary} and {long}")


def cmd_sweep(args):
    ds = _dataset(args)
    grid = [(k, h) for k in args.k for h in args.bandwidth]
    reports = run_experiment(ds, grid, seed=args.seed, folds=args.folds, config=_config(args),
                             min_area=args.min_area, baseline=not args.no_baseline)
    _report_summary(reports)
    for h in args.bandwidth:
        cells = [c[HOVW] for c in reports if c[HOVW].bandwidth == h]
        best = interior_maximum([r.k for r in cells], [r.map for r in cells])
        print(f"h={h:g}: MAP-vs-k interior maximum at k={best}" if best is not None
              else f"h={h:g}: MAP-vs-k has no interior maximum")
    summary, long = write_reports(reports, args.out, args.stem)
    table = write_sweep(reports, args.out, args.stem)
    print(f"wrote {summary}, {long} and {table}")


def build_parser():
    p = argparse.ArgumentParser(prog="hovw", description="Hierarchy-of-visual-words logo retrieval")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a labelled synthetic corpus")
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--per-class", type=int, default=20)
    s.add_argument("--size", type=int, default=128)
    s.add_argument("--variation", type=_floats, metavar="POS,SCALE,ANGLE,NOISE",
                   help="per-element layout jitter")
    s.add_argument("--out", required=True)
    _add_common(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("binarize", help="denoise and threshold one image")
    s.add_argument("--image", required=True)
    s.add_argument("--out", required=True)
    _add_config(s)
    _add_common(s)
    s.set_defaults(func=cmd_binarize)

    s = sub.add_parser("decompose", help="print the shape hierarchy of one image")
    s.add_argument("--image", required=True)
    s.add_argument("--labels", help="write a color-coded shape label image here")
    _add_config(s)
    _add_common(s)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("features", help="dump 29-dimensional shape features as CSV")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--image")
    src.add_argument("--dataset")
    src.add_argument("--synthetic", metavar="CxN")
    s.add_argument("--out", help="CSV path (default stdout)")
    _add_config(s)
    _add_common(s)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", help="learn both codebooks and save a model")
    _add_dataset(s)
    s.add_argument("-k", "--k", type=int, required=True, help="number of visual words")
    s.add_argument("--bandwidth", type=float, default=0.7, help="mean-shift bandwidth h")
    s.add_argument("--no-standardize", action="store_true")
    s.add_argument("--no-index", action="store_true", help="do not index the training images")
    s.add_argument("--hierarchies", help="write image id, label and bracket tree per training image")
    s.add_argument("--out", required=True)
    _add_config(s)
    _add_common(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("index", help="(re)build a model's retrieval index from a dataset")
    s.add_argument("--model", required=True)
    _add_dataset(s)
    s.add_argument("--out", help="output model (default: overwrite --model)")
    _add_common(s)
    s.set_defaults(func=cmd_index)

    s = sub.add_parser("query", help="retrieve the images most similar to a query")
    s.add_argument("--model", required=True)
    s.add_argument("--image", required=True)
    s.add_argument("-n", type=int, default=10)
    s.add_argument("--baseline", choices=["zm"], help="rank by whole-image Zernike moments instead")
    s.add_argument("--format", choices=["text", "csv", "json-lines"], default="text")
    s.add_argument("--max-buckets", type=int, help="visit at most this many label buckets")
    _add_common(s)
    s.set_defaults(func=cmd_query)

    for name, fn, helptext in (("eval", cmd_eval, "10-fold cross-validated evaluation"),
                               ("sweep", cmd_sweep, "cross-validate a (k, h) grid")):
        s = sub.add_parser(name, help=helptext)
        _add_dataset(s)
        if name == "eval":
            s.add_argument("-k", "--k", type=int, required=True)
            s.add_argument("--bandwidth", type=float, default=0.7)
        else:
            s.add_argument("-k", "--k", type=_ints, required=True, help="comma-separated word counts")
            s.add_argument("--bandwidth", type=_floats, default=[0.7], help="comma-separated bandwidths")
        s.add_argument("--folds", type=int, default=10)
        s.add_argument("--no-baseline", action="store_true", help="skip the global Zernike baseline")
        s.add_argument("--out", required=(name == "sweep"), help="report directory")
        s.add_argument("--stem", default=name)
        _add_config(s)
        _add_common(s)
        s.set_defaults(func=fn)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ModelFormatError as exc:
        print(f"hovw: model file error: {exc}", file=sys.stderr)
        return EXIT_MODEL_FORMAT + exc.code
    except (HovwError, OSError) as exc:
        print(f"hovw: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
