"""Datasets: labelled image collections from manifests, MPEG-7 style folders or memory."""

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imageio import read_image, write_image

IMAGE_SUFFIXES = {".png", ".gif", ".pgm", ".ppm", ".pbm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff"}
_MPEG7_NAME = re.compile(r"^(?P<cls>.+?)[-_](?P<inst>\d+)$")


@dataclass
class Item:
    image_id: str
    label: int | None  # None = uncategorized
    path: str | None = None
    array: np.ndarray | None = field(default=None, repr=False)

    def load(self):
        if self.array is not None:
            return self.array
        return read_image(self.path)


@dataclass
class Dataset:
    name: str
    items: list
    class_names: list = field(default_factory=list)

    def __len__(self):
        return len(self.items)

    def categorized(self):
        """Copy keeping only items with a class (uncategorized ones are not evaluated)."""
        return Dataset(self.name, [it for it in self.items if it.label is not None],
                       list(self.class_names))

    def subset(self, indices):
        return Dataset(self.name, [self.items[i] for i in indices], list(self.class_names))

    @property
    def labels(self):
        return [it.label for it in self.items]

    def write(self, directory):
        """Write images as PNG plus ``manifest.csv``; returns the manifest path."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rows = []
        for it in self.items:
            fname = f"{it.image_id}.png"
            write_image(directory / fname, it.load())
            cls = "" if it.label is None else self.class_names[it.label]
            rows.append((fname, cls))
        manifest = directory / "manifest.csv"
        with open(manifest, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path", "class"])
            w.writerows(rows)
        return manifest


def _dense(names):
    classes = sorted({n for n in names if n})
    index = {c: i for i, c in enumerate(classes)}
    return classes, [index[n] if n else None for n in names]


def load_manifest(path, name=None):
    """Read a ``path,class`` CSV (header optional); empty class means uncategorized."""
    path = Path(path)
    entries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if row[0].strip().lower() == "path":
                continue
            cls = row[1].strip() if len(row) > 1 else ""
            entries.append((row[0].strip(), cls))
    classes, labels = _dense([c for _, c in entries])
    items = []
    for (rel, _), lab in zip(entries, labels):
        p = Path(rel)
        if not p.is_absolute():
            p = path.parent / p
        items.append(Item(image_id=Path(rel).stem, label=lab, path=str(p)))
    return Dataset(name or path.stem, items, classes)


def load_directory(directory, name=None):
    """Collect images from a folder; MPEG-7 names like ``apple-1.png`` give the class."""
    directory = Path(directory)
    manifest = directory / "manifest.csv"
    if manifest.exists():
        return load_manifest(manifest, name or directory.name)
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    names = []
    for p in files:
        m = _MPEG7_NAME.match(p.stem)
        names.append(m.group("cls") if m else "")
    classes, labels = _dense(names)
    items = [Item(image_id=p.stem, label=lab, path=str(p)) for p, lab in zip(files, labels)]
    return Dataset(name or directory.name, items, classes)


def load_dataset(source, name=None):
    source = Path(source)
    if source.is_dir():
        return load_directory(source, name)
    return load_manifest(source, name)
