"""Binary model files.

Layout (all integers and doubles little-endian)::

    magic     8 bytes   b"HOVWMDL\\0"
    version   u32
    count     u32       number of sections
    table     count x (tag: 4 bytes, offset: u64, length: u64)
    payload   section bodies, offsets relative to the start of the file
    crc32     u32 over every preceding byte

Sections: ``CONF`` (preprocessing and training settings), ``WORD`` (visual
word codebook), ``HIER`` (hierarchy codebook) and optionally ``INDX``
(retrieval index). Truncation, checksum and version problems raise distinct
:class:`~hovw.errors.ModelFormatError` subclasses and never yield a model.
"""

import os
import struct
import zlib

import numpy as np

from .errors import ChecksumError, ModelFormatError, TruncatedModelError, VersionMismatchError
from .hierarchy_codebook import HierarchyCodebook
from .pipeline import Model
from .preprocess import PreprocessConfig
from .retrieval import IndexEntry, RetrievalIndex
from .tree_edit import VisualHierarchy
from .visual_words import Standardizer, VisualWordCodebook

MAGIC = b"HOVWMDL\0"
VERSION = 1
_HEADER = struct.Struct("<8sII")
_ENTRY = struct.Struct("<4sQQ")
_CRC = struct.Struct("<I")


class _Writer:
    def __init__(self):
        self.parts = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def i64(self, v):
        self.parts.append(struct.pack("<q", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def text(self, s):
        if s is None:
            self.i64(-1)
            return
        b = s.encode("utf-8")
        self.i64(len(b))
        self.parts.append(b)

    def array(self, a, dtype):
        a = np.ascontiguousarray(a, dtype=dtype)
        self.i64(a.ndim)
        for n in a.shape:
            self.i64(n)
        self.parts.append(a.tobytes())

    def ints(self, seq):
        self.array(np.asarray(seq, dtype=np.int64).reshape(-1), "<i8")

    def hierarchy(self, h):
        self.ints(h.words)
        self.ints(h.parent)
        self.text(h.image_id)
        self.text(h.codebook_id)

    def bytes(self):
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def _take(self, n):
        if n < 0 or self.pos + n > len(self.data):
            raise ModelFormatError("section ends prematurely")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self):
        return struct.unpack("<B", self._take(1))[0]

    def i64(self):
        return struct.unpack("<q", self._take(8))[0]

    def f64(self):
        return struct.unpack("<d", self._take(8))[0]

    def text(self):
        n = self.i64()
        return None if n == -1 else self._take(n).decode("utf-8")

    def array(self, dtype):
        ndim = self.i64()
        if not 0 <= ndim <= 8:
            raise ModelFormatError("bad array rank")
        shape = tuple(self.i64() for _ in range(ndim))
        dt = np.dtype(dtype)
        count = int(np.prod(shape)) if shape else 1
        return np.frombuffer(self._take(count * dt.itemsize), dtype=dt).reshape(shape).astype(dt.newbyteorder("="))

    def ints(self):
        return tuple(int(v) for v in self.array("<i8"))

    def hierarchy(self):
        words, parent = self.ints(), self.ints()
        return VisualHierarchy(words, parent, self.text(), self.text())


def _conf_section(model):
    w = _Writer()
    cfg = model.preprocess
    w.i64(cfg.median_window)
    w.u8(int(cfg.bilateral_enabled))
    w.f64(cfg.sigma_spatial)
    w.f64(cfg.sigma_range)
    w.u8(int(cfg.invert))
    w.i64(model.min_area)
    w.i64(model.k)
    w.f64(model.bandwidth)
    w.i64(model.seed)
    return w.bytes()


def _word_section(cb):
    w = _Writer()
    w.array(cb.centroids, "<f8")
    w.array(cb.standardizer.mean, "<f8")
    w.array(cb.standardizer.scale, "<f8")
    w.u8(int(cb.standardizer.enabled))
    w.i64(cb.seed)
    w.array(np.asarray(cb.inertia_trace, dtype=np.float64), "<f8")
    return w.bytes()


def _hier_section(theta):
    w = _Writer()
    w.f64(theta.bandwidth)
    w.ints(theta.labels)
    w.ints(theta.medoids)
    w.i64(len(theta.medoid_hierarchies))
    for h in theta.medoid_hierarchies:
        w.hierarchy(h)
    w.array(theta.label_distance, "<f8")
    w.ints(theta.modes if theta.modes is not None else [])
    return w.bytes()


def _index_section(index):
    w = _Writer()
    w.i64(len(index.entries))
    for e in index.entries:
        w.text(e.image_id)
        w.hierarchy(e.hierarchy)
        w.i64(e.label)
        w.array(e.zm, "<f8")
    w.i64(len(index.failures))
    for k in sorted(index.failures):
        w.text(k)
        w.text(index.failures[k])
    return w.bytes()


def model_to_bytes(model, version=VERSION):
    sections = [(b"CONF", _conf_section(model)),
                (b"WORD", _word_section(model.visual_words)),
                (b"HIER", _hier_section(model.hierarchies))]
    if model.index is not None:
        sections.append((b"INDX", _index_section(model.index)))
    offset = _HEADER.size + _ENTRY.size * len(sections)
    table = []
    for tag, body in sections:
        table.append(_ENTRY.pack(tag, offset, len(body)))
        offset += len(body)
    blob = _HEADER.pack(MAGIC, version, len(sections)) + b"".join(table) + b"".join(b for _, b in sections)
    return blob + _CRC.pack(zlib.crc32(blob))


def save_model(model, path):
    """Write ``model`` to ``path``; the file is replaced only once fully written."""
    data = model_to_bytes(model)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
    return len(data)


def _split_sections(data):
    if len(data) < _HEADER.size:
        if MAGIC.startswith(data[:len(MAGIC)]):
            raise TruncatedModelError("model file is truncated (incomplete header)")
        raise ModelFormatError("not a model file")
    magic, version, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    if version != VERSION:
        raise VersionMismatchError(f"model format version {version}; this build reads version {VERSION}")
    table_end = _HEADER.size + _ENTRY.size * count
    if len(data) < table_end + _CRC.size:
        raise TruncatedModelError("model file is truncated (incomplete section table)")
    sections, end = {}, table_end
    for i in range(count):
        tag, off, length = _ENTRY.unpack_from(data, _HEADER.size + _ENTRY.size * i)
        sections[tag] = (off, length)
        end = max(end, off + length)
    if len(data) < end + _CRC.size:
        raise TruncatedModelError(f"model file is truncated ({len(data)} of {end + _CRC.size} bytes)")
    body = data[:end]
    (stored,) = _CRC.unpack_from(data, end)
    if zlib.crc32(body) != stored:
        raise ChecksumError("model checksum mismatch")
    if len(data) != end + _CRC.size:
        raise ModelFormatError("trailing bytes after checksum")
    return {tag: body[off:off + length] for tag, (off, length) in sections.items()}


def model_from_bytes(data):
    sections = _split_sections(bytes(data))
    for tag in (b"CONF", b"WORD", b"HIER"):
        if tag not in sections:
            raise ModelFormatError(f"missing section {tag.decode()}")
    r = _Reader(sections[b"CONF"])
    cfg = PreprocessConfig(median_window=r.i64(), bilateral_enabled=bool(r.u8()), sigma_spatial=r.f64(),
                           sigma_range=r.f64(), invert=bool(r.u8()))
    min_area, k, bandwidth, seed = r.i64(), r.i64(), r.f64(), r.i64()

    r = _Reader(sections[b"WORD"])
    centroids, mean, scale = r.array("<f8"), r.array("<f8"), r.array("<f8")
    std = Standardizer(mean, scale, bool(r.u8()))
    words = VisualWordCodebook(centroids, std, seed=r.i64(), inertia_trace=[float(v) for v in r.array("<f8")])

    r = _Reader(sections[b"HIER"])
    bw = r.f64()
    labels = np.array(r.ints(), dtype=np.int64)
    medoids = list(r.ints())
    med_h = [r.hierarchy() for _ in range(r.i64())]
    label_distance = r.array("<f8")
    modes = np.array(r.ints(), dtype=np.int64)
    theta = HierarchyCodebook(bw, labels, medoids, med_h, label_distance, modes if len(modes) else None)

    index = None
    if b"INDX" in sections:
        r = _Reader(sections[b"INDX"])
        entries = []
        for _ in range(r.i64()):
            image_id = r.text()
            h = r.hierarchy()
            entries.append(IndexEntry(image_id, h, r.i64(), r.array("<f8")))
        failures = {}
        for _ in range(r.i64()):
            key = r.text()
            failures[key] = r.text()
        index = RetrievalIndex(entries, failures)
    return Model(visual_words=words, hierarchies=theta, preprocess=cfg, min_area=min_area, k=k,
                 bandwidth=bandwidth, seed=seed, index=index)


def load_model(path):
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
