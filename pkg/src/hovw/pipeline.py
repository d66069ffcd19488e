"""Image encoding and model training.

An image goes through binarization, decomposition into shapes, 29-dimensional
description of each shape, word assignment and canonical ordering, ending as
a :class:`~hovw.tree_edit.VisualHierarchy`. Training learns the two codebooks
from a dataset and packages them, together with every setting needed to
encode queries the same way, into a :class:`Model`.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .decompose import decompose
from .descriptors import N_FEATURES, describe_shape, zernike_moments
from .errors import HovwError, TrainingError
from .hierarchy_codebook import mean_shift_cluster, pairwise_dissimilarity
from .preprocess import PreprocessConfig, binarize_pipeline
from .tree_edit import EditCostModel, VisualHierarchy, canonicalize
from .visual_words import train_visual_words

log = logging.getLogger(__name__)

DEFAULT_MIN_AREA = 9


@dataclass
class ImageAnalysis:
    """Codebook-independent description of one image."""
    image_id: str
    features: np.ndarray  # (n_shapes, 29) raw, in skeleton preorder
    parent: tuple  # preorder parent index, -1 for the root
    zm_global: np.ndarray  # 25 Zernike magnitudes of the whole foreground


@dataclass
class Model:
    visual_words: object
    hierarchies: object  # HierarchyCodebook
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    min_area: int = DEFAULT_MIN_AREA
    k: int = 0
    bandwidth: float = 0.0
    seed: int = 0
    index: object = None  # RetrievalIndex, optional

    def __post_init__(self):
        self._costs = None

    @property
    def costs(self):
        if self._costs is None:
            self._costs = EditCostModel(self.visual_words)
        return self._costs


def analyze_binary(binary, image_id="", min_area=DEFAULT_MIN_AREA):
    binary = np.asarray(binary, dtype=bool)
    dec, skel = decompose(binary, min_area)
    order = skel.preorder()
    pos = {sid: i for i, sid in enumerate(order)}
    parent = tuple(-1 if sid == skel.root else pos[skel.parent[sid]] for sid in order)
    feats = np.array([describe_shape(dec.shapes[sid]) for sid in order]).reshape(-1, N_FEATURES)
    zm = zernike_moments(binary) if binary.any() else np.zeros(25)
    return ImageAnalysis(image_id, feats, parent, zm)


def analyze_image(image, image_id="", config=None, min_area=DEFAULT_MIN_AREA):
    """Binarize and describe every kept shape of ``image``."""
    return analyze_binary(binarize_pipeline(image, config), image_id, min_area)


def encode(analysis, codebook):
    """Canonical visual hierarchy of an analysed image."""
    words = tuple(int(w) for w in codebook.assign(analysis.features))
    h = VisualHierarchy(words, analysis.parent, analysis.image_id, codebook.fingerprint())
    return canonicalize(h)


def analyze_dataset(dataset, config=None, min_area=DEFAULT_MIN_AREA):
    """Analyse every item; returns ``(analyses, failures)`` with failures keyed by image id."""
    analyses, failures = {}, {}
    for item in dataset.items:
        try:
            analyses[item.image_id] = analyze_image(item.load(), item.image_id, config, min_area)
        except (HovwError, OSError) as exc:
            failures[item.image_id] = str(exc)
            log.warning("skipping %s: %s", item.image_id, exc)
    return analyses, failures


def train_model(dataset, k, bandwidth, seed=0, config=None, min_area=DEFAULT_MIN_AREA,
                standardize=True, analyses=None, build_index=True):
    """Learn both codebooks from ``dataset`` and return a :class:`Model`.

    ``analyses`` may map image ids to precomputed :class:`ImageAnalysis`
    results (cross-validation reuses them across folds). Images that fail to
    process are skipped and reported; if none survive, or clustering cannot
    run, a :class:`~hovw.errors.TrainingError` carries the per-image messages.
    """
    config = config or PreprocessConfig()
    failures = {}
    if analyses is None:
        analyses, failures = analyze_dataset(dataset, config, min_area)
    items = [it for it in dataset.items if it.image_id in analyses]
    if not items:
        raise TrainingError("no training image could be processed", failures)
    feats = np.concatenate([analyses[it.image_id].features for it in items])
    try:
        words = train_visual_words(feats, k, seed=seed, standardize=standardize)
    except HovwError as exc:
        raise TrainingError(f"visual word training failed: {exc}", failures) from exc
    model = Model(visual_words=words, hierarchies=None, preprocess=config, min_area=min_area,
                  k=k, bandwidth=bandwidth, seed=seed)
    hier = [encode(analyses[it.image_id], words) for it in items]
    dist = pairwise_dissimilarity(hier, model.costs)
    model.hierarchies = mean_shift_cluster(dist, bandwidth, hier)
    log.info("trained k=%d h=%g: %d shapes, %d hierarchies, %d labels",
             k, bandwidth, len(feats), len(hier), model.hierarchies.n_labels)
    if build_index:
        from .retrieval import index_analyses
        model.index = index_analyses(model, [analyses[it.image_id] for it in items], failures)
    return model
