"""Grayscale conversion, denoising filters and Otsu binarization.

Gray images are 2-D ``uint8`` arrays, binary images 2-D ``bool`` arrays with
``True`` marking foreground.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidInputError, InvalidParameterError

REC601 = (0.299, 0.587, 0.114)


class DegenerateImageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    median_window: int = 5
    bilateral_enabled: bool = True
    sigma_spatial: float = 3.0
    sigma_range: float = 30.0
    invert: bool = False

    def as_dict(self):
        return {
            "median.window": self.median_window,
            "bilateral.enabled": self.bilateral_enabled,
            "bilateral.sigma_spatial": self.sigma_spatial,
            "bilateral.sigma_range": self.sigma_range,
            "binarize.invert": self.invert,
        }


def to_grayscale(image):
    """Rec.601 luminance, rounded half-up. 2-D input is validated and passed through."""
    arr = np.asarray(image)
    if arr.size == 0 or arr.ndim not in (2, 3):
        raise InvalidInputError("empty or malformed image")
    if arr.min() < 0 or arr.max() > 255:
        raise InvalidInputError("channel values must lie in [0, 255]")
    if arr.ndim == 2:
        return arr.astype(np.uint8)
    if arr.shape[2] < 3:
        return arr[..., 0].astype(np.uint8)
    rgb = arr[..., :3].astype(np.float64)
    lum = REC601[0] * rgb[..., 0] + REC601[1] * rgb[..., 1] + REC601[2] * rgb[..., 2]
    return np.clip(np.floor(lum + 0.5), 0, 255).astype(np.uint8)


def median_filter(img, window=5):
    """Median over a ``window`` x ``window`` neighbourhood with clamp-to-edge borders."""
    if window < 1 or window % 2 == 0:
        raise InvalidParameterError(f"median window must be odd and >= 1, got {window}")
    img = np.asarray(img)
    if window == 1:
        return img.copy()
    r = window // 2
    padded = np.pad(img, r, mode="edge")
    windows = sliding_window_view(padded, (window, window))
    flat = windows.reshape(img.shape[0], img.shape[1], window * window)
    # odd count: the middle order statistic is an input value, so no rounding
    out = np.partition(flat, window * window // 2, axis=-1)[..., window * window // 2]
    return out.astype(img.dtype)


def bilateral_filter(img, sigma_spatial=3.0, sigma_range=30.0):
    """Bilateral filter with a ceil(3*sigma_spatial) radius and clamped borders.

    Returns float64 intensities; callers needing a GrayImage round the result.
    """
    if not sigma_spatial > 0 or not sigma_range > 0:
        raise InvalidParameterError("bilateral sigmas must be positive")
    src = np.asarray(img, dtype=np.float64)
    r = int(math.ceil(3.0 * sigma_spatial))
    padded = np.pad(src, r, mode="edge")
    h, w = src.shape
    num = np.zeros_like(src)
    den = np.zeros_like(src)
    inv_s = 1.0 / (2.0 * sigma_spatial * sigma_spatial)
    inv_r = 1.0 / (2.0 * sigma_range * sigma_range)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = padded[r + dy:r + dy + h, r + dx:r + dx + w]
            diff = shifted - src
            wgt = math.exp(-(dx * dx + dy * dy) * inv_s) * np.exp(-diff * diff * inv_r)
            num += wgt * shifted
            den += wgt
    return num / den


def otsu_threshold(img):
    """Threshold maximising between-class variance; ``None`` for constant images.

    Pixels strictly above the threshold form the upper class. Variances are
    compared exactly (rational arithmetic), ties go to the lowest threshold.
    """
    hist = np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)
    if hist.sum() == 0:
        raise InvalidInputError("empty image")
    counts = [int(v) for v in hist]
    total_n = sum(counts)
    total_s = sum(i * c for i, c in enumerate(counts))
    best_t, best = None, Fraction(0)
    n0 = s0 = 0
    for t in range(255):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = total_s - s0
        # w0*w1*(mu0-mu1)^2 up to the constant factor 1/N^2
        var = Fraction((s0 * n1 - s1 * n0) ** 2, n0 * n1)
        if var > best:
            best, best_t = var, t
    return best_t


def otsu_binarize(img, invert=False):
    """Binarize with Otsu's threshold; constant images give all-background plus a warning."""
    img = np.asarray(img)
    if img.size == 0:
        raise InvalidInputError("empty image")
    t = otsu_threshold(img)
    if t is None:
        warnings.warn("constant image: Otsu threshold undefined, returning all background",
                      DegenerateImageWarning, stacklevel=2)
        return np.zeros(img.shape, dtype=bool)
    return img <= t if invert else img > t


def binarize_pipeline(image, config=None):
    config = config or PreprocessConfig()
    gray = to_grayscale(image)
    gray = median_filter(gray, config.median_window)
    if config.bilateral_enabled:
        smoothed = bilateral_filter(gray, config.sigma_spatial, config.sigma_range)
        gray = np.clip(np.floor(smoothed + 0.5), 0, 255).astype(np.uint8)
    return otsu_binarize(gray, invert=config.invert)
