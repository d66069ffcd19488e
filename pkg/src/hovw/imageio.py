"""Reading and writing PNG / PGM / PPM images through Pillow."""

import numpy as np
from PIL import Image

from .errors import InvalidInputError


def read_image(path):
    """Return a uint8 array: (H, W) for gray sources, (H, W, 3) for color ones."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("1", "L", "I", "I;16", "F"):
                arr = np.asarray(im.convert("L"))
            elif im.mode == "LA":
                arr = np.asarray(im.convert("L"))
            else:
                if im.mode in ("RGBA", "P", "PA"):
                    rgba = im.convert("RGBA")
                    bg = Image.new("RGBA", rgba.size, (0, 0, 0, 255))
                    im = Image.alpha_composite(bg, rgba)
                arr = np.asarray(im.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot read image {path}: {exc}") from exc
    return np.array(arr, dtype=np.uint8)


def write_image(path, arr):
    arr = np.asarray(arr)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    Image.fromarray(arr.astype(np.uint8)).save(path)


def label_image(labels, seed=0):
    """Color-code a label map; label 0 stays black."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    palette = rng.integers(40, 256, size=(int(labels.max()) + 1, 3), dtype=np.uint8)
    palette[0] = 0
    return palette[labels]
