from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..imgcore.types import as_image


def _running_box(arr: np.ndarray, r: int, axis: int) -> np.ndarray:
    # window [x - r//2, x + r - 1 - r//2], replicate-padded, via a cumulative sum
    before, after = r // 2, r - 1 - r // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (before + 1, after)
    padded = np.pad(arr, pad, mode="edge")
    csum = np.cumsum(padded, axis=axis)
    n = arr.shape[axis]
    hi = np.take(csum, np.arange(r, r + n), axis=axis)
    lo = np.take(csum, np.arange(0, n), axis=axis)
    return (hi - lo) / r


def box_blur(image, r: int) -> np.ndarray:
    """Mean over an r x r replicate-padded window, O(1) per pixel.

    For even ``r`` the window extends one pixel further up/left than
    down/right (same anchor convention as OpenCV's ``blur``).
    """
    if int(r) != r or r < 1:
        raise ParameterError(f"blur kernel must be an integer >= 1, got {r!r}")
    r = int(r)
    img = as_image(image) if np.ndim(image) == 3 else np.asarray(image, dtype=np.float64)
    if r == 1:
        return img.copy()
    # sums run on the offset from one pixel, so constant regions stay exact
    ref = img[:1, :1]
    out = ref + _running_box(_running_box(img - ref, r, 0), r, 1)
    return np.clip(out, 0.0, 1.0)


def add_gaussian_noise(image, sigma_255: float = 10.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Add i.i.d. N(0, sigma_255 / 255) noise and clamp to [0, 1]."""
    if sigma_255 < 0:
        raise ParameterError("noise sigma must be non-negative")
    img = np.asarray(image, dtype=np.float64)
    if sigma_255 == 0:
        return img.copy()
    if rng is None:
        rng = np.random.default_rng()
    return np.clip(img + rng.normal(0.0, sigma_255 / 255.0, size=img.shape), 0.0, 1.0)
