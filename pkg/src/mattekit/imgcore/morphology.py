"""Square-window binary morphology with replicated borders."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from .types import as_mask


def _check_kernel(k: int) -> int:
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ParameterError(f"kernel size must be a positive odd integer, got {k!r}")
    return int(k)


def erode(mask, k: int) -> np.ndarray:
    """Pixel is set iff every pixel of its k x k window is set."""
    k = _check_kernel(k)
    m = as_mask(mask)
    if k == 1:
        return m.copy()
    return ndimage.minimum_filter(m.view(np.uint8), size=k, mode="nearest").astype(bool)


def dilate(mask, k: int) -> np.ndarray:
    """Pixel is set iff any pixel of its k x k window is set."""
    k = _check_kernel(k)
    m = as_mask(mask)
    if k == 1:
        return m.copy()
    return ndimage.maximum_filter(m.view(np.uint8), size=k, mode="nearest").astype(bool)
