from __future__ import annotations

import numpy as np
from scipy import ndimage

from .types import as_mask

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def connected_components(mask, connectivity: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Label connected set pixels.

    Returns ``(labels, sizes)``: labels are dense from 1 in raster order of
    first appearance (0 is background) and ``sizes[j]`` is the pixel count of
    label ``j + 1``.
    """
    if connectivity not in _STRUCTURES:
        raise ValueError("connectivity must be 4 or 8")
    m = as_mask(mask)
    labels, n = ndimage.label(m, structure=_STRUCTURES[connectivity])
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    return labels, sizes
