"""Gaussian / Laplacian pyramids (5-tap binomial reduce, bilinear expand)."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from .resize import resize

BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def min_side_for(levels: int) -> int:
    """Smallest image side accepted for a pyramid with ``levels`` levels.

    The coarsest (residual) level may be produced from a 1-pixel band, so an
    8x8 input supports five levels.
    """
    return 1 << max(levels - 2, 0)


def blur5(img: np.ndarray) -> np.ndarray:
    out = np.asarray(img, dtype=np.float64)
    for axis in (0, 1):
        out = ndimage.correlate1d(out, BINOMIAL_5, axis=axis, mode="nearest")
    return out


def gaussian_pyramid_reduce(img) -> np.ndarray:
    """Binomial low-pass then drop every other row and column."""
    return blur5(img)[::2, ::2]


def expand(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return resize(img, shape[1], shape[0])


def gaussian_pyramid(img, levels: int) -> list[np.ndarray]:
    g = [np.asarray(img, dtype=np.float64)]
    for _ in range(levels - 1):
        g.append(gaussian_pyramid_reduce(g[-1]))
    return g


def laplacian_pyramid(img, levels: int = 5) -> list[np.ndarray]:
    """Return ``levels`` arrays: ``levels - 1`` band-pass details, then the low-pass residual.

    Band ``k`` is ``G_k - expand(G_{k+1})``; the last entry is ``G_{levels-1}``.
    """
    if levels < 1:
        raise ParameterError(f"levels must be >= 1, got {levels}")
    arr = np.asarray(img, dtype=np.float64)
    need = min_side_for(levels)
    if min(arr.shape[:2]) < need:
        raise ParameterError(
            f"image {arr.shape[1]}x{arr.shape[0]} too small for {levels} pyramid levels "
            f"(need at least {need} pixels per side)"
        )
    g = gaussian_pyramid(arr, levels)
    bands = [g[k] - expand(g[k + 1], g[k].shape[:2]) for k in range(levels - 1)]
    bands.append(g[-1])
    return bands


def reconstruct(bands: list[np.ndarray]) -> np.ndarray:
    out = bands[-1]
    for band in reversed(bands[:-1]):
        out = band + expand(out, band.shape[:2])
    return out
