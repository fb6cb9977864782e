"""Bilinear resampling with half-pixel centre alignment."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError


def _axis_weights(src: int, dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # dst pixel centre i maps to source coordinate (i + 0.5) * src / dst - 0.5
    coord = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    coord = np.clip(coord, 0.0, src - 1)
    i0 = np.floor(coord).astype(np.intp)
    i1 = np.minimum(i0 + 1, src - 1)
    frac = coord - i0
    return i0, i1, frac


def resize(img, target_w: int, target_h: int) -> np.ndarray:
    """Resize an ``(H, W)`` or ``(H, W, C)`` array to ``(target_h, target_w)``.

    Output values are convex combinations of input values, so the input range
    is preserved. Same-size requests return a copy.
    """
    if int(target_w) < 1 or int(target_h) < 1:
        raise ParameterError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    arr = np.asarray(img, dtype=np.float64)
    h, w = arr.shape[:2]
    target_w, target_h = int(target_w), int(target_h)
    if (h, w) == (target_h, target_w):
        return arr.copy()

    r0, r1, fy = _axis_weights(h, target_h)
    c0, c1, fx = _axis_weights(w, target_w)
    extra = (1,) * (arr.ndim - 2)
    fy = fy.reshape((-1, 1) + extra)
    fx = fx.reshape((1, -1) + extra)

    rows = arr[r0] * (1.0 - fy) + arr[r1] * fy
    return rows[:, c0] * (1.0 - fx) + rows[:, c1] * fx
