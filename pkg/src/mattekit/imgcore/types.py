"""Array conventions for images, mattes and masks.

Images are ``(H, W, 3)`` float64 arrays in [0, 1], alpha mattes are ``(H, W)``
float64 arrays in [0, 1] and binary masks are ``(H, W)`` bool arrays.
"""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError

_RANGE_TOL = 1e-9


def _check_range(arr: np.ndarray, what: str) -> None:
    if arr.size == 0:
        raise ValidationError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite values")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < -_RANGE_TOL or hi > 1 + _RANGE_TOL:
        raise ValidationError(f"{what} values must lie in [0, 1], got [{lo:.6g}, {hi:.6g}]")


def as_image(img, name: str = "image") -> np.ndarray:
    """Validate and return an RGB image as float64 (H, W, 3)."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"{name} must have shape (H, W, 3), got {arr.shape}")
    _check_range(arr, name)
    return np.clip(arr, 0.0, 1.0)


def as_alpha(alpha, name: str = "alpha") -> np.ndarray:
    """Validate and return an alpha matte as float64 (H, W)."""
    arr = np.asarray(alpha, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if arr.ndim != 2:
        raise ValidationError(f"{name} must have shape (H, W), got {arr.shape}")
    _check_range(arr, name)
    return np.clip(arr, 0.0, 1.0)


def as_mask(mask, name: str = "mask") -> np.ndarray:
    """Validate and return a strictly binary mask as bool (H, W)."""
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty (H, W) array, got {arr.shape}")
    if arr.dtype == np.bool_:
        return arr
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError(f"{name} must be binary (values in {{0, 1}})")
    return arr.astype(bool)


def check_same_shape(*arrays: np.ndarray, names: tuple[str, ...] | None = None) -> None:
    shapes = [a.shape[:2] for a in arrays]
    if len(set(shapes)) > 1:
        label = ", ".join(names) if names else "inputs"
        raise ValidationError(f"dimension mismatch between {label}: {shapes}")
