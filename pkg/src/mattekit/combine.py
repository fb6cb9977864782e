"""Inference-side combiners: collaborative merge, median ensemble, hybrid resolution."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError, ValidationError
from .imgcore.resize import resize
from .imgcore.types import as_alpha, as_mask, check_same_shape
from .rosta import FG, TRANSITION

ALLOWED_RATIOS = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4))


def _as_probs(glance, channels: int) -> np.ndarray:
    p = np.asarray(glance, dtype=np.float64)
    if p.ndim != 3 or p.shape[2] != channels:
        raise ValidationError(f"glance map must have shape (H, W, {channels}), got {p.shape}")
    if not np.all(np.isfinite(p)) or p.min() < 0:
        raise ValidationError("glance probabilities must be finite and non-negative")
    return p


def glance_labels(glance, channels: int) -> np.ndarray:
    """Hard labels from a class-probability map.

    For 3-class maps any tie for the maximum resolves to transition. The
    2-class merges use strict comparisons instead, so ties fall to the
    non-semantic class.
    """
    p = _as_probs(glance, channels)
    if channels == 3:
        top = p.max(axis=2, keepdims=True)
        labels = np.argmax(p, axis=2).astype(np.uint8)
        labels[(p == top).sum(axis=2) > 1] = TRANSITION
        return labels
    return np.argmax(p, axis=2).astype(np.uint8)


def cm_merge_tt(glance, focus) -> np.ndarray:
    """Glance FG -> 1, BG -> 0, transition -> focus."""
    p = _as_probs(glance, 3)
    f = np.clip(np.asarray(focus, dtype=np.float64), 0.0, 1.0)
    check_same_shape(p, f, names=("glance", "focus"))
    labels = glance_labels(p, 3)
    out = np.where(labels == FG, 1.0, 0.0)
    return np.where(labels == TRANSITION, f, out)


def cm_merge_ft(glance, focus) -> np.ndarray:
    """Foreground mask plus focus, focus ignored inside the glance foreground."""
    p = _as_probs(glance, 2)
    f = np.asarray(focus, dtype=np.float64)
    check_same_shape(p, f, names=("glance", "focus"))
    fg = p[..., 1] > p[..., 0]
    return np.clip(fg + np.where(fg, 0.0, f), 0.0, 1.0)


def cm_merge_bt(glance, focus) -> np.ndarray:
    """Not-background mask minus focus, focus ignored inside the glance background.

    The focus channel carries ``1 - alpha`` on the transition region.
    """
    p = _as_probs(glance, 2)
    f = np.asarray(focus, dtype=np.float64)
    check_same_shape(p, f, names=("glance", "focus"))
    bg = p[..., 0] > p[..., 1]
    coarse = 1.0 - bg
    return np.clip(coarse - np.where(bg, 0.0, f), 0.0, 1.0)


_MERGES = {"TT": cm_merge_tt, "FT": cm_merge_ft, "BT": cm_merge_bt}


def cm_merge(kind: str, glance, focus) -> np.ndarray:
    try:
        merge = _MERGES[kind.upper()]
    except KeyError:
        raise ParameterError(f"unknown merge kind {kind!r}") from None
    return merge(glance, focus)


def ensemble_median(a1, a2, a3) -> np.ndarray:
    mattes = [as_alpha(a, name) for a, name in ((a1, "a1"), (a2, "a2"), (a3, "a3"))]
    check_same_shape(*mattes, names=("a1", "a2", "a3"))
    return np.median(np.stack(mattes), axis=0)


def hybrid_replace(initial, transition, focus_hires) -> np.ndarray:
    """Take ``focus_hires`` on transition pixels, ``initial`` elsewhere."""
    init = as_alpha(initial, "initial")
    t = as_mask(transition, "transition")
    focus = as_alpha(focus_hires, "focus_hires")
    check_same_shape(init, t, focus, names=("initial", "transition", "focus_hires"))
    return np.where(t, focus, init)


def _ratio(value) -> Fraction:
    r = Fraction(value).limit_denominator(16) if not isinstance(value, str) else Fraction(value)
    if r not in ALLOWED_RATIOS:
        raise ParameterError(f"down-sampling ratio must be one of 1/2, 1/3, 1/4, got {value}")
    return r


@dataclass(frozen=True)
class HybridConfig:
    """Down-sampling ratios for the glance (``d1``) and focus (``d2``) passes."""

    d1: Fraction = Fraction(1, 3)
    d2: Fraction = Fraction(1, 2)

    def __post_init__(self):
        d1, d2 = _ratio(self.d1), _ratio(self.d2)
        if d1 > d2:
            raise ParameterError(f"d1 must not exceed d2 (got d1={d1}, d2={d2})")
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)

    @staticmethod
    def scaled_size(width: int, height: int, ratio: Fraction) -> tuple[int, int]:
        return max(1, round(width * ratio)), max(1, round(height * ratio))

    def pass_sizes(self, width: int, height: int) -> dict[str, tuple[int, int]]:
        return {
            "glance": self.scaled_size(width, height, self.d1),
            "focus": self.scaled_size(width, height, self.d2),
        }

    def as_record(self) -> dict[str, str]:
        return {"d1": str(self.d1), "d2": str(self.d2)}


def hybrid_merge(initial_low, transition_low, focus, width: int, height: int) -> np.ndarray:
    """Upsample both passes to ``width x height`` and apply :func:`hybrid_replace`.

    The low-resolution transition mask is resampled bilinearly and
    re-binarised at 0.5.
    """
    init = resize(as_alpha(initial_low, "initial"), width, height)
    t = resize(as_mask(transition_low, "transition").astype(np.float64), width, height) >= 0.5
    f = resize(as_alpha(focus, "focus"), width, height)
    return hybrid_replace(np.clip(init, 0, 1), t, np.clip(f, 0, 1))
