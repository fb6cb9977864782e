"""Reference values for the training losses (no gradients).

These exist to cross-check loss implementations living in a training
framework. Every function takes plain arrays and returns a float.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .imgcore.pyramid import gaussian_pyramid_reduce, laplacian_pyramid
from .imgcore.types import as_alpha, as_image, check_same_shape

EPSILON = 1e-6
PROB_FLOOR = 1e-7
LAP_LEVELS = 5


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 0.25
    lambda2: float = 0.25
    lambda3: float = 0.25

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ParameterError("loss weights must be non-negative")


@dataclass
class LossReport:
    l_ce: float
    l_alpha_t: float
    l_lap_t: float
    l_fd: float
    l_alpha_full: float
    l_lap_full: float
    l_comp: float
    l_cm: float
    l_total: float
    epsilon: float = EPSILON

    def as_record(self) -> dict:
        return asdict(self)


def loss_ce(pred, gt_labels) -> float:
    """Pixel-averaged cross entropy of a (H, W, C) probability map."""
    p = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(gt_labels)
    if p.ndim != 3:
        raise ValidationError(f"prediction must be (H, W, C), got {p.shape}")
    check_same_shape(p, labels, names=("pred", "gt_labels"))
    c = p.shape[2]
    if labels.min() < 0 or labels.max() >= c:
        raise ValidationError(f"labels must lie in [0, {c})")
    picked = np.take_along_axis(p, labels[..., None].astype(np.intp), axis=2)[..., 0]
    return float(np.mean(-np.log(np.clip(picked, PROB_FLOOR, 1.0))))


def _weight(weight, shape) -> np.ndarray:
    if weight is None:
        return np.ones(shape, dtype=np.float64)
    w = np.asarray(weight, dtype=np.float64)
    check_same_shape(w, np.empty(shape), names=("weight", "alpha"))
    return w


def loss_alpha(pred, gt, weight=None, eps: float = EPSILON) -> float:
    """Charbonnier absolute difference averaged over weighted pixels."""
    p, g = as_alpha(pred, "pred"), as_alpha(gt, "gt")
    check_same_shape(p, g, names=("pred", "gt"))
    w = _weight(weight, p.shape)
    total = w.sum()
    if total <= 0:
        raise ValidationError("weight mask selects no pixels")
    return float(np.sum(np.sqrt((p - g) ** 2 * w + eps**2 * w)) / total)


def pyramid_weights(weight: np.ndarray, levels: int = LAP_LEVELS) -> list[np.ndarray]:
    """Per-level binary weights: reduce the float weight alongside the pyramid, keep >= 0.5."""
    chain = [np.asarray(weight, dtype=np.float64)]
    for _ in range(levels - 1):
        chain.append(gaussian_pyramid_reduce(chain[-1]))
    return [(c >= 0.5).astype(np.float64) for c in chain]


def loss_lap(pred, gt, weight=None, levels: int = LAP_LEVELS) -> float:
    """Sum over pyramid levels of the weighted mean absolute band difference.

    Levels whose reduced weight selects no pixel contribute nothing.
    """
    p, g = as_alpha(pred, "pred"), as_alpha(gt, "gt")
    check_same_shape(p, g, names=("pred", "gt"))
    w = _weight(weight, p.shape)
    if w.sum() <= 0:
        raise ValidationError("weight mask selects no pixels")
    total = 0.0
    for bp, bg, wk in zip(laplacian_pyramid(p, levels), laplacian_pyramid(g, levels), pyramid_weights(w, levels)):
        n = wk.sum()
        if n > 0:
            total += float(np.sum(np.abs(bp - bg) * wk) / n)
    return total


def composite(alpha: np.ndarray, fg: np.ndarray, bg: np.ndarray) -> np.ndarray:
    a = alpha[..., None]
    return fg * a + bg * (1.0 - a)


def loss_comp(pred_alpha, gt_alpha, fg, bg, eps: float = EPSILON) -> float:
    """Charbonnier difference between composites built with each alpha."""
    p, g = as_alpha(pred_alpha, "pred_alpha"), as_alpha(gt_alpha, "gt_alpha")
    f, b = as_image(fg, "fg"), as_image(bg, "bg")
    check_same_shape(p, g, f, b, names=("pred_alpha", "gt_alpha", "fg", "bg"))
    diff = composite(g, f, b) - composite(p, f, b)
    return float(np.mean(np.sqrt(diff**2 + eps**2)))


def loss_total(
    glance,
    gt_labels,
    focus,
    gt_alpha,
    transition,
    merged,
    fg,
    bg,
    weights: LossWeights = LossWeights(),
    focus_target=None,
) -> LossReport:
    """Weighted total of the glance, focus and merged-prediction losses.

    ``focus_target`` defaults to ``gt_alpha``; pass ``1 - gt_alpha`` for the
    background-mask representation, whose focus channel is subtracted.
    """
    target = gt_alpha if focus_target is None else focus_target
    l_ce = loss_ce(glance, gt_labels)
    l_alpha_t = loss_alpha(focus, target, transition)
    l_lap_t = loss_lap(focus, target, transition)
    l_alpha_full = loss_alpha(merged, gt_alpha)
    l_lap_full = loss_lap(merged, gt_alpha)
    l_comp = loss_comp(merged, gt_alpha, fg, bg)
    l_fd = l_alpha_t + l_lap_t
    l_cm = l_alpha_full + l_lap_full + l_comp
    l_total = weights.lambda1 * l_ce + weights.lambda2 * l_fd + weights.lambda3 * l_cm
    return LossReport(l_ce, l_alpha_t, l_lap_t, l_fd, l_alpha_full, l_lap_full, l_comp, l_cm, l_total)
