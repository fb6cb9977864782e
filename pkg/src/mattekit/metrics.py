"""Matting evaluation metrics.

SAD, Grad and Conn are reported in thousands (raw sums divided by 1000).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .imgcore.components import connected_components
from .imgcore.types import as_alpha, check_same_shape
from .rosta import BG, FG, TRANSITION, RostaMask, make_tt

GRAD_SIGMA = 1.4
CONN_STEP = 0.1
CONN_THETA = 0.15


def _pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    p, g = as_alpha(pred, "pred"), as_alpha(gt, "gt")
    check_same_shape(p, g, names=("pred", "gt"))
    return p, g


def sad(pred, gt) -> float:
    p, g = _pair(pred, gt)
    return float(np.abs(p - g).sum() / 1000.0)


def mse(pred, gt) -> float:
    p, g = _pair(pred, gt)
    return float(np.mean((p - g) ** 2))


def mad(pred, gt) -> float:
    p, g = _pair(pred, gt)
    return float(np.mean(np.abs(p - g)))


def region_sad(pred, gt, rosta: RostaMask) -> tuple[float, float, float]:
    """SAD restricted to the transition, foreground and background of a trimap."""
    if rosta.kind != "TT":
        raise ParameterError(f"region SAD needs a TT trimap, got {rosta.kind}")
    p, g = _pair(pred, gt)
    check_same_shape(p, rosta.labels, names=("pred", "trimap"))
    err = np.abs(p - g)
    return tuple(float(err[rosta.labels == r].sum() / 1000.0) for r in (TRANSITION, FG, BG))


def gaussian_derivative_kernels(sigma: float = GRAD_SIGMA) -> tuple[np.ndarray, np.ndarray]:
    """1-D Gaussian (unit sum) and its first derivative, truncated at 3 sigma."""
    radius = math.ceil(3 * sigma)
    u = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(u**2) / (2 * sigma**2))
    g /= g.sum()
    return g, -u / sigma**2 * g


def gradient_magnitude(alpha: np.ndarray, sigma: float = GRAD_SIGMA) -> np.ndarray:
    g, dg = gaussian_derivative_kernels(sigma)
    gx = ndimage.correlate1d(ndimage.correlate1d(alpha, dg, axis=1, mode="nearest"), g, axis=0, mode="nearest")
    gy = ndimage.correlate1d(ndimage.correlate1d(alpha, dg, axis=0, mode="nearest"), g, axis=1, mode="nearest")
    return np.sqrt(gx**2 + gy**2)


def grad_error(pred, gt, sigma: float = GRAD_SIGMA) -> float:
    p, g = _pair(pred, gt)
    diff = gradient_magnitude(p, sigma) - gradient_magnitude(g, sigma)
    return float(np.sum(diff**2) / 1000.0)


def _largest_components(mask: np.ndarray) -> np.ndarray:
    # ties for the largest size are all kept, so the result does not depend
    # on scan order
    labels, sizes = connected_components(mask, connectivity=4)
    if sizes.size == 0:
        return np.zeros(mask.shape, dtype=bool)
    keep = np.flatnonzero(sizes == sizes.max()) + 1
    return np.isin(labels, keep)


def connectivity_levels(pred: np.ndarray, gt: np.ndarray, step: float = CONN_STEP) -> np.ndarray:
    """Per pixel, the largest threshold at which it lies in the dominant shared component."""
    n = int(round(1.0 / step))
    level = np.zeros(pred.shape, dtype=np.float64)
    for i in range(n + 1):
        t = i / n
        omega = _largest_components((pred >= t) & (gt >= t))
        level[omega] = t
    return level


def _phi(alpha: np.ndarray, level: np.ndarray, theta: float) -> np.ndarray:
    d = alpha - level
    return np.where(d >= theta, 1.0 - d, 1.0)


def conn_error(pred, gt, step: float = CONN_STEP, theta: float = CONN_THETA) -> float:
    p, g = _pair(pred, gt)
    level = connectivity_levels(p, g, step)
    return float(np.abs(_phi(p, level, theta) - _phi(g, level, theta)).sum() / 1000.0)


@dataclass
class MetricReport:
    sad: float
    mse: float
    mad: float
    grad: float
    conn: float
    sad_tran: float
    sad_fg: float
    sad_bg: float
    regions_source: str = ""

    def as_record(self) -> dict:
        return asdict(self)


METRIC_FIELDS = ("sad", "mse", "mad", "grad", "conn", "sad_tran", "sad_fg", "sad_bg")


def evaluate(pred, gt, rosta: RostaMask | None = None) -> MetricReport:
    """Full metric suite; regions come from ``rosta`` or a TT trimap of ``gt``."""
    p, g = _pair(pred, gt)
    if rosta is None:
        rosta = make_tt(g)
    tran, fg, bg = region_sad(p, g, rosta)
    return MetricReport(
        sad=sad(p, g),
        mse=mse(p, g),
        mad=mad(p, g),
        grad=grad_error(p, g),
        conn=conn_error(p, g),
        sad_tran=tran,
        sad_fg=fg,
        sad_bg=bg,
        regions_source=rosta.identifier(),
    )


def summarize(reports: list[MetricReport]) -> dict[str, float]:
    if not reports:
        return {name: 0.0 for name in METRIC_FIELDS}
    return {name: float(np.mean([getattr(r, name) for r in reports])) for name in METRIC_FIELDS}
