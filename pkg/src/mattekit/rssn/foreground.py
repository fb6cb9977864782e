"""Foreground / background estimation from an image and its alpha matte.

Per channel, ``F`` and ``B`` minimise

    sum_i (a_i F_i + (1 - a_i) B_i - I_i)^2
      + sum_i wF_i |grad F_i|^2 + sum_i wB_i |grad B_i|^2

with forward differences on the 4-neighbour grid. The smoothness weights are
``|da/dx| + |da/dy|`` plus a small term that lets ``F`` be smooth where alpha
is near 0 and ``B`` where alpha is near 1. The normal equations are solved by
Jacobi-preconditioned conjugate gradient, all three channels at once.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ParameterError
from ..imgcore.types import as_alpha, as_image, check_same_shape

log = logging.getLogger(__name__)


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SolverParams:
    cg_tolerance: float = 1e-5
    cg_max_iters: int = 2000
    gradient_weight: float = 1.0
    regularization: float = 0.003

    def __post_init__(self):
        if self.cg_tolerance <= 0:
            raise ParameterError("cg_tolerance must be positive")
        if self.cg_max_iters < 1:
            raise ParameterError("cg_max_iters must be >= 1")
        if self.gradient_weight < 0 or self.regularization < 0:
            raise ParameterError("smoothness weights must be non-negative")


@dataclass(frozen=True)
class SolveInfo:
    converged: bool
    iterations: int
    residual: float  # worst relative residual over channels


def _difference_operators(h: int, w: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Forward differences along x and y; rows at the far edge are zero."""
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows_x = idx[:, :-1].ravel()
    rows_y = idx[:-1, :].ravel()
    dx = sp.csr_matrix(
        (np.r_[-np.ones(rows_x.size), np.ones(rows_x.size)], (np.r_[rows_x, rows_x], np.r_[rows_x, rows_x + 1])),
        shape=(n, n),
    )
    dy = sp.csr_matrix(
        (np.r_[-np.ones(rows_y.size), np.ones(rows_y.size)], (np.r_[rows_y, rows_y], np.r_[rows_y, rows_y + w])),
        shape=(n, n),
    )
    return dx, dy


def alpha_gradient_magnitude(alpha: np.ndarray) -> np.ndarray:
    gx = np.zeros_like(alpha)
    gy = np.zeros_like(alpha)
    gx[:, :-1] = alpha[:, 1:] - alpha[:, :-1]
    gy[:-1, :] = alpha[1:, :] - alpha[:-1, :]
    return np.abs(gx) + np.abs(gy)


def build_system(alpha: np.ndarray, params: SolverParams) -> sp.csr_matrix:
    """Normal-equation matrix for the stacked unknown ``[F; B]``."""
    h, w = alpha.shape
    a = alpha.ravel()
    grad = params.gradient_weight * alpha_gradient_magnitude(alpha).ravel()
    wf = grad + params.regularization * (1.0 - a)
    wb = grad + params.regularization * a
    dx, dy = _difference_operators(h, w)

    def smooth(weights):
        d = sp.diags(weights)
        return dx.T @ d @ dx + dy.T @ d @ dy

    top = sp.hstack([sp.diags(a * a) + smooth(wf), sp.diags(a * (1.0 - a))])
    bottom = sp.hstack([sp.diags(a * (1.0 - a)), sp.diags((1.0 - a) ** 2) + smooth(wb)])
    return sp.vstack([top, bottom]).tocsr()


def conjugate_gradient(A, b: np.ndarray, x0: np.ndarray, tol: float, max_iters: int) -> tuple[np.ndarray, SolveInfo]:
    """Jacobi-preconditioned CG for SPD ``A`` with one right-hand side per column.

    Columns iterate independently; a column stops updating once its relative
    residual ``|r| / |b|`` drops below ``tol``.
    """
    diag = A.diagonal()
    inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0)[:, None]
    x = x0.copy()
    r = b - A @ x
    bnorm = np.linalg.norm(b, axis=0)
    bnorm[bnorm == 0] = 1.0
    rel = np.linalg.norm(r, axis=0) / bnorm
    active = rel > tol
    z = inv_diag * r
    p = z.copy()
    rz = np.sum(r * z, axis=0)
    it = 0
    while active.any() and it < max_iters:
        it += 1
        Ap = A @ p
        pAp = np.sum(p * Ap, axis=0)
        step = np.where(active & (pAp > 0), rz / np.where(pAp > 0, pAp, 1.0), 0.0)
        x += step * p
        r -= step * Ap
        rel = np.linalg.norm(r, axis=0) / bnorm
        active &= rel > tol
        z = inv_diag * r
        rz_new = np.sum(r * z, axis=0)
        beta = np.where(rz > 0, rz_new / np.where(rz > 0, rz, 1.0), 0.0)
        p = z + beta * p
        rz = rz_new
    return x, SolveInfo(converged=not active.any(), iterations=it, residual=float(rel.max()))


def estimate_foreground(image, alpha, params: SolverParams | None = None, return_info: bool = False):
    """Recover ``(F, B)`` from an image and its matte.

    Where alpha is 1 the foreground equals the image, where alpha is 0 the
    background does. Non-convergence emits :class:`ConvergenceWarning` and
    still returns the last iterate.
    """
    params = params or SolverParams()
    img = as_image(image)
    a = as_alpha(alpha)
    check_same_shape(img, a, names=("image", "alpha"))
    h, w = a.shape
    n = h * w

    A = build_system(a, params)
    flat = img.reshape(n, 3)
    av = a.reshape(n, 1)
    b = np.vstack([av * flat, (1.0 - av) * flat])
    x0 = np.vstack([flat, flat])
    x, info = conjugate_gradient(A, b, x0, params.cg_tolerance, params.cg_max_iters)
    if not info.converged:
        msg = f"foreground solve stopped after {info.iterations} iterations, relative residual {info.residual:.3g}"
        warnings.warn(ConvergenceWarning(msg), stacklevel=2)
        log.warning(msg)

    fg = np.clip(x[:n].reshape(h, w, 3), 0.0, 1.0)
    bg = np.clip(x[n:].reshape(h, w, 3), 0.0, 1.0)
    if return_info:
        return fg, bg, info
    return fg, bg
