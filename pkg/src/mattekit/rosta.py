"""Semantic / transition supervision masks derived from a ground-truth matte.

Three representations are produced:

* ``TT``: 3-class trimap (0 = background, 1 = transition, 2 = foreground).
* ``FT``: 2-class foreground mask (0 = not foreground, 1 = foreground).
* ``BT``: 2-class background mask (0 = background, 1 = not background).

Each carries the binary transition mask used to weight the detail losses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .imgcore.io import TRIMAP_BG, TRIMAP_FG, TRIMAP_TRANSITION
from .imgcore.morphology import dilate, erode
from .imgcore.types import as_alpha

DELTA = 1.0 / 510.0
KINDS = ("TT", "FT", "BT")
NUM_CLASSES = {"TT": 3, "FT": 2, "BT": 2}
DEFAULT_KERNEL = {"TT": 25, "FT": 50, "BT": 50}

# TT label ids
BG, TRANSITION, FG = 0, 1, 2


@dataclass(frozen=True)
class RostaMask:
    kind: str
    labels: np.ndarray  # uint8 class ids, see module docstring
    transition: np.ndarray  # bool
    kernel: int
    delta: float = DELTA

    @property
    def num_classes(self) -> int:
        return NUM_CLASSES[self.kind]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def one_hot(self) -> np.ndarray:
        """Class-probability map (H, W, C) with the labels as one-hot vectors."""
        return np.eye(self.num_classes)[self.labels]

    def identifier(self) -> str:
        return f"{self.kind.lower()}:k={self.kernel}:delta={self.delta:.6g}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RostaMask):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.kernel == other.kernel
            and self.delta == other.delta
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.transition, other.transition)
        )

    __hash__ = None


def _odd_kernel(k: int) -> int:
    if int(k) != k or k < 1:
        raise ParameterError(f"kernel must be a positive integer, got {k!r}")
    k = int(k)
    return k + 1 if k % 2 == 0 else k


def _support(alpha: np.ndarray, delta: float) -> np.ndarray:
    return alpha > delta


def _opaque(alpha: np.ndarray, delta: float) -> np.ndarray:
    return alpha >= 1.0 - delta


def make_tt(alpha, k: int = 25, delta: float = DELTA) -> RostaMask:
    a = as_alpha(alpha)
    k = _odd_kernel(k)
    fg = erode(_opaque(a, delta), k)
    bg = ~dilate(_support(a, delta), k)
    labels = np.full(a.shape, TRANSITION, dtype=np.uint8)
    labels[fg] = FG
    labels[bg] = BG
    return RostaMask("TT", labels, labels == TRANSITION, k, delta)


def make_ft(alpha, k: int = 50, delta: float = DELTA) -> RostaMask:
    """Even kernels are promoted to the next odd size (50 -> 51)."""
    a = as_alpha(alpha)
    k = _odd_kernel(k)
    support = _support(a, delta)
    fg = erode(support, k)
    return RostaMask("FT", fg.astype(np.uint8), support & ~fg, k, delta)


def make_bt(alpha, k: int = 50, delta: float = DELTA) -> RostaMask:
    """Background side: dilate the support; the transition is everything
    inside the dilated region that is not fully opaque, so fractional pixels
    are always part of it."""
    a = as_alpha(alpha)
    k = _odd_kernel(k)
    not_bg = dilate(_support(a, delta), k)
    return RostaMask("BT", not_bg.astype(np.uint8), not_bg & ~_opaque(a, delta), k, delta)


_MAKERS = {"TT": make_tt, "FT": make_ft, "BT": make_bt}


def make_rosta(alpha, kind: str, k: int | None = None, delta: float = DELTA) -> RostaMask:
    kind = kind.upper()
    if kind not in _MAKERS:
        raise ParameterError(f"unknown RoSTa kind {kind!r}; expected one of {KINDS}")
    return _MAKERS[kind](alpha, DEFAULT_KERNEL[kind] if k is None else k, delta)


def transition_weight(rosta: RostaMask) -> np.ndarray:
    return rosta.transition.copy()


def to_trimap(rosta: RostaMask) -> np.ndarray:
    """Encode as a 0/128/255 uint8 image.

    TT maps BG/transition/FG directly. FT and BT keep their semantic class at
    0 or 255 and mark transition pixels 128, so the mask round-trips.
    """
    out = np.empty(rosta.shape, dtype=np.uint8)
    if rosta.kind == "TT":
        out[rosta.labels == BG] = TRIMAP_BG
        out[rosta.labels == FG] = TRIMAP_FG
    else:
        out[:] = np.where(rosta.labels == 1, TRIMAP_FG, TRIMAP_BG)
    out[rosta.transition] = TRIMAP_TRANSITION
    return out


def from_trimap(trimap, kind: str = "TT", kernel: int = 0, delta: float = DELTA) -> RostaMask:
    t = np.asarray(trimap)
    if t.ndim != 2:
        raise ValidationError(f"trimap must be 2-D, got {t.shape}")
    if t.dtype != np.uint8:
        t = np.asarray(t, dtype=np.float64)
        if t.max() <= 1.0:
            t = t * 255.0
        t = np.round(t).astype(np.uint8)
    values = set(np.unique(t).tolist())
    if not values <= {TRIMAP_BG, TRIMAP_TRANSITION, TRIMAP_FG}:
        raise ValidationError(f"trimap values must be in {{0, 128, 255}}, got {sorted(values)}")
    kind = kind.upper()
    transition = t == TRIMAP_TRANSITION
    if kind == "TT":
        labels = np.full(t.shape, TRANSITION, dtype=np.uint8)
        labels[t == TRIMAP_BG] = BG
        labels[t == TRIMAP_FG] = FG
    elif kind == "FT":
        labels = (t == TRIMAP_FG).astype(np.uint8)
    elif kind == "BT":
        labels = (t != TRIMAP_BG).astype(np.uint8)
    else:
        raise ParameterError(f"unknown RoSTa kind {kind!r}")
    return RostaMask(kind, labels, transition, kernel, delta)
