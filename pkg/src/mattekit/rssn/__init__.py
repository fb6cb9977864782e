"""Composition route for synthesising matting training data."""
from .compose import (
    BLUR_KERNELS,
    BatchItem,
    BatchResult,
    CompositionRecipe,
    GatePolicy,
    alpha_blend,
    compose,
    compose_batch,
    draw_recipe,
    fit_background,
)
from .denoise import BM3DProfile, denoise, estimate_noise_sigma
from .filters import add_gaussian_noise, box_blur
from .foreground import ConvergenceWarning, SolverParams, estimate_foreground

__all__ = [
    "BLUR_KERNELS",
    "BM3DProfile",
    "BatchItem",
    "BatchResult",
    "CompositionRecipe",
    "ConvergenceWarning",
    "GatePolicy",
    "SolverParams",
    "add_gaussian_noise",
    "alpha_blend",
    "box_blur",
    "compose",
    "compose_batch",
    "denoise",
    "draw_recipe",
    "estimate_foreground",
    "estimate_noise_sigma",
    "fit_background",
]
