"""Seeded composition route: estimate F, maybe denoise, maybe blur B, blend, maybe add noise."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from ..errors import ParameterError, ValidationError
from ..imgcore.resize import resize
from ..imgcore.types import as_alpha, as_image, check_same_shape
from .denoise import denoise
from .filters import add_gaussian_noise, box_blur
from .foreground import SolverParams, estimate_foreground

log = logging.getLogger(__name__)

BLUR_KERNELS = (20, 30, 40, 50, 60)
GATE_PROBABILITY = 0.5
DEFAULT_K = 5
DEFAULT_NOISE_SIGMA = 10.0

GATE_MODES = ("random", "on", "off")


@dataclass(frozen=True)
class GatePolicy:
    """How each probabilistic step is decided: drawn at random, forced on, or off."""

    denoise: str = "random"
    blur: str = "random"
    noise: str = "random"

    def __post_init__(self):
        for name in ("denoise", "blur", "noise"):
            if getattr(self, name) not in GATE_MODES:
                raise ParameterError(f"gate mode for {name} must be one of {GATE_MODES}")

    @classmethod
    def all_off(cls) -> "GatePolicy":
        return cls("off", "off", "off")

    @classmethod
    def all_on(cls) -> "GatePolicy":
        return cls("on", "on", "on")


@dataclass(frozen=True)
class CompositionRecipe:
    master_seed: int
    item_index: int
    k: int
    K: int = DEFAULT_K
    denoise_applied: bool = False
    blur_applied: bool = False
    blur_kernel: int | None = None
    noise_applied: bool = False
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    background_id: str | None = None
    foreground_estimated: bool = False

    def __post_init__(self):
        if (self.blur_kernel is not None) != self.blur_applied:
            raise ValidationError("blur_kernel must be set exactly when blur_applied is true")
        if self.blur_kernel is not None and self.blur_kernel < 1:
            raise ValidationError("blur_kernel must be >= 1")

    def as_record(self) -> dict:
        return asdict(self)

    @classmethod
    def from_record(cls, record: dict) -> "CompositionRecipe":
        names = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in record.items() if k in names})


def _seed_sequence(master_seed: int, item_index: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(item_index), int(k)))


def _streams(master_seed: int, item_index: int, k: int) -> tuple[np.random.Generator, np.random.Generator]:
    gates, noise = _seed_sequence(master_seed, item_index, k).spawn(2)
    return np.random.default_rng(gates), np.random.default_rng(noise)


def _gate(mode: str, u: float) -> bool:
    if mode == "on":
        return True
    if mode == "off":
        return False
    return bool(u < GATE_PROBABILITY)


def draw_recipe(
    master_seed: int,
    item_index: int,
    k: int,
    K: int = DEFAULT_K,
    background_id: str | None = None,
    policy: GatePolicy = GatePolicy(),
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
) -> CompositionRecipe:
    """Realise every random choice for composite ``k`` of item ``item_index``.

    The four draws always happen in the same order, so forcing a gate does
    not shift the other choices.
    """
    rng, _ = _streams(master_seed, item_index, k)
    u_denoise, u_blur = rng.random(), rng.random()
    kernel = BLUR_KERNELS[int(rng.integers(len(BLUR_KERNELS)))]
    u_noise = rng.random()
    blur = _gate(policy.blur, u_blur)
    return CompositionRecipe(
        master_seed=int(master_seed),
        item_index=int(item_index),
        k=int(k),
        K=int(K),
        denoise_applied=_gate(policy.denoise, u_denoise),
        blur_applied=blur,
        blur_kernel=kernel if blur else None,
        noise_applied=_gate(policy.noise, u_noise),
        noise_sigma=float(noise_sigma),
        background_id=background_id,
    )


def fit_background(background: np.ndarray, width: int, height: int) -> np.ndarray:
    """Scale down so the background just covers ``width x height``, then centre-crop."""
    bh, bw = background.shape[:2]
    if (bh, bw) == (height, width):
        return background
    if bh < height or bw < width:
        raise ValidationError(f"background {bw}x{bh} is smaller than foreground {width}x{height}")
    scale = max(height / bh, width / bw)
    nh, nw = max(height, round(bh * scale)), max(width, round(bw * scale))
    scaled = resize(background, nw, nh)
    top, left = (nh - height) // 2, (nw - width) // 2
    return np.clip(scaled[top : top + height, left : left + width], 0.0, 1.0)


def alpha_blend(fg: np.ndarray, alpha: np.ndarray, bg: np.ndarray) -> np.ndarray:
    a = alpha[..., None]
    return np.clip(fg * a + bg * (1.0 - a), 0.0, 1.0)


def compose(
    fg_or_original,
    alpha,
    background,
    recipe: CompositionRecipe,
    *,
    original: bool = False,
    solver: SolverParams | None = None,
    denoiser: Callable[[np.ndarray], np.ndarray] = denoise,
) -> tuple[np.ndarray, CompositionRecipe]:
    """Execute one composite exactly as ``recipe`` prescribes.

    With ``original=True`` the first argument is a natural photo and the
    foreground is estimated from it first.
    """
    src = as_image(fg_or_original, "foreground")
    a = as_alpha(alpha)
    check_same_shape(src, a, names=("foreground", "alpha"))
    h, w = a.shape
    bg = fit_background(as_image(background, "background"), w, h)

    fg = estimate_foreground(src, a, solver)[0] if original else src
    if recipe.denoise_applied:
        fg, bg = denoiser(fg), denoiser(bg)
    if recipe.blur_applied:
        bg = box_blur(bg, recipe.blur_kernel)
    out = alpha_blend(fg, a, bg)
    if recipe.noise_applied:
        _, noise_rng = _streams(recipe.master_seed, recipe.item_index, recipe.k)
        out = add_gaussian_noise(out, recipe.noise_sigma, noise_rng)
    return out, replace(recipe, foreground_estimated=bool(original))


@dataclass
class BatchItem:
    id: str
    image_path: str
    alpha_path: str
    original: bool = False


@dataclass
class BatchResult:
    item_id: str
    k: int
    recipe: CompositionRecipe | None = None
    composite: np.ndarray | None = field(default=None, repr=False)
    error: str | None = None


def _run_item(args) -> list[BatchResult]:
    from ..imgcore.io import read_gray, read_image

    item, item_index, bg_ids, bg_paths, master_seed, K, policy, noise_sigma, solver = args
    try:
        src = read_image(item.image_path)
        alpha = read_gray(item.alpha_path)
        check_same_shape(src, alpha, names=("image", "alpha"))
        fg = estimate_foreground(src, alpha, solver)[0] if item.original else src
    except Exception as exc:  # noqa: BLE001 - recorded per item
        return [BatchResult(item.id, k, error=f"{type(exc).__name__}: {exc}") for k in range(K)]

    results = []
    for k, (bg_id, bg_path) in enumerate(zip(bg_ids, bg_paths)):
        recipe = draw_recipe(master_seed, item_index, k, K, bg_id, policy, noise_sigma)
        try:
            composite, recipe = compose(fg, alpha, read_image(bg_path), recipe)
            recipe = replace(recipe, foreground_estimated=item.original)
            results.append(BatchResult(item.id, k, recipe, composite))
        except Exception as exc:  # noqa: BLE001
            results.append(BatchResult(item.id, k, recipe, error=f"{type(exc).__name__}: {exc}"))
    return results


def compose_batch(
    items: list[BatchItem],
    backgrounds: list[tuple[str, str]],
    master_seed: int,
    K: int = DEFAULT_K,
    policy: GatePolicy = GatePolicy(),
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
    solver: SolverParams | None = None,
    workers: int = 1,
) -> list[BatchResult]:
    """K composites per item with per-item backgrounds drawn from ``backgrounds``.

    ``backgrounds`` is a list of ``(id, path)``. Every random choice derives
    from ``(master_seed, item_index, k)``, so output does not depend on
    ``workers``. Failing items are reported in ``BatchResult.error``.
    """
    from ..datasets.splits import sample_backgrounds

    if K <= 0 or not items:
        return []
    paths = dict(backgrounds)
    table = sample_backgrounds(sorted(paths), len(items), K, master_seed)
    jobs = [
        (item, i, row, [paths[b] for b in row], master_seed, K, policy, noise_sigma, solver)
        for i, (item, row) in enumerate(zip(items, table))
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_item, jobs))
    else:
        chunks = [_run_item(job) for job in jobs]
    return [r for chunk in chunks for r in chunk]
