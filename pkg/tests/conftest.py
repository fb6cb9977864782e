import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def soft_disk(size=128, center=None, radius=30.0, band=10.0, quantize=True):
    """Disk matte whose fractional ring is ``band`` pixels wide."""
    cy, cx = center if center is not None else (size / 2, size / 2)
    yy, xx = np.mgrid[0:size, 0:size]
    r = np.hypot(yy - cy, xx - cx)
    alpha = np.clip((radius - r) / band + 0.5, 0.0, 1.0)
    return np.round(alpha * 255) / 255 if quantize else alpha


def hard_edge(size=128):
    alpha = np.zeros((size, size))
    alpha[:, : size // 2] = 1.0
    return alpha


@pytest.fixture
def record_criterion():
    def _record(name: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((name, "PASS" if passed else "FAIL", detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{status}] {name}" + (f" ({detail})" if detail else ""))


def soft_band_fixtures(n=10, size=128, band=10.0, seed=11):
    """Disk and ellipse mattes with a fractional ring ``band`` px wide, 8-bit quantised."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    out = []
    for i in range(n):
        cy, cx = rng.uniform(size * 0.4, size * 0.6, 2)
        radius = rng.uniform(22, 32)
        sy, sx = (1.0, 1.0) if i % 2 == 0 else rng.uniform(0.8, 1.25, 2)
        r = np.hypot((yy - cy) * sy, (xx - cx) * sx)
        alpha = np.clip((radius - r) / band + 0.5, 0.0, 1.0)
        out.append(np.round(alpha * 255) / 255)
    return out


def gt_merge_inputs(alpha, kind):
    """Glance/focus pair a perfect network would emit for ``alpha``."""
    from mattekit.rosta import make_rosta

    mask = make_rosta(alpha, kind)
    glance = mask.one_hot()
    if kind == "TT":
        focus = alpha.copy()
    elif kind == "FT":
        focus = np.where(mask.transition, alpha, 0.0)
    else:
        focus = np.where(mask.transition, 1.0 - alpha, 0.0)
    return glance, focus


def smooth_image(seed, h, w):
    """Low-frequency RGB image: a few Gaussian blobs over a gradient."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    yy, xx = yy / h, xx / w
    img = np.stack([0.2 + 0.5 * xx, 0.3 + 0.4 * yy, 0.5 - 0.3 * xx * yy], axis=-1)
    for _ in range(4):
        cy, cx = rng.random(2)
        s = rng.uniform(0.05, 0.25)
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
        img = img + rng.uniform(-0.4, 0.4, 3) * blob[..., None]
    return np.clip(img, 0, 1)
