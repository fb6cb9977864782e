"""PNG / JPEG reading and writing in unit-interval float form."""
from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from ..errors import ValidationError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

TRIMAP_BG, TRIMAP_TRANSITION, TRIMAP_FG = 0, 128, 255


def _read_raw(path, flags: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    data = np.fromfile(str(path), dtype=np.uint8)
    arr = cv2.imdecode(data, flags)
    if arr is None:
        raise ValidationError(f"unable to decode image: {path}")
    return arr


def _to_unit(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / 65535.0
    raise ValidationError(f"unsupported pixel type {arr.dtype}")


def read_image(path) -> np.ndarray:
    """Read an RGB image as float64 (H, W, 3)."""
    arr = _read_raw(path, cv2.IMREAD_UNCHANGED)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    elif arr.shape[2] == 4:
        arr = cv2.cvtColor(arr, cv2.COLOR_BGRA2RGB)
    else:
        arr = cv2.cvtColor(arr, cv2.COLOR_BGR2RGB)
    return _to_unit(arr)


def read_gray(path) -> np.ndarray:
    """Read a single-channel image (matte) as float64 (H, W)."""
    arr = _read_raw(path, cv2.IMREAD_UNCHANGED)
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[..., 3]
        else:
            arr = cv2.cvtColor(arr, cv2.COLOR_BGR2GRAY)
    return _to_unit(arr)


def read_gray_u8(path) -> np.ndarray:
    arr = _read_raw(path, cv2.IMREAD_GRAYSCALE)
    return arr


def image_size(path) -> tuple[int, int]:
    """Return ``(width, height)`` without caring about the channel layout."""
    arr = _read_raw(path, cv2.IMREAD_UNCHANGED)
    return int(arr.shape[1]), int(arr.shape[0])


def quantize(arr: np.ndarray, bits: int = 8) -> np.ndarray:
    scale, dtype = (255.0, np.uint8) if bits == 8 else (65535.0, np.uint16)
    return np.round(np.clip(arr, 0.0, 1.0) * scale).astype(dtype)


def _write(path, arr: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ok, buf = cv2.imencode(".png", arr)
    if not ok:
        raise ValidationError(f"failed to encode {path}")
    buf.tofile(str(path))
    return path


def write_image(path, img: np.ndarray) -> Path:
    """Write an RGB float image as 8-bit PNG."""
    return _write(path, cv2.cvtColor(quantize(img, 8), cv2.COLOR_RGB2BGR))


def write_gray(path, alpha: np.ndarray, bits: int = 8) -> Path:
    """Write a matte as 8- or 16-bit grayscale PNG."""
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    return _write(path, quantize(alpha, bits))


def write_mask(path, mask: np.ndarray) -> Path:
    return _write(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def write_u8(path, arr: np.ndarray) -> Path:
    return _write(path, np.asarray(arr, dtype=np.uint8))


def list_images(directory) -> list[Path]:
    directory = Path(directory)
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
