"""64-bit DCT perceptual hash and Hamming-distance de-duplication."""
from __future__ import annotations

import cv2
import numpy as np
from scipy.fft import dctn

from ..imgcore.types import as_image

HASH_SIZE = 8
THUMB_SIZE = 32
_LUMA = np.array([0.299, 0.587, 0.114])


def phash(image) -> int:
    """Hash an RGB or gray float image.

    Area-resample the grayscale image to 32x32, take the 8x8 low-frequency
    DCT block and set one bit per coefficient above the block median.
    """
    arr = np.asarray(image, dtype=np.float64)
    gray = as_image(arr) @ _LUMA if arr.ndim == 3 else arr
    thumb = cv2.resize(gray.astype(np.float32), (THUMB_SIZE, THUMB_SIZE), interpolation=cv2.INTER_AREA)
    low = dctn(thumb.astype(np.float64), norm="ortho")[:HASH_SIZE, :HASH_SIZE]
    bits = (low > np.median(low)).ravel()
    return int(sum(1 << i for i, b in enumerate(bits) if b))


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def duplicate_clusters(ids: list[str], hashes: list[int], threshold: int = 4) -> list[list[str]]:
    """Group ids whose hashes are linked by chains of distance <= threshold."""
    n = len(ids)
    parent = list(range(n))
    arr = np.array(hashes, dtype=np.uint64)
    for i in range(n - 1):
        dist = np.bitwise_count(arr[i + 1 :] ^ arr[i])
        for j in np.flatnonzero(dist <= threshold) + i + 1:
            ri, rj = _find(parent, i), _find(parent, int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    clusters: dict[int, list[str]] = {}
    for i in range(n):
        clusters.setdefault(_find(parent, i), []).append(ids[i])
    return [sorted(c) for c in clusters.values()]
