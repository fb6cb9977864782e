"""Background ingestion: resolution filter, shortest-side normalisation, de-duplication."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..errors import ParameterError
from ..imgcore.io import list_images, read_image, write_image
from ..imgcore.resize import resize
from .manifest import ManifestEntry
from .phash import duplicate_clusters, phash

log = logging.getLogger(__name__)

MIN_SIDE = 1080


@dataclass
class FileError:
    path: str
    error: str

    def as_record(self) -> dict:
        return {"path": self.path, "error": self.error}


def normalized_size(width: int, height: int, short_side: int = MIN_SIDE) -> tuple[int, int]:
    """Scale so the shorter side equals ``short_side``; the longer side rounds half away from zero."""
    if width <= height:
        return short_side, (2 * height * short_side + width) // (2 * width)
    return (2 * width * short_side + height) // (2 * height), short_side


def _ingest_one(args):
    path, out_dir, min_side = args
    try:
        img = read_image(path)
    except Exception as exc:  # noqa: BLE001 - reported per file
        return None, FileError(str(path), f"{type(exc).__name__}: {exc}")
    h, w = img.shape[:2]
    if min(w, h) < min_side:
        return None, FileError(str(path), f"rejected: shortest side {min(w, h)} < {min_side}")
    nw, nh = normalized_size(w, h, min_side)
    out_path = Path(out_dir) / f"{path.stem}.png"
    write_image(out_path, resize(img, nw, nh))
    return ManifestEntry(id=path.stem, role="background", path=str(out_path), width=nw, height=nh), None


def ingest_backgrounds(directory, out_dir, min_side: int = MIN_SIDE, workers: int = 1):
    """Accept images whose shortest side is at least ``min_side`` and resize them to it.

    Returns ``(entries, errors)``; rejected or unreadable files become errors.
    """
    if min_side < 1:
        raise ParameterError("min_side must be >= 1")
    jobs = [(p, out_dir, min_side) for p in list_images(directory)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_ingest_one, jobs))
    else:
        results = [_ingest_one(j) for j in jobs]
    entries = [e for e, _ in results if e is not None]
    errors = [err for _, err in results if err is not None]
    for err in errors:
        log.info("ingest: %s: %s", err.path, err.error)
    return entries, errors


def _hash_file(path: str) -> int:
    return phash(read_image(path))


def hash_entries(entries: list[ManifestEntry], workers: int = 1) -> dict[str, int]:
    paths = [e.path for e in entries]
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hashes = list(pool.map(_hash_file, paths))
    else:
        hashes = [_hash_file(p) for p in paths]
    return {e.id: h for e, h in zip(entries, hashes)}


def dedup(
    entries: list[ManifestEntry],
    hamming_threshold: int = 4,
    hashes: dict[str, int] | None = None,
    workers: int = 1,
) -> list[ManifestEntry]:
    """Drop near-duplicates, keeping the smallest id of every cluster.

    Clusters are the transitive closure of "within ``hamming_threshold``",
    so no two survivors are near-duplicates and the operation is idempotent.
    """
    if not entries:
        return []
    if hashes is None:
        hashes = hash_entries(entries, workers)
    ordered = sorted(entries, key=lambda e: e.id)
    ids = [e.id for e in ordered]
    clusters = duplicate_clusters(ids, [hashes[i] for i in ids], hamming_threshold)
    keep = {c[0] for c in clusters}
    for c in clusters:
        if len(c) > 1:
            log.info("dedup: keeping %s, dropping %s", c[0], ", ".join(c[1:]))
    return [e for e in ordered if e.id in keep]
