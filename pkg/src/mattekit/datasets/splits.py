"""Seeded partitioning: background train/val splits, per-category tracks, background sampling."""
from __future__ import annotations

import logging
import zlib
from dataclasses import replace

import numpy as np

from ..errors import ParameterError, ValidationError
from .manifest import ManifestEntry, group_by_id

log = logging.getLogger(__name__)

_SPLIT_STREAM = 1
_TRACK_STREAM = 2
_BACKGROUND_STREAM = 3

COMP_TRACKS = {
    "COMP-COCO-style": ("coco", "plain"),
    "COMP-BG": ("bg20k", "plain"),
    "COMP-RSSN": ("bg20k", "rssn"),
}


def _rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), stream], spawn_key=key))


def split_backgrounds(entries: list[ManifestEntry], train: int = 15000, val: int = 5000, seed: int = 0) -> list[ManifestEntry]:
    """Seeded shuffle (over id order) then ``train`` / ``val`` partition.

    Entries beyond ``train + val`` are left out of the result.
    """
    if train < 0 or val < 0:
        raise ParameterError("split sizes must be non-negative")
    need = train + val
    if len(entries) < need:
        raise ValidationError(f"need {need} entries for a {train}/{val} split, have {len(entries)} (short by {need - len(entries)})")
    ordered = sorted(entries, key=lambda e: e.id)
    perm = _rng(seed, _SPLIT_STREAM).permutation(len(ordered))
    out = [replace(ordered[i], split="train") for i in perm[:train]]
    out += [replace(ordered[i], split="val") for i in perm[train:need]]
    if len(ordered) > need:
        log.info("split left %d entries unassigned", len(ordered) - need)
    return out


def train_count(n: int, train_fraction: float = 0.9) -> int:
    """Training share of an ``n``-image category (round half up, at least one of each)."""
    return min(n - 1, max(1, int(np.floor(train_fraction * n + 0.5))))


def make_tracks(entries: list[ManifestEntry], seed: int = 0, train_fraction: float = 0.9) -> dict[str, list[ManifestEntry]]:
    """Per-category seeded train/val split shared by the ORI track and the COMP tracks.

    Images already marked ``split="test"`` pass through unchanged into every
    track. COMP track entries additionally name a background source and a
    composition mode.
    """
    groups = group_by_id(entries)
    by_category: dict[str, list[str]] = {}
    assigned: dict[str, str] = {}
    for image_id, roles in groups.items():
        first = next(iter(roles.values()))
        if any(e.split == "test" for e in roles.values()):
            assigned[image_id] = "test"
            continue
        by_category.setdefault(first.category or "", []).append(image_id)

    for category in sorted(by_category):
        ids = sorted(by_category[category])
        if len(ids) < 2:
            raise ValidationError(f"category {category!r} has {len(ids)} image(s); at least 2 are needed")
        perm = _rng(seed, _TRACK_STREAM, zlib.crc32(category.encode("utf-8"))).permutation(len(ids))
        n_train = train_count(len(ids), train_fraction)
        for rank, idx in enumerate(perm):
            assigned[ids[idx]] = "train" if rank < n_train else "val"

    tracks: dict[str, list[ManifestEntry]] = {"ORI": []}
    tracks.update({name: [] for name in COMP_TRACKS})
    for image_id in sorted(groups):
        for role in sorted(groups[image_id]):
            entry = groups[image_id][role]
            split = assigned[image_id]
            tracks["ORI"].append(replace(entry, split=split, track="ORI"))
            for name, (source, mode) in COMP_TRACKS.items():
                tracks[name].append(replace(entry, split=split, track=name, background_source=source, composition=mode))
    return tracks


def sample_backgrounds(pool, n_foregrounds: int, K: int = 5, seed: int = 0) -> list[list[str]]:
    """``n_foregrounds`` rows of ``K`` distinct background ids.

    ``pool`` holds ids or manifest entries; it is de-duplicated and sorted
    before sampling so the table depends only on its contents and the seed.
    """
    ids = sorted({p.id if isinstance(p, ManifestEntry) else str(p) for p in pool})
    if K < 0:
        raise ParameterError("K must be non-negative")
    if len(ids) < K:
        raise ValidationError(f"need at least K={K} backgrounds, have {len(ids)}")
    table = []
    for i in range(n_foregrounds):
        picks = _rng(seed, _BACKGROUND_STREAM, i).choice(len(ids), size=K, replace=False)
        table.append([ids[j] for j in picks])
    return table
