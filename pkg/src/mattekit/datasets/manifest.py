"""Line-delimited JSON manifests, one entry per line in a fixed field order."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable

from ..errors import ValidationError

ROLES = ("original", "foreground", "alpha", "background")
SPLITS = ("train", "val", "test")
TRACKS = ("ORI", "COMP-COCO-style", "COMP-BG", "COMP-RSSN")


@dataclass
class ManifestEntry:
    id: str
    role: str
    path: str
    width: int
    height: int
    category: str | None = None
    split: str | None = None
    track: str | None = None
    background_source: str | None = None
    composition: str | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValidationError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.split is not None and self.split not in SPLITS:
            raise ValidationError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.track is not None and self.track not in TRACKS:
            raise ValidationError(f"track must be one of {TRACKS}, got {self.track!r}")
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"entry {self.id!r} has non-positive size")

    @property
    def short_side(self) -> int:
        return min(self.width, self.height)


FIELD_ORDER = tuple(f.name for f in fields(ManifestEntry))


def entry_to_json(entry: ManifestEntry) -> str:
    return json.dumps(asdict(entry), ensure_ascii=False)


def write_manifest(path, entries: Iterable[ManifestEntry]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for entry in entries:
            fh.write(entry_to_json(entry) + "\n")
    return path


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                entries.append(ManifestEntry(**{k: record.get(k) for k in FIELD_ORDER if k in record}))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad manifest record ({exc})") from exc
    return entries


def group_by_id(entries: Iterable[ManifestEntry]) -> dict[str, dict[str, ManifestEntry]]:
    """``{id: {role: entry}}`` preserving first-seen id order."""
    groups: dict[str, dict[str, ManifestEntry]] = {}
    for e in entries:
        groups.setdefault(e.id, {})[e.role] = e
    return groups
