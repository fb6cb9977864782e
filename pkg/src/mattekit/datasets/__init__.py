"""Dataset ingestion, de-duplication and track partitioning."""
from .ingest import FileError, dedup, hash_entries, ingest_backgrounds, normalized_size
from .manifest import ManifestEntry, read_manifest, write_manifest
from .phash import duplicate_clusters, hamming, phash
from .splits import make_tracks, sample_backgrounds, split_backgrounds

__all__ = [
    "FileError",
    "ManifestEntry",
    "dedup",
    "duplicate_clusters",
    "hamming",
    "hash_entries",
    "ingest_backgrounds",
    "make_tracks",
    "normalized_size",
    "phash",
    "read_manifest",
    "sample_backgrounds",
    "split_backgrounds",
    "write_manifest",
]
