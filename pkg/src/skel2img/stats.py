"""Per-channel normalization statistics over a corpus of S2I images.

Statistics are population mean and standard deviation over every pixel of
every image. Accumulation is single-pass per image and shards combine with
the pairwise (Chan et al.) merge, so a corpus can be split, accumulated in
any order, and merged.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoder import S2IImage, with_pixels


@dataclass(frozen=True, eq=False)
class ChannelStats:
    count: int = 0
    mean: np.ndarray = field(default_factory=lambda: np.zeros(3))
    m2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    source_ids: tuple[str, ...] = ()

    @property
    def var(self) -> np.ndarray:
        if self.count < 1:
            raise ValueError("no pixels accumulated")
        return self.m2 / self.count

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.var)

    def to_dict(self) -> dict:
        return {
            "count": int(self.count),
            "mean": self.mean.tolist(),
            "std": self.std.tolist() if self.count else [0.0, 0.0, 0.0],
            "m2": self.m2.tolist(),
            "source_ids": list(self.source_ids),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelStats":
        count = int(doc["count"])
        mean = np.asarray(doc["mean"], dtype=np.float64)
        if "m2" in doc:
            m2 = np.asarray(doc["m2"], dtype=np.float64)
        else:
            m2 = np.asarray(doc["std"], dtype=np.float64) ** 2 * count
        if count < 0 or mean.shape != (3,) or m2.shape != (3,) or np.any(m2 < 0):
            raise ValueError("malformed stats document")
        return cls(count, mean, m2, tuple(doc.get("source_ids", ())))


def merge(a: ChannelStats, b: ChannelStats) -> ChannelStats:
    if b.count == 0:
        return ChannelStats(a.count, a.mean.copy(), a.m2.copy(), a.source_ids + b.source_ids)
    if a.count == 0:
        return ChannelStats(b.count, b.mean.copy(), b.m2.copy(), a.source_ids + b.source_ids)
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n)
    return ChannelStats(n, mean, m2, a.source_ids + b.source_ids)


def image_stats(img: S2IImage | np.ndarray, source_id: str | None = None) -> ChannelStats:
    px = np.asarray(getattr(img, "pixels", img), dtype=np.float64).reshape(-1, 3)
    mean = px.mean(axis=0)
    m2 = ((px - mean) ** 2).sum(axis=0)
    ids = (source_id,) if source_id else ()
    return ChannelStats(px.shape[0], mean, m2, ids)


def accumulate(stats: ChannelStats, img: S2IImage | np.ndarray,
               source_id: str | None = None) -> ChannelStats:
    """Fold one image's pixels into ``stats``."""
    return merge(stats, image_stats(img, source_id))


def normalize(img: S2IImage, stats: ChannelStats) -> S2IImage:
    """Per-channel (pixel - mean) / std."""
    std = stats.std
    if np.any(std <= 0):
        raise ValueError(f"cannot normalize with zero std in channels "
                         f"{np.flatnonzero(std <= 0).tolist()}")
    return with_pixels(img, (img.pixels - stats.mean) / std, normalized=True)


def denormalize(img: S2IImage, stats: ChannelStats) -> S2IImage:
    return with_pixels(img, img.pixels * stats.std + stats.mean, normalized=False)


def save_stats(stats: ChannelStats, path: str | Path) -> None:
    Path(path).write_text(json.dumps(stats.to_dict(), indent=1) + "\n")


def load_stats(path: str | Path) -> ChannelStats:
    return ChannelStats.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# manifests

@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    path: Path
    format_id: str
    stream: str = "joint"
    label: int | None = None


@dataclass(frozen=True)
class DatasetManifest:
    manifest_id: str
    entries: tuple[ManifestEntry, ...]


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read a JSON-lines manifest.

    An optional first record ``{"manifest_id": ...}`` names the manifest
    (default: file stem). Relative paths resolve against the manifest's
    directory.
    """
    path = Path(path)
    manifest_id = path.stem
    entries = []
    seen = set()
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if set(rec) == {"manifest_id"}:
            manifest_id = rec["manifest_id"]
            continue
        try:
            entry = ManifestEntry(rec["sample_id"], path.parent / rec["path"],
                                  rec["format_id"], rec.get("stream", "joint"), rec.get("label"))
        except KeyError as e:
            raise ValueError(f"{path}:{lineno}: missing field {e}") from None
        if entry.sample_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate sample_id {entry.sample_id!r}")
        seen.add(entry.sample_id)
        entries.append(entry)
    return DatasetManifest(manifest_id, tuple(entries))
