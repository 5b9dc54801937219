"""Batch encoding: parse -> split -> translate -> stream -> encode -> normalize -> export."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .encoder import DEFAULT_SIZE, S2IImage, dumps_sidecar, encode, export, import_image
from .formats import SkeletonFormat, resolve_format
from .ingest import SkeletonSequence, load_sequence
from .stats import ChannelStats, accumulate, load_manifest, load_stats, merge, normalize
from .streams import derive_stream

log = logging.getLogger(__name__)

EXTENSIONS = {"f32raw": ".s2i", "png8": ".png"}


@dataclass
class JobSpec:
    inputs: list[Path] = field(default_factory=list)
    format: str | None = None
    stream: str = "joint"
    size: tuple[int, int] = DEFAULT_SIZE
    normalize: Path | None = None
    out_dir: Path = Path(".")
    mode: str = "f32raw"
    jobs: int = 1
    seed: int = 0
    keep_zero_frames: bool = False
    translate: bool = True
    fail_fast: bool = False

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.mode not in EXTENSIONS:
            raise ValueError(f"unknown export mode {self.mode!r}")


@dataclass
class FileResult:
    path: Path
    outputs: tuple[Path, ...] = ()
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def write_atomic(path: Path, data: bytes | str) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(payload: Path) -> Path:
    return payload.with_suffix(".json")


def read_image_file(path: str | Path) -> S2IImage:
    path = Path(path)
    doc = json.loads(sidecar_path(path).read_text())
    return import_image(path.read_bytes(), doc)


def infer_format(path: Path, requested: str | None) -> SkeletonFormat:
    if requested:
        return resolve_format(requested)
    if path.suffix == ".skeleton":
        return resolve_format("ntu25")
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if isinstance(doc, dict) and isinstance(doc.get("format_id"), str):
            return resolve_format(doc["format_id"])
    raise ValueError(f"{path}: cannot infer the skeleton format; pass --format")


def image_for_sequence(seq: SkeletonSequence, fmt: SkeletonFormat, stream: str = "joint",
                       size: tuple[int, int] = DEFAULT_SIZE,
                       stats: ChannelStats | None = None) -> S2IImage:
    img = encode(derive_stream(seq, fmt, stream), fmt, size, stream)
    return normalize(img, stats) if stats is not None else img


def encode_file(path: Path, spec: JobSpec, stats: ChannelStats | None = None) -> S2IImage:
    fmt = infer_format(path, spec.format)
    seq = load_sequence(path, fmt, spec.keep_zero_frames, spec.translate)
    return image_for_sequence(seq, fmt, spec.stream, spec.size, stats)


def _run_one(path: Path, spec: JobSpec, stats: ChannelStats | None) -> FileResult:
    try:
        img = encode_file(path, spec, stats)
        data, doc = export(img, spec.mode)
        name = img.meta.sample_id or path.stem
        out = spec.out_dir / f"{name}{EXTENSIONS[spec.mode]}"
        write_atomic(out, data)
        write_atomic(sidecar_path(out), dumps_sidecar(doc))
        return FileResult(path, (out, sidecar_path(out)))
    except Exception as e:  # per-file isolation: report, don't abort the batch
        return FileResult(path, error=f"{type(e).__name__}: {e}")


def run_encode(spec: JobSpec) -> list[FileResult]:
    """Encode every input; results come back in input order."""
    stats = load_stats(spec.normalize) if spec.normalize else None
    if spec.format:
        resolve_format(spec.format)  # fail early on an unknown format
    results: list[FileResult] = []
    if spec.jobs == 1 or spec.fail_fast:
        for path in spec.inputs:
            r = _run_one(Path(path), spec, stats)
            results.append(r)
            _log(r)
            if spec.fail_fast and not r.ok:
                break
        return results
    with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
        futures = [pool.submit(_run_one, Path(p), spec, stats) for p in spec.inputs]
        for fut in futures:
            r = fut.result()
            results.append(r)
            _log(r)
    return results


def _log(r: FileResult) -> None:
    if r.ok:
        log.info("encoded %s -> %s", r.path, r.outputs[0])
    else:
        log.error("failed %s: %s", r.path, r.error)


def encode_many(seqs: Iterable[SkeletonSequence], fmt: SkeletonFormat,
                size: tuple[int, int] = DEFAULT_SIZE, stream: str = "joint",
                jobs: int = 1, chunk: int = 64) -> Iterator[S2IImage]:
    """Lazily encode sequences in order, ``jobs`` threads at a time.

    Sequences are consumed ``chunk * jobs`` at a time so memory stays bounded.
    """
    def one(seq):
        return image_for_sequence(seq, fmt, stream, size)

    it = iter(seqs)
    if jobs == 1:
        for seq in it:
            yield one(seq)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        while True:
            batch = [s for _, s in zip(range(chunk * jobs), it)]
            if not batch:
                return
            yield from pool.map(one, batch)


def stats_for_manifests(manifests: list[Path], spec: JobSpec) -> ChannelStats:
    """Accumulate channel statistics over every entry of every manifest.

    Entries pointing at exported images (``.s2i`` / ``.png`` with a sidecar)
    are read directly; anything else is parsed and encoded with ``spec``.
    """
    total = ChannelStats()
    for mpath in manifests:
        manifest = load_manifest(mpath)
        shard = ChannelStats()
        for entry in manifest.entries:
            if entry.path.suffix in (".s2i", ".png"):
                img = read_image_file(entry.path)
            else:
                fmt = resolve_format(entry.format_id)
                seq = load_sequence(entry.path, fmt, spec.keep_zero_frames, spec.translate)
                img = image_for_sequence(seq, fmt, entry.stream, spec.size)
            shard = accumulate(shard, img)
        total = merge(total, ChannelStats(shard.count, shard.mean, shard.m2,
                                          (manifest.manifest_id,)))
    return total

