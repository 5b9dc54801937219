"""Skeleton sequence <-> image transform.

Rows are time (row 0 is frame 0) and columns are joints in body-part order.
Channels hold x, y, z. Both axes are resized with align-corners linear
interpolation, so the first and last frames and the outermost joint columns
land exactly on the image borders.
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from PIL import Image

from .formats import SkeletonFormat, s2i_joint_order
from .ingest import SkeletonSequence

DEFAULT_SIZE = (224, 224)

F32_MAGIC = b"S2I1"
_F32_HEADER = struct.Struct("<4sII")


@lru_cache(maxsize=256)
def _weights(n_in: int, n_out: int) -> np.ndarray:
    """n_out x n_in matrix of align-corners linear interpolation weights."""
    if n_in < 1 or n_out < 1:
        raise ValueError("sizes must be >= 1")
    w = np.zeros((n_out, n_in))
    if n_in == 1:
        w[:, 0] = 1.0
    elif n_out == n_in:
        np.fill_diagonal(w, 1.0)
    elif n_out == 1:
        w[0, 0] = 1.0
    else:
        pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
        lo = np.minimum(np.floor(pos).astype(np.int64), n_in - 2)
        frac = pos - lo
        rows = np.arange(n_out)
        w[rows, lo] = 1.0 - frac
        w[rows, lo + 1] += frac
    w.flags.writeable = False
    return w


def resize_linear(grid: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Separable align-corners resize of an (A, B, C) array to (size[0], size[1], C).

    A single sample along an axis is extended as a constant.
    """
    a, b, c = grid.shape
    h, w = size
    if (a, b) == (h, w):
        return np.array(grid, dtype=np.float64)
    rows = _weights(a, h) @ grid.reshape(a, b * c)
    rows = rows.reshape(h, b, c).transpose(0, 2, 1)
    return np.ascontiguousarray((rows @ _weights(b, w).T).transpose(0, 2, 1))


@dataclass(frozen=True)
class ImageMeta:
    original_T: int
    original_J: int
    format_id: str
    joint_order: tuple[int, ...]
    sample_id: str = ""
    stream: str = "joint"
    normalized: bool = False


@dataclass(frozen=True, eq=False)
class S2IImage:
    pixels: np.ndarray
    meta: ImageMeta

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"pixels must be H x W x 3, got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channel_affine(self) -> list[tuple[float, float]]:
        return channel_affine(self.pixels)


def encode(seq: SkeletonSequence, fmt: SkeletonFormat,
           target: tuple[int, int] = DEFAULT_SIZE, stream: str = "joint") -> S2IImage:
    """Reorder joints by body part, stack over time, and resize to ``target``."""
    if seq.num_joints != fmt.num_joints:
        raise ValueError(
            f"sequence has {seq.num_joints} joints, format {fmt.format_id!r} needs "
            f"{fmt.num_joints}")
    order = s2i_joint_order(fmt)
    pixels = resize_linear(seq.frames[:, order, :], target)
    meta = ImageMeta(seq.num_frames, seq.num_joints, fmt.format_id, tuple(order),
                     seq.sample_id, stream)
    return S2IImage(pixels, meta)


def decode(img: S2IImage, target_T: int | None = None,
           target_J: int | None = None) -> SkeletonSequence:
    """Resample back to T x J and undo the joint permutation.

    Defaults to the sequence size recorded at encode time. The four corner
    samples always come back exactly; interior samples are exact only when
    the original knots fall on pixel centers. If ``target_J`` differs from
    the encoded joint count the permutation cannot be undone and joints stay
    in image column order.
    """
    T = img.meta.original_T if target_T is None else target_T
    J = img.meta.original_J if target_J is None else target_J
    grid = resize_linear(img.pixels.astype(np.float64), (T, J))
    order = list(img.meta.joint_order)
    if J != len(order):
        return SkeletonSequence(img.meta.format_id, grid, sample_id=img.meta.sample_id)
    frames = np.empty_like(grid)
    frames[:, order, :] = grid
    return SkeletonSequence(img.meta.format_id, frames, sample_id=img.meta.sample_id)


# ---------------------------------------------------------------------------
# export

def channel_affine(pixels: np.ndarray) -> list[tuple[float, float]]:
    """Per-channel (scale, offset) with value = offset + scale * byte.

    A constant channel gets scale 0 and is stored as byte 128.
    """
    out = []
    for c in range(pixels.shape[2]):
        lo, hi = float(pixels[..., c].min()), float(pixels[..., c].max())
        out.append(((hi - lo) / 255.0, lo))
    return out


def sidecar(img: S2IImage, mode: str, affine: list[tuple[float, float]] | None = None) -> dict:
    m = img.meta
    return {
        "sample_id": m.sample_id,
        "format_id": m.format_id,
        "original_T": m.original_T,
        "original_J": m.original_J,
        "channel_affine": [list(a) for a in (affine or img.channel_affine)],
        "joint_order": list(m.joint_order),
        "height": img.height,
        "width": img.width,
        "mode": mode,
        "stream": m.stream,
        "normalized": m.normalized,
    }


def meta_from_sidecar(doc: dict) -> ImageMeta:
    return ImageMeta(
        original_T=int(doc["original_T"]),
        original_J=int(doc["original_J"]),
        format_id=doc["format_id"],
        joint_order=tuple(int(i) for i in doc["joint_order"]),
        sample_id=doc.get("sample_id", ""),
        stream=doc.get("stream", "joint"),
        normalized=bool(doc.get("normalized", False)),
    )


def export(img: S2IImage, mode: str = "f32raw") -> tuple[bytes, dict]:
    """Serialize to ``f32raw`` or ``png8`` bytes plus a sidecar dict."""
    if mode == "f32raw":
        h, w = img.height, img.width
        body = np.ascontiguousarray(img.pixels, dtype="<f4").tobytes()
        return _F32_HEADER.pack(F32_MAGIC, h, w) + body, sidecar(img, mode)
    if mode == "png8":
        affine = img.channel_affine
        px = np.empty(img.pixels.shape, dtype=np.uint8)
        for c, (scale, offset) in enumerate(affine):
            if scale == 0.0:
                px[..., c] = 128
            else:
                q = np.rint((img.pixels[..., c] - offset) / scale)
                px[..., c] = np.clip(q, 0, 255).astype(np.uint8)
        buf = io.BytesIO()
        Image.fromarray(px).save(buf, format="PNG")
        return buf.getvalue(), sidecar(img, mode, affine)
    raise ValueError(f"unknown export mode {mode!r}")


def read_f32raw(data: bytes) -> np.ndarray:
    if len(data) < _F32_HEADER.size:
        raise ValueError("f32raw payload too short for header")
    magic, h, w = _F32_HEADER.unpack_from(data)
    if magic != F32_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    expected = _F32_HEADER.size + h * w * 3 * 4
    if len(data) != expected:
        raise ValueError(f"f32raw payload is {len(data)} bytes, header implies {expected}")
    return np.frombuffer(data, dtype="<f4", offset=_F32_HEADER.size).reshape(h, w, 3).copy()


def read_png8(data: bytes, affine) -> np.ndarray:
    px = np.asarray(Image.open(io.BytesIO(data)).convert("RGB"), dtype=np.float64)
    out = np.empty_like(px)
    for c, (scale, offset) in enumerate(affine):
        out[..., c] = offset if scale == 0.0 else offset + scale * px[..., c]
    return out


def import_image(data: bytes, doc: dict) -> S2IImage:
    """Inverse of :func:`export`, given the payload and its sidecar."""
    mode = doc.get("mode") or ("f32raw" if data[:4] == F32_MAGIC else "png8")
    if mode == "f32raw":
        pixels = read_f32raw(data)
    elif mode == "png8":
        pixels = read_png8(data, doc["channel_affine"])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return S2IImage(pixels, meta_from_sidecar(doc))


def dumps_sidecar(doc: dict) -> str:
    return json.dumps(doc, indent=1) + "\n"


def with_pixels(img: S2IImage, pixels: np.ndarray, **meta_changes) -> S2IImage:
    return S2IImage(pixels, replace(img.meta, **meta_changes))


def validate_sidecar(doc: dict, payload: bytes | None = None) -> list[str]:
    """Return every invariant violation found in a sidecar (and its payload, if given)."""
    problems = []
    required = ("sample_id", "format_id", "original_T", "original_J", "channel_affine",
                "joint_order")
    missing = [k for k in required if k not in doc]
    if missing:
        return [f"missing fields: {', '.join(missing)}"]
    T, J = doc["original_T"], doc["original_J"]
    if not isinstance(T, int) or T < 1:
        problems.append(f"original_T must be a positive integer, got {T!r}")
    if not isinstance(J, int) or J < 1:
        problems.append(f"original_J must be a positive integer, got {J!r}")
    order = doc["joint_order"]
    if not isinstance(order, list) or sorted(order) != list(range(len(order))):
        problems.append("joint_order is not a permutation of 0..J-1")
    elif isinstance(J, int) and len(order) != J:
        problems.append(f"joint_order has {len(order)} entries, original_J is {J}")
    affine = doc["channel_affine"]
    if (not isinstance(affine, list) or len(affine) != 3
            or not all(isinstance(a, list) and len(a) == 2 for a in affine)):
        problems.append("channel_affine must be three [scale, offset] pairs")
    elif not all(np.isfinite(v) for a in affine for v in a) or any(a[0] < 0 for a in affine):
        problems.append("channel_affine has a negative scale or non-finite value")
    if payload is not None:
        mode = doc.get("mode") or ("f32raw" if payload[:4] == F32_MAGIC else "png8")
        try:
            px = read_f32raw(payload) if mode == "f32raw" else \
                np.asarray(Image.open(io.BytesIO(payload)))
        except Exception as e:
            problems.append(f"payload unreadable: {e}")
        else:
            shape = (doc.get("height"), doc.get("width"))
            if shape != (None, None) and tuple(px.shape[:2]) != shape:
                problems.append(f"payload is {px.shape[0]}x{px.shape[1]}, sidecar says "
                                f"{shape[0]}x{shape[1]}")
            if mode == "f32raw" and not np.all(np.isfinite(px)):
                problems.append("payload contains non-finite pixels")
    return problems
