"""Reading raw skeleton files and the preprocessing applied before encoding."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .formats import SkeletonFormat

NTU_BODY_FIELDS = 10
NTU_JOINT_FIELDS = 12


class ParseError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class SkeletonSequence:
    """T x J x 3 joint coordinates for one subject stream.

    ``body_track`` labels the source body of every frame, which records how
    multi-person frames were split.
    """

    format_id: str
    frames: np.ndarray
    body_track: tuple[str, ...] = ()
    sample_id: str = ""

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise ValueError(f"frames must be T x J x 3, got shape {frames.shape}")
        if frames.shape[0] < 1 or frames.shape[1] < 1:
            raise ValueError("sequence needs at least one frame and one joint")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames contain non-finite coordinates")
        object.__setattr__(self, "frames", frames)
        track = tuple(self.body_track) or ("0",) * frames.shape[0]
        if len(track) != frames.shape[0]:
            raise ValueError("body_track length must equal the number of frames")
        object.__setattr__(self, "body_track", track)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_joints(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames: np.ndarray) -> "SkeletonSequence":
        return replace(self, frames=frames)


@dataclass(eq=False)
class RawBodyFrame:
    """One body in one frame of an NTU file.

    ``extra`` keeps the nine per-joint fields after x y z (depth, color,
    orientation, tracking state); ``info`` keeps the nine body-info fields
    after the body id. Neither is used downstream.
    """

    body_id: str
    joints: np.ndarray
    extra: np.ndarray = field(default_factory=lambda: np.zeros((0, 9)))
    info: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# NTU .skeleton

def _as_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str):
        return source
    if isinstance(source, Path):
        return source.read_text()
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what: str) -> tuple[list[str], int]:
        if self.pos >= len(self.lines):
            raise ParseError(f"unexpected end of file, expected {what}", self.pos + 1)
        self.pos += 1
        return self.lines[self.pos - 1].split(), self.pos

    def count(self, what: str) -> int:
        tokens, line = self.next(what)
        if len(tokens) != 1:
            raise ParseError(f"expected a single {what}, got {len(tokens)} tokens", line)
        try:
            value = int(tokens[0])
        except ValueError:
            raise ParseError(f"non-numeric {what} {tokens[0]!r}", line) from None
        if value < 0:
            raise ParseError(f"negative {what} {value}", line)
        return value

    def remaining(self) -> list[int]:
        return [i + 1 for i in range(self.pos, len(self.lines)) if self.lines[i].strip()]


def _floats(tokens: list[str], line: int) -> list[float]:
    out = []
    for tok in tokens:
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"non-numeric token {tok!r}", line) from None
    return out


def parse_ntu_skeleton(source: bytes | str | IO | Path) -> list[list[RawBodyFrame]]:
    """Parse an NTU RGB+D ``.skeleton`` file into per-frame body lists.

    Raises ParseError with the offending line on truncation, count
    mismatches, or non-numeric tokens.
    """
    lines = _Lines(_as_text(source))
    n_frames = lines.count("frame count")
    frames: list[list[RawBodyFrame]] = []
    for _ in range(n_frames):
        n_bodies = lines.count("body count")
        bodies = []
        for _ in range(n_bodies):
            info, line = lines.next("body info line")
            if len(info) != NTU_BODY_FIELDS:
                raise ParseError(
                    f"body info needs {NTU_BODY_FIELDS} fields, got {len(info)}", line)
            _floats(info[1:], line)
            n_joints = lines.count("joint count")
            rows = np.empty((n_joints, NTU_JOINT_FIELDS))
            for j in range(n_joints):
                tokens, line = lines.next(f"joint line {j + 1} of {n_joints}")
                if len(tokens) != NTU_JOINT_FIELDS:
                    raise ParseError(
                        f"joint line needs {NTU_JOINT_FIELDS} fields, got {len(tokens)}", line)
                rows[j] = _floats(tokens, line)
            if not np.all(np.isfinite(rows[:, :3])):
                raise ParseError("non-finite joint coordinate", line)
            bodies.append(RawBodyFrame(info[0], rows[:, :3].copy(), rows[:, 3:].copy(),
                                       tuple(info[1:])))
        frames.append(bodies)
    trailing = lines.remaining()
    if trailing:
        raise ParseError(
            f"file declares {n_frames} frames but has data after the last one", trailing[0])
    return frames


def format_ntu_skeleton(frames: Sequence[Sequence[RawBodyFrame]]) -> str:
    """Write frames back in the NTU text layout (used to build fixtures)."""
    out = io.StringIO()
    out.write(f"{len(frames)}\n")
    for bodies in frames:
        out.write(f"{len(bodies)}\n")
        for body in bodies:
            info = body.info or ("0",) * (NTU_BODY_FIELDS - 1)
            out.write(" ".join((body.body_id, *info)) + "\n")
            out.write(f"{len(body.joints)}\n")
            extra = body.extra if len(body.extra) == len(body.joints) else \
                np.zeros((len(body.joints), NTU_JOINT_FIELDS - 3))
            for xyz, rest in zip(body.joints, extra):
                vals = [repr(float(v)) for v in xyz] + [repr(float(v)) for v in rest[:-1]]
                vals.append(str(int(rest[-1])))
                out.write(" ".join(vals) + "\n")
    return out.getvalue()


def _body_key(body_id: str):
    try:
        return (0, int(body_id), body_id)
    except ValueError:
        return (1, 0, body_id)


def split_bodies(frames: Sequence[Sequence[RawBodyFrame]], format_id: str = "ntu25",
                 sample_id: str = "") -> SkeletonSequence:
    """Flatten multi-person frames into one single-body sequence.

    A frame with two bodies becomes two consecutive frames, lower body id
    first. Frames with no body are skipped.
    """
    coords, track = [], []
    for t, bodies in enumerate(frames):
        if len(bodies) > 2:
            raise ValueError(f"frame {t} has {len(bodies)} bodies; at most 2 are supported")
        for body in sorted(bodies, key=lambda b: _body_key(b.body_id)):
            coords.append(np.asarray(body.joints, dtype=np.float64))
            track.append(body.body_id)
    if not coords:
        raise ValueError("no bodies in any frame")
    shapes = {c.shape for c in coords}
    if len(shapes) != 1:
        raise ValueError(f"bodies disagree on joint count: {sorted(shapes)}")
    return SkeletonSequence(format_id, np.stack(coords), tuple(track), sample_id)


def drop_zero_frames(seq: SkeletonSequence) -> SkeletonSequence:
    """Remove frames whose coordinates are all exactly zero."""
    keep = np.any(seq.frames != 0.0, axis=(1, 2))
    if keep.all():
        return seq
    if not keep.any():
        raise ValueError(f"sample {seq.sample_id!r}: every frame is all zeros")
    track = tuple(b for b, k in zip(seq.body_track, keep) if k)
    return replace(seq, frames=seq.frames[keep], body_track=track)


def reference_position(frame: np.ndarray, fmt: SkeletonFormat) -> np.ndarray:
    """Reference joint of one J x 3 frame (midpoint when the format names two joints)."""
    ref = list(fmt.reference)
    if len(ref) == 1:
        return frame[ref[0]].copy()
    return 0.5 * (frame[ref[0]] + frame[ref[1]])


def translate_by_first_frame(seq: SkeletonSequence, fmt: SkeletonFormat) -> SkeletonSequence:
    """Shift the whole sequence so the first frame's reference position is the origin."""
    _check_joints(seq, fmt)
    r = reference_position(seq.frames[0], fmt)
    return seq.with_frames(seq.frames - r)


def _check_joints(seq: SkeletonSequence, fmt: SkeletonFormat) -> None:
    if seq.num_joints != fmt.num_joints:
        raise ValueError(
            f"sequence has {seq.num_joints} joints, format {fmt.format_id!r} needs "
            f"{fmt.num_joints}")


def load_ntu_sequence(source, fmt: SkeletonFormat, sample_id: str = "",
                      keep_zero_frames: bool = False, translate: bool = True) -> SkeletonSequence:
    """Parse, split, drop all-zero frames, translate."""
    seq = split_bodies(parse_ntu_skeleton(source), fmt.format_id, sample_id)
    _check_joints(seq, fmt)
    if not keep_zero_frames:
        seq = drop_zero_frames(seq)
    if translate:
        seq = translate_by_first_frame(seq, fmt)
    return seq


# ---------------------------------------------------------------------------
# generic interchange JSON

def parse_generic_json(source: bytes | str | IO | Path, fmt: SkeletonFormat) -> SkeletonSequence:
    """Read ``{sample_id, format_id, frames, bodies?}`` and bind it to ``fmt``."""
    try:
        doc = json.loads(_as_text(source))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    for key in ("sample_id", "format_id", "frames"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    if not isinstance(doc["sample_id"], str) or not isinstance(doc["format_id"], str):
        raise ParseError("sample_id and format_id must be strings")
    if doc["format_id"] != fmt.format_id:
        raise ParseError(
            f"document is in format {doc['format_id']!r}, expected {fmt.format_id!r}")
    frames = doc["frames"]
    if not isinstance(frames, list) or not frames:
        raise ParseError("frames must be a non-empty array")
    J = fmt.num_joints
    out = np.empty((len(frames), J, 3))
    for t, frame in enumerate(frames):
        if not isinstance(frame, list):
            raise ParseError(f"frame {t} is not an array")
        if len(frame) != J:
            raise ParseError(
                f"frame {t} has {len(frame)} joints, format {fmt.format_id!r} needs {J}")
        for j, xyz in enumerate(frame):
            if (not isinstance(xyz, list) or len(xyz) != 3
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               for v in xyz)):
                raise ParseError(f"frame {t} joint {j}: expected [x, y, z] numbers")
            if not all(math.isfinite(v) for v in xyz):
                raise ParseError(f"frame {t} joint {j}: non-finite coordinate")
            out[t, j] = xyz
    bodies = doc.get("bodies")
    if bodies is not None:
        if not isinstance(bodies, list) or len(bodies) != len(frames) or \
                not all(isinstance(b, str) for b in bodies):
            raise ParseError("bodies must be one string label per frame")
        bodies = tuple(bodies)
    return SkeletonSequence(fmt.format_id, out, bodies or (), doc["sample_id"])


def serialize_generic_json(seq: SkeletonSequence) -> str:
    doc = {
        "sample_id": seq.sample_id,
        "format_id": seq.format_id,
        "frames": seq.frames.tolist(),
        "bodies": list(seq.body_track),
    }
    return json.dumps(doc)


def load_sequence(path: str | Path, fmt: SkeletonFormat, keep_zero_frames: bool = False,
                  translate: bool = True) -> SkeletonSequence:
    """Read a ``.skeleton`` or generic ``.json`` file and preprocess it."""
    path = Path(path)
    if path.suffix == ".skeleton":
        return load_ntu_sequence(path.read_bytes(), fmt, path.stem, keep_zero_frames, translate)
    seq = parse_generic_json(path.read_bytes(), fmt)
    if not seq.sample_id:
        seq = replace(seq, sample_id=path.stem)
    if not keep_zero_frames:
        seq = drop_zero_frames(seq)
    if translate:
        seq = translate_by_first_frame(seq, fmt)
    return seq

