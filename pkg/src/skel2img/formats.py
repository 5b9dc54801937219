"""Skeleton format registry.

A format names the joints of one skeleton layout, their kinematic parents,
the five body parts used to order joints in the image, and the reference
joint used for first-frame translation.

Built-in joint indices follow the official dataset conventions:

* ``ntu25``: Kinect v2 (NTU RGB+D / PKU-MMD), index 0 is the base of spine.
* ``ucla20``: Kinect v1 (NW-UCLA), index 0 is the hip center (base of spine).
* ``toyota13``: LCR-Net 13-joint output (Toyota Smarthome), index 0 is the
  right ankle and index 12 the head. This layout has no pelvis joint, so the
  reference position is the midpoint of the two hips.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

ROOT = -1

PART_NAMES = ("Spine", "LeftArm", "RightArm", "LeftLeg", "RightLeg")


class FormatError(ValueError):
    """Raised when a format description is malformed or breaks an invariant."""


class PartitionError(FormatError):
    pass


class CycleError(FormatError):
    pass


@dataclass(frozen=True)
class JointDef:
    joint_id: int
    name: str
    parent_id: int = ROOT


@dataclass(frozen=True)
class PartDef:
    part_name: str
    ordered_joint_ids: tuple[int, ...]


@dataclass(frozen=True)
class SkeletonFormat:
    """Immutable joint layout with body-part partition.

    ``reference`` holds one joint id, or two ids whose midpoint is used.
    """

    format_id: str
    joints: tuple[JointDef, ...]
    parts: tuple[PartDef, ...]
    reference: tuple[int, ...]

    def __post_init__(self):
        validate_format(self)

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    @property
    def parents(self) -> list[int]:
        return [j.parent_id for j in self.joints]

    @property
    def names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def root(self) -> int:
        return next(j.joint_id for j in self.joints if j.parent_id == ROOT)

    def joint_id(self, name: str) -> int:
        for j in self.joints:
            if j.name == name:
                return j.joint_id
        raise KeyError(f"joint {name!r} not in format {self.format_id!r}")

    def part(self, name: str) -> PartDef:
        for p in self.parts:
            if p.part_name == name:
                return p
        raise KeyError(name)

    def part_sizes(self) -> list[int]:
        return [len(p.ordered_joint_ids) for p in self.parts]


def validate_format(fmt: SkeletonFormat) -> None:
    """Check every structural invariant of ``fmt``; raise FormatError on the first violation."""
    n = len(fmt.joints)
    if n == 0:
        raise FormatError("format has no joints")
    ids = [j.joint_id for j in fmt.joints]
    if ids != list(range(n)):
        raise FormatError(f"joint ids must be 0..{n - 1} in order, got {ids}")
    names = [j.name for j in fmt.joints]
    if len(set(names)) != n:
        raise FormatError("joint names must be unique")

    for j in fmt.joints:
        if j.parent_id != ROOT and not 0 <= j.parent_id < n:
            raise FormatError(f"joint {j.name!r} has unknown parent {j.parent_id}")
        if j.parent_id == j.joint_id:
            raise CycleError(f"joint {j.name!r} is its own parent; use {ROOT} for the root")
    roots = [j.joint_id for j in fmt.joints if j.parent_id == ROOT]
    if len(roots) != 1:
        raise FormatError(f"expected exactly one root joint, found {len(roots)}")
    parents = [j.parent_id for j in fmt.joints]
    for start in range(n):
        seen = {start}
        k = parents[start]
        while k != ROOT:
            if k in seen:
                raise CycleError(f"parent cycle through joint {names[k]!r}")
            seen.add(k)
            k = parents[k]

    got = tuple(p.part_name for p in fmt.parts)
    if got != PART_NAMES:
        raise PartitionError(f"parts must be {PART_NAMES} in that order, got {got}")
    members = [i for p in fmt.parts for i in p.ordered_joint_ids]
    for p in fmt.parts:
        if not p.ordered_joint_ids:
            raise PartitionError(f"part {p.part_name} is empty")
    dup = sorted({i for i in members if members.count(i) > 1})
    if dup:
        raise PartitionError(f"joints in more than one part: {[names[i] for i in dup]}")
    missing = sorted(set(range(n)) - set(members))
    if missing:
        raise PartitionError(f"joints in no part: {[names[i] for i in missing]}")
    extra = sorted(set(members) - set(range(n)))
    if extra:
        raise PartitionError(f"parts reference unknown joint ids {extra}")

    if len(fmt.reference) not in (1, 2) or not all(0 <= r < n for r in fmt.reference):
        raise FormatError(f"reference must be one or two valid joint ids, got {fmt.reference}")


def s2i_joint_order(fmt: SkeletonFormat) -> list[int]:
    """Joint ids in image column order: the five parts concatenated."""
    return [i for p in fmt.parts for i in p.ordered_joint_ids]


# ---------------------------------------------------------------------------
# format-description documents

FORMAT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["format_id", "joints", "parts", "reference"],
    "additionalProperties": False,
    "properties": {
        "format_id": {"type": "string", "minLength": 1},
        "joints": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "name", "parent"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "name": {"type": "string", "minLength": 1},
                    "parent": {"type": ["string", "null"]},
                },
            },
        },
        "parts": {
            "type": "object",
            "required": list(PART_NAMES),
            "additionalProperties": False,
            "properties": {
                name: {"type": "array", "items": {"type": "string"}} for name in PART_NAMES
            },
        },
        "reference": {
            "oneOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
            ]
        },
    },
}


def format_from_dict(doc: dict) -> SkeletonFormat:
    try:
        jsonschema.validate(doc, FORMAT_SCHEMA)
    except jsonschema.ValidationError as e:
        raise FormatError(f"schema violation at {list(e.absolute_path)}: {e.message}") from None

    by_name: dict[str, int] = {}
    for entry in doc["joints"]:
        if entry["name"] in by_name:
            raise FormatError(f"duplicate joint name {entry['name']!r}")
        by_name[entry["name"]] = entry["id"]

    def lookup(name: str) -> int:
        if name not in by_name:
            raise FormatError(f"unknown joint name {name!r}")
        return by_name[name]

    joints = sorted(doc["joints"], key=lambda e: e["id"])
    if [e["id"] for e in joints] != list(range(len(joints))):
        raise FormatError("joint ids must be exactly 0..J-1")
    joint_defs = tuple(
        JointDef(e["id"], e["name"], ROOT if e["parent"] is None else lookup(e["parent"]))
        for e in joints
    )
    parts = tuple(
        PartDef(name, tuple(lookup(n) for n in doc["parts"][name])) for name in PART_NAMES
    )
    ref = doc["reference"]
    reference = (lookup(ref),) if isinstance(ref, str) else tuple(lookup(n) for n in ref)
    return SkeletonFormat(doc["format_id"], joint_defs, parts, reference)


def format_to_dict(fmt: SkeletonFormat) -> dict:
    names = fmt.names
    ref = [names[i] for i in fmt.reference]
    return {
        "format_id": fmt.format_id,
        "joints": [
            {"id": j.joint_id, "name": j.name,
             "parent": None if j.parent_id == ROOT else names[j.parent_id]}
            for j in fmt.joints
        ],
        "parts": {p.part_name: [names[i] for i in p.ordered_joint_ids] for p in fmt.parts},
        "reference": ref[0] if len(ref) == 1 else ref,
    }


def load_format(document: str | bytes) -> SkeletonFormat:
    """Parse a JSON format description and validate it."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    return format_from_dict(doc)


def dump_format(fmt: SkeletonFormat) -> str:
    return json.dumps(format_to_dict(fmt), indent=2) + "\n"


# ---------------------------------------------------------------------------
# built-ins: (name, parent name) in dataset index order

_NTU25 = [
    ("base of spine", None),
    ("middle of spine", "base of spine"),
    ("neck", "spine"),
    ("head", "neck"),
    ("left shoulder", "spine"),
    ("left elbow", "left shoulder"),
    ("left wrist", "left elbow"),
    ("left hand", "left wrist"),
    ("right shoulder", "spine"),
    ("right elbow", "right shoulder"),
    ("right wrist", "right elbow"),
    ("right hand", "right wrist"),
    ("left hip", "base of spine"),
    ("left knee", "left hip"),
    ("left ankle", "left knee"),
    ("left foot", "left ankle"),
    ("right hip", "base of spine"),
    ("right knee", "right hip"),
    ("right ankle", "right knee"),
    ("right foot", "right ankle"),
    ("spine", "middle of spine"),
    ("tip of left hand", "left hand"),
    ("left thumb", "left hand"),
    ("tip of right hand", "right hand"),
    ("right thumb", "right hand"),
]

_NTU25_PARTS = {
    "Spine": ["head", "neck", "spine", "middle of spine", "base of spine"],
    "LeftArm": ["left shoulder", "left elbow", "left wrist", "left hand", "left thumb",
                "tip of left hand"],
    "RightArm": ["right shoulder", "right elbow", "right wrist", "right hand", "right thumb",
                 "tip of right hand"],
    "LeftLeg": ["left hip", "left knee", "left ankle", "left foot"],
    "RightLeg": ["right hip", "right knee", "right ankle", "right foot"],
}

# Kinect v1 names: hip center = base of spine, spine = middle of spine,
# shoulder center = spine.
_UCLA20 = [
    ("base of spine", None),
    ("middle of spine", "base of spine"),
    ("spine", "middle of spine"),
    ("head", "spine"),
    ("left shoulder", "spine"),
    ("left elbow", "left shoulder"),
    ("left wrist", "left elbow"),
    ("left hand", "left wrist"),
    ("right shoulder", "spine"),
    ("right elbow", "right shoulder"),
    ("right wrist", "right elbow"),
    ("right hand", "right wrist"),
    ("left hip", "base of spine"),
    ("left knee", "left hip"),
    ("left ankle", "left knee"),
    ("left foot", "left ankle"),
    ("right hip", "base of spine"),
    ("right knee", "right hip"),
    ("right ankle", "right knee"),
    ("right foot", "right ankle"),
]

_UCLA20_PARTS = {
    "Spine": ["head", "spine", "middle of spine", "base of spine"],
    "LeftArm": ["left shoulder", "left elbow", "left wrist", "left hand"],
    "RightArm": ["right shoulder", "right elbow", "right wrist", "right hand"],
    "LeftLeg": ["left hip", "left knee", "left ankle", "left foot"],
    "RightLeg": ["right hip", "right knee", "right ankle", "right foot"],
}

# No torso joints: shoulders hang from the head, hips from the shoulders.
_TOYOTA13 = [
    ("right ankle", "right knee"),
    ("left ankle", "left knee"),
    ("right knee", "right hip"),
    ("left knee", "left hip"),
    ("right hip", "right shoulder"),
    ("left hip", "left shoulder"),
    ("right wrist", "right elbow"),
    ("left wrist", "left elbow"),
    ("right elbow", "right shoulder"),
    ("left elbow", "left shoulder"),
    ("right shoulder", "head"),
    ("left shoulder", "head"),
    ("head", None),
]

_TOYOTA13_PARTS = {
    "Spine": ["head"],
    "LeftArm": ["left shoulder", "left elbow", "left wrist"],
    "RightArm": ["right shoulder", "right elbow", "right wrist"],
    "LeftLeg": ["left hip", "left knee", "left ankle"],
    "RightLeg": ["right hip", "right knee", "right ankle"],
}

_BUILTIN_TABLES = {
    "ntu25": (_NTU25, _NTU25_PARTS, "base of spine"),
    "ucla20": (_UCLA20, _UCLA20_PARTS, "base of spine"),
    "toyota13": (_TOYOTA13, _TOYOTA13_PARTS, ["left hip", "right hip"]),
}

BUILTIN_FORMATS = tuple(_BUILTIN_TABLES)

_cache: dict[str, SkeletonFormat] = {}


def builtin_format(name: str) -> SkeletonFormat:
    if name not in _BUILTIN_TABLES:
        raise KeyError(f"unknown built-in format {name!r}; choose from {BUILTIN_FORMATS}")
    if name not in _cache:
        joints, parts, ref = _BUILTIN_TABLES[name]
        doc = {
            "format_id": name,
            "joints": [{"id": i, "name": n, "parent": p} for i, (n, p) in enumerate(joints)],
            "parts": parts,
            "reference": ref,
        }
        _cache[name] = format_from_dict(doc)
    return _cache[name]


def resolve_format(spec: str | Path) -> SkeletonFormat:
    """A built-in name, or a path to a format-description file."""
    if str(spec) in _BUILTIN_TABLES:
        return builtin_format(str(spec))
    path = Path(spec)
    if not path.is_file():
        raise KeyError(f"{spec!r} is neither a built-in format nor a readable file")
    return load_format(path.read_text())
