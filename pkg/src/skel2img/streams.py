"""Bone and motion modalities derived from the joint stream."""
from __future__ import annotations

import numpy as np

from .formats import ROOT, SkeletonFormat
from .ingest import SkeletonSequence

STREAMS = ("joint", "bone", "motion")


def bone_stream(seq: SkeletonSequence, fmt: SkeletonFormat) -> SkeletonSequence:
    """Vector from each joint's kinematic parent to the joint; zero at the root."""
    if seq.num_joints != fmt.num_joints:
        raise ValueError(f"sequence has {seq.num_joints} joints, format needs {fmt.num_joints}")
    parents = np.array([p if p != ROOT else j for j, p in enumerate(fmt.parents)])
    return seq.with_frames(seq.frames - seq.frames[:, parents, :])


def motion_stream(seq: SkeletonSequence) -> SkeletonSequence:
    """Frame-to-frame displacement, with an all-zero first frame."""
    out = np.zeros_like(seq.frames)
    out[1:] = np.diff(seq.frames, axis=0)
    return seq.with_frames(out)


def derive_stream(seq: SkeletonSequence, fmt: SkeletonFormat, stream: str) -> SkeletonSequence:
    if stream == "joint":
        return seq
    if stream == "bone":
        return bone_stream(seq, fmt)
    if stream == "motion":
        return motion_stream(seq)
    raise ValueError(f"unknown stream {stream!r}; choose from {STREAMS}")
