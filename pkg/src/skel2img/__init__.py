"""Skeleton-to-image encoding for vision-model pretraining on 3D skeleton data."""
from .encoder import S2IImage, decode, encode, export, import_image
from .formats import SkeletonFormat, builtin_format, load_format, s2i_joint_order
from .ingest import (
    SkeletonSequence,
    parse_generic_json,
    parse_ntu_skeleton,
    split_bodies,
    translate_by_first_frame,
)
from .masking import PatchGrid, PatchMask, block_mask, joint_mask, random_mask, temporal_mask
from .objectives import (
    build_schedule,
    cross_entropy,
    diffmae_loss,
    forward_diffuse,
    mae_loss,
    mae_loss_per_element,
    patchify,
    unpatchify,
)
from .stats import ChannelStats, accumulate, merge, normalize
from .streams import bone_stream, motion_stream

__version__ = "0.1.0"
