# Bone and motion streams, and corpus normalization
#
# Besides raw joint positions the encoder accepts two derived streams. Bones
# are offsets from each joint to its parent; motion is the frame-to-frame
# difference. Images from any stream can be normalized per channel with
# statistics gathered over a corpus.

import numpy as np

from skel2img import (
    ChannelStats,
    SkeletonSequence,
    accumulate,
    bone_stream,
    builtin_format,
    encode,
    merge,
    motion_stream,
    normalize,
)

fmt = builtin_format("toyota13")
rng = np.random.default_rng(2)
frames = rng.normal(size=(30, fmt.num_joints, 3))
seq = SkeletonSequence(fmt.format_id, frames)

bones = bone_stream(seq, fmt)
motion = motion_stream(seq)

# Shifting the whole skeleton changes neither stream.
moved = seq.with_frames(frames + [5.0, -1.0, 2.0])
print(np.allclose(bone_stream(moved, fmt).frames, bones.frames))
print(np.allclose(motion_stream(moved).frames, motion.frames))

# Motion telescopes: summed over time it is the net displacement.
print(np.allclose(motion.frames.sum(axis=0), frames[-1] - frames[0]))

# Statistics over a small corpus, gathered in two shards and merged.
images = [encode(SkeletonSequence(fmt.format_id, rng.normal(i % 3, 1 + i % 2,
                                                              size=(20, 13, 3))), fmt)
          for i in range(12)]
shards = [ChannelStats(), ChannelStats()]
for i, img in enumerate(images):
    shards[i % 2] = accumulate(shards[i % 2], img, source_id=f"clip{i}")
stats = merge(*shards)
print(stats.count, stats.mean, stats.std)

pixels = np.concatenate([normalize(img, stats).pixels.reshape(-1, 3) for img in images])
print(pixels.mean(axis=0).round(12), pixels.std(axis=0).round(12))
