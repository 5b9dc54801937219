# Encoding a skeleton sequence as an image
#
# A sequence is a T x J x 3 array of joint positions. The encoder reorders the
# joints part by part, stacks frames as rows and stretches the result to a
# fixed image size. x, y and z land in the red, green and blue channels.

import numpy as np

from skel2img import SkeletonSequence, builtin_format, decode, encode, s2i_joint_order
from skel2img.encoder import export, import_image

fmt = builtin_format("ntu25")
print(fmt.format_id, fmt.num_joints, "joints, part sizes", fmt.part_sizes())

# The column order of the image. Spine first, then arms, then legs.
order = s2i_joint_order(fmt)
print(order)

# A synthetic clip: 40 frames of a skeleton drifting along x with a little noise.
rng = np.random.default_rng(0)
base = rng.normal(scale=0.3, size=(fmt.num_joints, 3))
t = np.linspace(0, 1, 40)[:, None, None]
frames = base + t * np.array([1.0, 0.0, 0.0]) + rng.normal(scale=0.01, size=(40, 25, 3))
seq = SkeletonSequence(fmt.format_id, frames, sample_id="drift")

img = encode(seq, fmt)
print(img.pixels.shape, img.meta)

# The four corners of the image are the first and last joints of the first and
# last frames, untouched by interpolation.
print(np.allclose(img.pixels[0, 0], frames[0, order[0]]))
print(np.allclose(img.pixels[-1, -1], frames[-1, order[-1]]))

# Decoding samples the image back down to T x J. Corners come back exactly;
# interior points are an interpolation of the stretched grid.
back = decode(img)
print(back.frames.shape, np.abs(back.frames - frames).max())

# f32raw export keeps every float32 bit; png8 stores 8-bit pixels plus a
# per-channel affine in the sidecar.
raw, doc = export(img, "f32raw")
print(len(raw), doc["mode"], doc["height"], doc["width"])
print(np.array_equal(import_image(raw, doc).pixels, img.pixels.astype(np.float32)))

png, doc = export(img, "png8")
approx = import_image(png, doc)
print(doc["channel_affine"])
print("png8 max error", np.abs(approx.pixels - img.pixels).max())
