# Reference losses and the diffusion schedule
#
# The losses score predictions that would come from a model. Here the
# "predictions" are just perturbed targets, which is enough to see the scale
# of each quantity.

import math

import numpy as np

from skel2img import (
    PatchGrid,
    build_schedule,
    cross_entropy,
    diffmae_loss,
    forward_diffuse,
    mae_loss,
    mae_loss_per_element,
    patchify,
    random_mask,
    unpatchify,
)

grid = PatchGrid()
rng = np.random.default_rng(3)
image = rng.normal(size=(224, 224, 3))

patches = patchify(image, grid)
print(patches.shape)  # 196 patches of 16 * 16 * 3 values
print(np.array_equal(unpatchify(patches, grid), image))

mask = random_mask(grid, 0.75, seed=0)

# An offset of 1 on every value costs 768 per patch, or 1 per element.
print(mae_loss(patches + 1, patches, mask), mae_loss_per_element(patches + 1, patches, mask))

# Errors on visible patches are ignored.
pred = patches.copy()
pred[~mask.masked] += 100
print(mae_loss(pred, patches, mask))
print(diffmae_loss(patches[mask.masked] + 0.1, patches[mask.masked], mask))

sched = build_schedule(1000)
print(sched.beta_at(1), sched.beta_at(1000), sched.alpha_bar_at(1), sched.alpha_bar_at(1000))

# Noising keeps unit variance when the clean signal has unit variance.
x0 = rng.normal(size=100_000)
for t in (1, 100, 500, 1000):
    xt = forward_diffuse(x0, t, rng.normal(size=x0.shape), sched)
    print(t, round(float(xt.var()), 3))

print(cross_entropy(np.full(60, 1 / 60), 7), math.log(60))
