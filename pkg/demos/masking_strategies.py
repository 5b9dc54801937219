# Patch masks
#
# A 224 x 224 image splits into a 14 x 14 grid of 16-pixel patches. Each
# strategy hides a fraction of them: scattered patches, whole joint columns,
# whole time rows, or square blocks.

import numpy as np

from skel2img import PatchGrid, block_mask, joint_mask, random_mask, temporal_mask
from skel2img.masking import blocks_union, dumps_mask, loads_mask

grid = PatchGrid.for_image(224, 224, 16)
print(grid, grid.n_patches)


def show(mask):
    for row in mask.as_grid():
        print("".join("#" if m else "." for m in row))
    print(mask.strategy, mask.count, "masked")


# Random: floor(0.75 * 196) = 147 patches, whatever the seed.
show(random_mask(grid, 0.75, seed=1))
print({random_mask(grid, 0.75, s).count for s in range(100)})

# Joint masking hides complete columns, temporal masking complete rows.
show(joint_mask(grid, 0.75, seed=1))
show(temporal_mask(grid, 0.5, seed=1))

# Block masks record the boxes they were built from.
m = block_mask(grid, 0.4, seed=3)
show(m)
print(m.blocks[:5])
print(np.array_equal(blocks_union(m), m.masked))

# Same seed, same mask. Masks serialize to a small JSON document.
text = dumps_mask(m)
print(loads_mask(text) == block_mask(grid, 0.4, seed=3))
