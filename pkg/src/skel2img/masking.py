"""Patch masks over the ViT patch lattice.

Grids are row-major: patch index ``i`` sits at row ``i // grid_w`` and column
``i % grid_w``. With the encoder's layout rows are time and columns are
joints, so temporal masks hide whole rows and joint masks whole columns.

All randomness comes from numpy's PCG64 generator seeded with the caller's
seed, so a mask is a pure function of (grid, ratio, seed).
"""
from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

RNG_ID = "numpy-pcg64"
STRATEGIES = ("random", "block", "joint", "temporal")
DEFAULT_RATIO = 0.75


@dataclass(frozen=True)
class PatchGrid:
    grid_h: int = 14
    grid_w: int = 14
    patch_size: int = 16

    def __post_init__(self):
        if self.grid_h < 1 or self.grid_w < 1 or self.patch_size < 1:
            raise ValueError("grid dimensions and patch size must be positive")

    @classmethod
    def for_image(cls, height: int = 224, width: int = 224, patch_size: int = 16) -> "PatchGrid":
        if height % patch_size or width % patch_size:
            raise ValueError(f"patch size {patch_size} does not divide {height}x{width}")
        return cls(height // patch_size, width // patch_size, patch_size)

    @property
    def n_patches(self) -> int:
        return self.grid_h * self.grid_w


@dataclass(frozen=True, eq=False)
class PatchMask:
    grid: PatchGrid
    masked: np.ndarray
    strategy: str
    ratio: float
    seed: int
    blocks: tuple[tuple[int, int, int, int], ...] = field(default=())
    rng_id: str = RNG_ID

    @property
    def count(self) -> int:
        return int(self.masked.sum())

    def as_grid(self) -> np.ndarray:
        return self.masked.reshape(self.grid.grid_h, self.grid.grid_w)

    def __eq__(self, other):
        if not isinstance(other, PatchMask):
            return NotImplemented
        return (self.grid == other.grid and np.array_equal(self.masked, other.masked)
                and self.strategy == other.strategy and self.ratio == other.ratio
                and self.seed == other.seed and self.blocks == other.blocks
                and self.rng_id == other.rng_id)


def _rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _check_ratio(ratio: float) -> float:
    ratio = float(ratio)
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    return ratio


def random_mask(grid: PatchGrid, ratio: float = DEFAULT_RATIO, seed: int = 0) -> PatchMask:
    """Mask exactly floor(ratio * N) patches chosen uniformly without replacement."""
    ratio = _check_ratio(ratio)
    k = int(np.floor(ratio * grid.n_patches))
    masked = np.zeros(grid.n_patches, dtype=bool)
    masked[_rng(seed).permutation(grid.n_patches)[:k]] = True
    return PatchMask(grid, masked, "random", ratio, seed)


def _lines_mask(grid: PatchGrid, ratio: float, seed: int, axis: str) -> PatchMask:
    ratio = _check_ratio(ratio)
    units = grid.grid_w if axis == "joint" else grid.grid_h
    k = round(ratio * units)  # half-to-even
    chosen = _rng(seed).choice(units, size=k, replace=False)
    m = np.zeros((grid.grid_h, grid.grid_w), dtype=bool)
    if axis == "joint":
        m[:, chosen] = True
    else:
        m[chosen, :] = True
    return PatchMask(grid, m.ravel(), axis, ratio, seed)


def joint_mask(grid: PatchGrid, ratio: float = DEFAULT_RATIO, seed: int = 0) -> PatchMask:
    """Mask round(ratio * grid_w) whole patch columns."""
    return _lines_mask(grid, ratio, seed, "joint")


def temporal_mask(grid: PatchGrid, ratio: float = DEFAULT_RATIO, seed: int = 0) -> PatchMask:
    """Mask round(ratio * grid_h) whole patch rows."""
    return _lines_mask(grid, ratio, seed, "temporal")


def block_mask(grid: PatchGrid, ratio: float = DEFAULT_RATIO, seed: int = 0,
               max_side: int | None = None) -> PatchMask:
    """Mask contiguous blocks until at least floor(ratio * N) patches are hidden.

    Each block starts as the single patch at a seed drawn uniformly from the
    still-visible patches, then grows one column, then one row, alternately
    (right/down, or left/up at the grid edge) until the target is reached or
    its sides reach ``max_side`` (default: half the shorter grid side, at
    least 2). The placed blocks are kept in ``blocks`` as half-open
    ``(row0, col0, row1, col1)`` boxes.
    """
    ratio = _check_ratio(ratio)
    h, w = grid.grid_h, grid.grid_w
    if max_side is None:
        max_side = max(2, min(h, w) // 2)
    target = int(np.floor(ratio * grid.n_patches))
    rng = _rng(seed)
    m = np.zeros((h, w), dtype=bool)
    blocks = []
    count = 0
    while count < target:
        free = np.flatnonzero(~m)
        r, c = divmod(int(free[rng.integers(free.size)]), w)
        r0, r1, c0, c1 = r, r + 1, c, c + 1
        m[r, c] = True
        count += 1
        widen = True
        while count < target:
            for step in (widen, not widen):
                if step and c1 - c0 < max_side and (c1 < w or c0 > 0):
                    if c1 < w:
                        c1 += 1
                    else:
                        c0 -= 1
                    break
                if not step and r1 - r0 < max_side and (r1 < h or r0 > 0):
                    if r1 < h:
                        r1 += 1
                    else:
                        r0 -= 1
                    break
            else:
                break
            widen = not step
            m[r0:r1, c0:c1] = True
            count = int(m.sum())
        blocks.append((r0, c0, r1, c1))
    return PatchMask(grid, m.ravel(), "block", ratio, seed, tuple(blocks))


_BUILDERS = {
    "random": random_mask,
    "block": block_mask,
    "joint": joint_mask,
    "temporal": temporal_mask,
}


def make_mask(strategy: str, grid: PatchGrid, ratio: float = DEFAULT_RATIO,
              seed: int = 0) -> PatchMask:
    if strategy == "group":
        strategy = "block"
    if strategy not in _BUILDERS:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return _BUILDERS[strategy](grid, ratio, seed)


def blocks_union(mask: PatchMask) -> np.ndarray:
    m = np.zeros((mask.grid.grid_h, mask.grid.grid_w), dtype=bool)
    for r0, c0, r1, c1 in mask.blocks:
        m[r0:r1, c0:c1] = True
    return m.ravel()


# ---------------------------------------------------------------------------
# mask files

def mask_to_dict(mask: PatchMask) -> dict:
    doc = {
        "strategy": mask.strategy,
        "ratio": mask.ratio,
        "seed": int(mask.seed),
        "grid_h": mask.grid.grid_h,
        "grid_w": mask.grid.grid_w,
        "patch_size": mask.grid.patch_size,
        "rng_id": mask.rng_id,
        "count": mask.count,
        "bits": base64.b64encode(np.packbits(mask.masked).tobytes()).decode("ascii"),
    }
    if mask.blocks:
        doc["blocks"] = [list(b) for b in mask.blocks]
    return doc


def mask_from_dict(doc: dict) -> PatchMask:
    grid = PatchGrid(int(doc["grid_h"]), int(doc["grid_w"]), int(doc.get("patch_size", 16)))
    raw = np.frombuffer(base64.b64decode(doc["bits"], validate=True), dtype=np.uint8)
    if raw.size != (grid.n_patches + 7) // 8:
        raise ValueError(f"bit payload has {raw.size} bytes, grid needs "
                         f"{(grid.n_patches + 7) // 8}")
    masked = np.unpackbits(raw)[: grid.n_patches].astype(bool)
    if "count" in doc and int(doc["count"]) != int(masked.sum()):
        raise ValueError("header count disagrees with the bit payload")
    if doc["strategy"] not in STRATEGIES:
        raise ValueError(f"unknown strategy {doc['strategy']!r}")
    blocks = tuple(tuple(int(v) for v in b) for b in doc.get("blocks", ()))
    return PatchMask(grid, masked, doc["strategy"], float(doc["ratio"]), int(doc["seed"]),
                     blocks, doc.get("rng_id", RNG_ID))


def dumps_mask(mask: PatchMask) -> str:
    return json.dumps(mask_to_dict(mask), indent=1) + "\n"


def loads_mask(text: str | bytes) -> PatchMask:
    return mask_from_dict(json.loads(text))
