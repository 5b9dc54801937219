"""Reference implementations of the pretraining and classification losses.

These score caller-supplied predictions; no network lives here. Patch
tensors are ``(n_patches, patch_size * patch_size * 3)`` arrays laid out
like MAE: patches in row-major grid order, each patch flattened as
(row, column, channel) with channel fastest.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .masking import PatchGrid, PatchMask

LOG_FLOOR = 1e-12


def patchify(pixels: np.ndarray, grid: PatchGrid) -> np.ndarray:
    """Split an H x W x 3 image (or S2IImage) into non-overlapping patches."""
    pixels = np.asarray(getattr(pixels, "pixels", pixels))
    h, w, c = pixels.shape
    p = grid.patch_size
    if (h, w) != (grid.grid_h * p, grid.grid_w * p):
        raise ValueError(f"image {h}x{w} is not a {grid.grid_h}x{grid.grid_w} grid of "
                         f"{p}-pixel patches")
    x = pixels.reshape(grid.grid_h, p, grid.grid_w, p, c).transpose(0, 2, 1, 3, 4)
    return x.reshape(grid.n_patches, p * p * c)


def unpatchify(patches: np.ndarray, grid: PatchGrid, channels: int = 3) -> np.ndarray:
    p = grid.patch_size
    if patches.shape != (grid.n_patches, p * p * channels):
        raise ValueError(f"expected patches of shape {(grid.n_patches, p * p * channels)}, "
                         f"got {patches.shape}")
    x = patches.reshape(grid.grid_h, grid.grid_w, p, p, channels).transpose(0, 2, 1, 3, 4)
    return x.reshape(grid.grid_h * p, grid.grid_w * p, channels)


def _mask_index(mask, n: int) -> np.ndarray:
    m = np.asarray(getattr(mask, "masked", mask), dtype=bool).ravel()
    if m.size != n:
        raise ValueError(f"mask covers {m.size} patches, tensors have {n}")
    if not m.any():
        raise ValueError("mask is empty; the loss is undefined")
    return m


def mae_loss(pred: np.ndarray, target: np.ndarray, mask: PatchMask | np.ndarray) -> float:
    """Mean over masked patches of the per-patch squared L2 error."""
    pred, target = np.asarray(pred, dtype=np.float64), np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    m = _mask_index(mask, pred.shape[0])
    diff = pred[m] - target[m]
    return float(np.sum(diff * diff) / m.sum())


def mae_loss_per_element(pred: np.ndarray, target: np.ndarray,
                         mask: PatchMask | np.ndarray) -> float:
    """:func:`mae_loss` divided by the patch dimension (plain MSE over masked pixels)."""
    return mae_loss(pred, target, mask) / np.asarray(pred).shape[1]


def diffmae_loss(pred_x0m: np.ndarray, true_x0m: np.ndarray,
                 mask: PatchMask | np.ndarray) -> float:
    """MSE between predicted and true clean content of the masked patches.

    Inputs may cover the whole grid (masked rows are selected) or only the
    masked patches, in grid order.
    """
    pred, true = np.asarray(pred_x0m, dtype=np.float64), np.asarray(true_x0m, dtype=np.float64)
    if pred.shape != true.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {true.shape}")
    m = np.asarray(getattr(mask, "masked", mask), dtype=bool).ravel()
    if not m.any():
        raise ValueError("mask is empty; the loss is undefined")
    if pred.shape[0] == m.size:
        pred, true = pred[m], true[m]
    elif pred.shape[0] != m.sum():
        raise ValueError(f"{pred.shape[0]} patches given; mask has {m.size} patches, "
                         f"{int(m.sum())} masked")
    return float(np.mean((pred - true) ** 2))


def cross_entropy(probs, label: int) -> float:
    """Negative log-probability of ``label``, floored at 1e-12 before the log."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("probs must be a non-empty vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)) or abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("probs is not a probability simplex")
    if not 0 <= label < probs.size:
        raise ValueError(f"label {label} out of range for {probs.size} classes")
    return -math.log(max(float(probs[label]), LOG_FLOOR))


@dataclass(frozen=True, eq=False)
class DiffusionSchedule:
    """Variance schedule. Arrays are 0-based; the ``*_at`` accessors take step t in 1..T."""

    T_diff: int
    rho: float
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    def _index(self, t: int) -> int:
        if not 1 <= t <= self.T_diff:
            raise ValueError(f"diffusion step {t} outside 1..{self.T_diff}")
        return t - 1

    def beta_at(self, t: int) -> float:
        return float(self.beta[self._index(t)])

    def alpha_at(self, t: int) -> float:
        return float(self.alpha[self._index(t)])

    def alpha_bar_at(self, t: int) -> float:
        return float(self.alpha_bar[self._index(t)])

    def to_dict(self) -> dict:
        return {
            "T_diff": self.T_diff,
            "rho": self.rho,
            "beta": self.beta.tolist(),
            "alpha": self.alpha.tolist(),
            "alpha_bar": self.alpha_bar.tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def build_schedule(T_diff: int = 1000, rho: float = 1.0,
                   beta_start: float = 1e-4, beta_end: float = 0.02) -> DiffusionSchedule:
    """Linear beta schedule from ``beta_start`` to ``beta_end``, each beta raised to ``rho``."""
    if T_diff < 1:
        raise ValueError("T_diff must be >= 1")
    if rho <= 0:
        raise ValueError("rho must be positive")
    beta = np.linspace(beta_start, beta_end, T_diff) ** rho
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    return DiffusionSchedule(T_diff, float(rho), beta, alpha, alpha_bar)


def forward_diffuse(x0: np.ndarray, t: int, eps: np.ndarray,
                    sched: DiffusionSchedule) -> np.ndarray:
    """Noised sample sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps."""
    x0, eps = np.asarray(x0, dtype=np.float64), np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise ValueError(f"shape mismatch {x0.shape} vs {eps.shape}")
    abar = sched.alpha_bar_at(t)
    return math.sqrt(abar) * x0 + math.sqrt(1.0 - abar) * eps
