"""Dense H x W x C grid utilities.

Grids are float64 numpy arrays of shape (H, W, C) in row-major (y, x, c)
order; channel-collapsed maps are (H, W). Image-valued grids live in
[0, 1], velocity grids are unbounded. All spatial filters use periodic
boundary extension so their energy bookkeeping matches the wavelet
transform's convention.
"""

from __future__ import annotations

import math

import numpy as np
from PIL import Image
from scipy.ndimage import convolve1d

DEFAULT_EPS = 1e-12


def as_grid(a) -> np.ndarray:
    """Validate and return `a` as a float64 (H, W, C) grid."""
    g = np.asarray(a, dtype=np.float64)
    if g.ndim == 2:
        g = g[:, :, None]
    if g.ndim != 3:
        raise ValueError(f"grid must be (H, W, C), got shape {g.shape}")
    if g.size == 0:
        raise ValueError(f"grid must be non-empty, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("grid contains non-finite values")
    return g


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def combine(a: np.ndarray, b: np.ndarray, ca: float, cb: float) -> np.ndarray:
    """Elementwise linear combination ca*a + cb*b."""
    check_same_shape(a, b)
    return ca * a + cb * b


def channel_l2_map(a: np.ndarray) -> np.ndarray:
    """Per-pixel L2 norm across the channel axis, shape (H, W)."""
    a = as_grid(a)
    return np.sqrt(np.sum(a * a, axis=2))


def minmax_invert(m: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Min-max normalize a 2-D map to [0, 1] and invert it.

    Smaller input values map to higher output values. A (near-)constant
    map, max - min <= eps, returns all ones: identical inputs count as
    fully consistent and get the maximal value.
    """
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    m = np.asarray(m, dtype=np.float64)
    lo, hi = m.min(), m.max()
    if hi - lo <= eps:
        return np.ones_like(m)
    return 1.0 - (m - lo) / (hi - lo)


def avg_pool2(m: np.ndarray, factor: int) -> np.ndarray:
    """Mean-pool a 2-D map by an integer factor along both axes."""
    m = np.asarray(m, dtype=np.float64)
    h, w = m.shape
    if factor < 1:
        raise ValueError(f"pool factor must be >= 1, got {factor}")
    if h % factor or w % factor:
        raise ValueError(f"map shape {m.shape} not divisible by factor {factor}")
    return m.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(a: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, kernel truncated at radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    a = as_grid(a)
    k = _gaussian_kernel(sigma)
    out = convolve1d(a, k, axis=0, mode="wrap")
    return convolve1d(out, k, axis=1, mode="wrap")


def unsharp_mask(a: np.ndarray, sigma: float = 2.0, amount: float = 1.0) -> np.ndarray:
    """Sharpen by adding back the blur residual: a + amount*(a - blur(a)).

    Output is clamped to [0, 1]; intended for image-valued grids.
    """
    if amount < 0:
        raise ValueError(f"amount must be >= 0, got {amount}")
    a = as_grid(a)
    sharp = a + amount * (a - gaussian_blur(a, sigma))
    return np.clip(sharp, 0.0, 1.0)


def bilateral_filter(a: np.ndarray, sigma_s: float = 3.0, sigma_r: float = 0.1) -> np.ndarray:
    """Edge-preserving smoothing with a joint spatial/range kernel.

    Spatial radius ceil(3*sigma_s), periodic extension; the range weight
    uses the squared L2 color distance and is shared across channels.
    """
    if sigma_s <= 0 or sigma_r <= 0:
        raise ValueError(f"sigmas must be > 0, got sigma_s={sigma_s}, sigma_r={sigma_r}")
    a = as_grid(a)
    radius = math.ceil(3.0 * sigma_s)
    acc = np.zeros_like(a)
    norm = np.zeros(a.shape[:2], dtype=np.float64)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            ws = math.exp(-0.5 * (dy * dy + dx * dx) / (sigma_s * sigma_s))
            shifted = np.roll(a, (dy, dx), axis=(0, 1))
            d2 = np.sum((shifted - a) ** 2, axis=2)
            w = ws * np.exp(-0.5 * d2 / (sigma_r * sigma_r))
            acc += w[:, :, None] * shifted
            norm += w
    return acc / norm[:, :, None]


def load_png(path) -> np.ndarray:
    """Load an 8-bit PNG as a [0, 1] grid; RGB -> C=3, grayscale -> C=1."""
    img = Image.open(path)
    if img.mode not in ("RGB", "L"):
        img = img.convert("RGB")
    arr = np.asarray(img, dtype=np.float64) / 255.0
    return as_grid(arr)


def save_png(path, a: np.ndarray) -> None:
    """Write a [0, 1] grid as an 8-bit PNG (C=3 -> RGB, C=1 -> grayscale)."""
    a = as_grid(a)
    if a.shape[2] not in (1, 3):
        raise ValueError(f"PNG export needs 1 or 3 channels, got {a.shape[2]}")
    b = np.clip(np.round(a * 255.0), 0, 255).astype(np.uint8)
    if b.shape[2] == 1:
        Image.fromarray(b[:, :, 0], mode="L").save(path)
    else:
        Image.fromarray(b, mode="RGB").save(path)
