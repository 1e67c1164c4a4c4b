"""Structural similarity scoring.

Plain single-scale SSIM with the canonical constants of the original
reference: 11-tap Gaussian window with sigma 1.5, k1 = 0.01, k2 = 0.03.
Local statistics use valid-mode windowing, so the score averages over pixels
whose window lies fully inside the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import GridMismatch, ImageTooSmall
from .gridcore import Image

__all__ = ["SsimParams", "ssim"]


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma_w: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.sigma_w <= 0 or self.k1 <= 0 or self.k2 <= 0 or self.dynamic_range <= 0:
            raise ValueError("sigma_w, k1, k2, dynamic_range must be positive")


def _gaussian_taps(window: int, sigma: float) -> np.ndarray:
    half = window // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _local_mean(arr: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = taps.size // 2
    out = ndimage.correlate1d(arr, taps, axis=0, mode="constant")
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def ssim(a: Image, b: Image, params: SsimParams | None = None) -> float:
    """Mean SSIM index between two images on the same grid; result in [-1, 1]."""
    params = params or SsimParams()
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")
    if a.grid.width < params.window or a.grid.height < params.window:
        raise ImageTooSmall(f"grid must be at least {params.window} pixels per side")
    taps = _gaussian_taps(params.window, params.sigma_w)
    x, y = a.data, b.data
    mu_x = _local_mean(x, taps)
    mu_y = _local_mean(y, taps)
    var_x = _local_mean(x * x, taps) - mu_x * mu_x
    var_y = _local_mean(y * y, taps) - mu_y * mu_y
    cov = _local_mean(x * y, taps) - mu_x * mu_y
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(numerator / denominator))
