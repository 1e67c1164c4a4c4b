"""Synthetic fluorescence-style test images.

Three structure families: piecewise-constant blobs, bright filament networks,
and a smooth gradient dotted with small spots.  All generators are seeded and
return intensities in [0, 1].
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .gridcore import Image, image_from_array

__all__ = ["blobs_phantom", "filaments_phantom", "smooth_spots_phantom", "phantom_by_name"]


def blobs_phantom(n: int = 128, seed: int = 0) -> Image:
    """Dense mosaic of overlapping constant-intensity ellipses.

    Mimics a vesicle-packed cell body: most of the field is covered by
    piecewise-constant patches of varied size and brightness.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    img = np.full((n, n), 0.08)
    for _ in range(90):
        cx, cy = rng.uniform(0.0, n, size=2)
        a = rng.uniform(n / 40, n / 9)
        b = rng.uniform(n / 40, n / 9)
        phi = rng.uniform(0, np.pi)
        level = rng.uniform(0.25, 1.0)
        dx, dy = xx - cx, yy - cy
        u = dx * np.cos(phi) + dy * np.sin(phi)
        v = -dx * np.sin(phi) + dy * np.cos(phi)
        mask = (u / a) ** 2 + (v / b) ** 2 <= 1.0
        img[mask] = level
    return image_from_array(np.clip(img, 0.0, 1.0), channel="blobs")


def filaments_phantom(n: int = 128, seed: int = 0) -> Image:
    """Dense network of curvy bright filaments (tubulin-like texture)."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    canvas = np.zeros((n, n))
    for _ in range(26):
        x, y = rng.uniform(0.02 * n, 0.98 * n, size=2)
        angle = rng.uniform(0, 2 * np.pi)
        amplitude = rng.uniform(0.45, 1.0)
        steps = int(2.5 * n)
        pts = np.empty((steps, 2))
        for i in range(steps):
            angle += 0.15 * rng.standard_normal()
            x = np.clip(x + np.cos(angle), 1.0, n - 2.0)
            y = np.clip(y + np.sin(angle), 1.0, n - 2.0)
            pts[i] = (y, x)
        iy = np.rint(pts[:, 0]).astype(int)
        ix = np.rint(pts[:, 1]).astype(int)
        track = np.zeros((n, n))
        track[iy, ix] = 1.0
        canvas = np.maximum(canvas, amplitude * ndimage.gaussian_filter(track, 1.3))
    peak = canvas.max()
    if peak > 0:
        canvas = canvas / peak
    img = 0.05 + 0.95 * canvas
    return image_from_array(np.clip(img, 0.0, 1.0), channel="filaments")


def smooth_spots_phantom(n: int = 128, seed: int = 0) -> Image:
    """Textured smooth field with a gradient and dense small bright spots."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    field = ndimage.gaussian_filter(rng.standard_normal((n, n)), n / 24.0)
    field = (field - field.min()) / max(field.max() - field.min(), 1e-12)
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    img = 0.10 + 0.30 * field + 0.15 * xx / n
    for _ in range(60):
        cx, cy = rng.uniform(0.0, n, size=2)
        sigma = rng.uniform(1.2, 2.6)
        amp = rng.uniform(0.25, 0.5)
        img += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
    return image_from_array(np.clip(img, 0.0, 1.0), channel="smooth_spots")


_BY_NAME = {
    "blobs": blobs_phantom,
    "filaments": filaments_phantom,
    "smooth_spots": smooth_spots_phantom,
}


def phantom_by_name(name: str, n: int = 128, seed: int = 0) -> Image:
    try:
        maker = _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown phantom {name!r}; choose from {sorted(_BY_NAME)}") from None
    return maker(n, seed)
