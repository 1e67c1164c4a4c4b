"""Discrete second-derivative filters and per-pixel 2x2 eigen-analysis.

Filters use the standard consistent stencils: [1, -2, 1] for the pure second
differences and the quarter cross stencil (composition of two centered first
differences) for the mixed derivative.  All filters extend the image by
mirroring with edge repeat, which keeps constants in their null space up to
the border.  The raw-array helpers carry exact adjoints of the same boundary
rule so iterative solvers can build normal equations from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import GridMismatch, ImageTooSmall
from .gridcore import GridSpec, Image

__all__ = [
    "HessianField",
    "EigenField",
    "apply_hessian",
    "eig2x2",
    "directional_dd",
    "roughness_image",
]

_D2 = np.array([1.0, -2.0, 1.0])
_DC = np.array([-0.5, 0.0, 0.5])
_DC_REV = np.array([0.5, 0.0, -0.5])


def d2_filter(arr: np.ndarray, axis: int) -> np.ndarray:
    """Second difference along ``axis`` with mirrored (edge-repeat) boundary."""
    return ndimage.correlate1d(arr, _D2, axis=axis, mode="reflect")


# The mirrored second difference is a symmetric matrix, so it is its own adjoint.
d2_filter_adjoint = d2_filter


def dc_filter(arr: np.ndarray, axis: int) -> np.ndarray:
    """Centered first difference along ``axis`` with mirrored boundary."""
    return ndimage.correlate1d(arr, _DC, axis=axis, mode="reflect")


def dc_filter_adjoint(arr: np.ndarray, axis: int) -> np.ndarray:
    """Exact adjoint of :func:`dc_filter` for the same boundary rule."""
    out = ndimage.correlate1d(arr, _DC_REV, axis=axis, mode="constant", cval=0.0)
    first = [slice(None)] * arr.ndim
    last = [slice(None)] * arr.ndim
    first[axis] = 0
    last[axis] = -1
    out[tuple(first)] -= 0.5 * arr[tuple(first)]
    out[tuple(last)] += 0.5 * arr[tuple(last)]
    return out


def hessian_arrays(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(dxx, dyy, dxy) of a (height, width) array."""
    dxx = d2_filter(arr, axis=1)
    dyy = d2_filter(arr, axis=0)
    dxy = dc_filter(dc_filter(arr, axis=1), axis=0)
    return dxx, dyy, dxy


def hessian_adjoint_arrays(zxx: np.ndarray, zyy: np.ndarray, zxy: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`hessian_arrays`: folds a 3-channel field back."""
    out = d2_filter_adjoint(zxx, axis=1)
    out += d2_filter_adjoint(zyy, axis=0)
    out += dc_filter_adjoint(dc_filter_adjoint(zxy, axis=0), axis=1)
    return out


def roughness_arrays(arr: np.ndarray) -> np.ndarray:
    dxx, dyy, dxy = hessian_arrays(arr)
    return dxx * dxx + dyy * dyy + 2.0 * dxy * dxy


def eig2x2_arrays(a: np.ndarray, b: np.ndarray, d: np.ndarray):
    """Closed-form eigendecomposition of per-pixel [[a, b], [b, d]].

    Returns (lam1, lam2, e1, e2) with lam1 >= lam2 and eigenvectors stacked
    on the last axis.  Uses the half-angle form theta = atan2(2b, a-d)/2,
    which is branch-free and maps the degenerate case to the identity basis.
    Eigenvector signs are canonicalized so the first nonzero component is
    nonnegative.
    """
    half_trace = 0.5 * (a + d)
    half_gap = 0.5 * np.hypot(a - d, 2.0 * b)
    lam1 = half_trace + half_gap
    lam2 = half_trace - half_gap
    theta = 0.5 * np.arctan2(2.0 * b, a - d)
    ct = np.cos(theta)
    st = np.sin(theta)
    e1 = np.stack([ct, st], axis=-1)
    e2 = np.stack([-st, ct], axis=-1)
    for e in (e1, e2):
        ex, ey = e[..., 0], e[..., 1]
        flip = (ex < 0) | ((ex == 0) & (ey < 0))
        e[flip] *= -1.0
    return lam1, lam2, e1, e2


def quadratic_form_coeffs(d1: np.ndarray, d2: np.ndarray):
    """Per-pixel weights (on dxx, dyy, dxy) of the bilinear form d1^T H d2."""
    a = d1[..., 0] * d2[..., 0]
    b = d1[..., 1] * d2[..., 1]
    c = d1[..., 0] * d2[..., 1] + d1[..., 1] * d2[..., 0]
    return a, b, c


@dataclass(frozen=True)
class HessianField:
    """Per-pixel symmetric 2x2 second-derivative matrices as three channels."""

    grid: GridSpec
    dxx: Image
    dyy: Image
    dxy: Image


@dataclass(frozen=True)
class EigenField:
    """Eigenvalues (lam1 >= lam2) and orthonormal eigenvector fields."""

    grid: GridSpec
    lam1: Image
    lam2: Image
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        for name in ("e1", "e2"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != self.grid.shape + (2,):
                raise ValueError(f"{name} must have shape {self.grid.shape + (2,)}")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _require_size(img: Image, minimum: int = 3) -> None:
    if img.grid.width < minimum or img.grid.height < minimum:
        raise ImageTooSmall(f"need at least {minimum}x{minimum}, got {img.grid.width}x{img.grid.height}")


def apply_hessian(u: Image, boundary: str = "symmetric") -> HessianField:
    """Hessian channels of an image (>= 3x3) under mirror extension."""
    if boundary != "symmetric":
        raise ValueError(f"unsupported boundary rule {boundary!r}; only 'symmetric' is implemented")
    _require_size(u)
    dxx, dyy, dxy = hessian_arrays(u.data)
    g = u.grid
    return HessianField(g, Image(g, dxx, "dxx"), Image(g, dyy, "dyy"), Image(g, dxy, "dxy"))


def eig2x2(field: HessianField) -> EigenField:
    """Per-pixel closed-form eigendecomposition of a Hessian field."""
    lam1, lam2, e1, e2 = eig2x2_arrays(field.dxx.data, field.dxy.data, field.dyy.data)
    g = field.grid
    return EigenField(g, Image(g, lam1, "lam1"), Image(g, lam2, "lam2"), e1, e2)


def directional_dd(u: Image, dirs: EigenField, which) -> Image:
    """Directional second derivative d1^T H(u) d2 along guide directions.

    ``which`` selects the direction pair: 1 -> (e1, e1), 2 -> (e2, e2),
    "cross" -> (e1, e2).
    """
    if dirs.grid != u.grid:
        raise GridMismatch(f"direction grid {dirs.grid} != image grid {u.grid}")
    _require_size(u)
    if which == 1:
        pair = (dirs.e1, dirs.e1)
    elif which == 2:
        pair = (dirs.e2, dirs.e2)
    elif which == "cross":
        pair = (dirs.e1, dirs.e2)
    else:
        raise ValueError(f"which must be 1, 2 or 'cross', got {which!r}")
    a, b, c = quadratic_form_coeffs(*pair)
    dxx, dyy, dxy = hessian_arrays(u.data)
    return Image(u.grid, a * dxx + b * dyy + c * dxy, channel=f"dd{which}")


def roughness_image(u: Image) -> Image:
    """Squared Frobenius norm of the per-pixel Hessian: dxx^2 + dyy^2 + 2 dxy^2."""
    _require_size(u)
    return Image(u.grid, roughness_arrays(u.data), channel="roughness")
