"""Roughness penalties used by the reconstruction costs.

Four families are provided:

* ``reg_lp``       -- sum over pixels of the Hessian energy to the power p/2
                      (p = 2 is the quadratic roughness, p = 1 the sparse one);
* ``reg_schatten`` -- eigenvalue p-norms of the per-pixel Hessian;
* ``reg_msda``     -- roughness of ``u`` reweighted by the inverse roughness
                      of a guide image (the earlier multiresolution baseline);
* ``reg_merr``     -- directionally adaptive quadratic penalty whose targets
                      and variances come from a guide's Hessian eigen-system.

The adaptive penalty compares directional second derivatives of the candidate
(taken along the guide's eigen-directions) against the guide's own eigenvalues,
weighs each residual by (epsilon + |eigenvalue|)^q, and adds a cross term that
discourages energy along the mixed direction where the guide has none.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffops import (
    EigenField,
    apply_hessian,
    eig2x2,
    eig2x2_arrays,
    hessian_adjoint_arrays,
    hessian_arrays,
    quadratic_form_coeffs,
    roughness_arrays,
)
from .errors import GridMismatch, ImageTooSmall
from .gridcore import Image, RegParams

__all__ = [
    "StructureGuide",
    "build_guide",
    "reg_lp",
    "reg_schatten",
    "reg_msda",
    "reg_merr",
    "grad_reg_merr",
]


@dataclass(frozen=True)
class StructureGuide:
    """Eigen-directions, targets and variance weights derived from a guide image."""

    v: Image
    eig: EigenField
    w1: Image
    w2: Image
    w12: Image
    d1v: Image
    d2v: Image

    def direction_coeffs(self):
        """Per-pixel (dxx, dyy, dxy) weights of the three directional forms."""
        c1 = quadratic_form_coeffs(self.eig.e1, self.eig.e1)
        c2 = quadratic_form_coeffs(self.eig.e2, self.eig.e2)
        c12 = quadratic_form_coeffs(self.eig.e1, self.eig.e2)
        return c1, c2, c12


def _require_min_size(img: Image) -> None:
    if img.grid.width < 3 or img.grid.height < 3:
        raise ImageTooSmall(f"need at least 3x3, got {img.grid.width}x{img.grid.height}")


def build_guide(v: Image, params: RegParams) -> StructureGuide:
    """Precompute the eigen-system and variance weights of a guide image.

    The directional targets d1v/d2v are evaluated through the same quadratic
    forms used on candidates, so a candidate equal to the guide has exactly
    zero residual.
    """
    _require_min_size(v)
    eig = eig2x2(apply_hessian(v))
    q, eps = params.q, params.epsilon
    dxx, dyy, dxy = hessian_arrays(v.data)
    a1, b1, c1 = quadratic_form_coeffs(eig.e1, eig.e1)
    a2, b2, c2 = quadratic_form_coeffs(eig.e2, eig.e2)
    d1v = a1 * dxx + b1 * dyy + c1 * dxy
    d2v = a2 * dxx + b2 * dyy + c2 * dxy
    w1 = (eps + np.abs(eig.lam1.data)) ** q
    w2 = (eps + np.abs(eig.lam2.data)) ** q
    w12 = (eps + np.abs(eig.lam1.data)) ** (q / 2) * (eps + np.abs(eig.lam2.data)) ** (q / 2)
    g = v.grid
    return StructureGuide(
        v=v,
        eig=eig,
        w1=Image(g, w1, "w1"),
        w2=Image(g, w2, "w2"),
        w12=Image(g, w12, "w12"),
        d1v=Image(g, d1v, "d1v"),
        d2v=Image(g, d2v, "d2v"),
    )


def reg_lp(u: Image, p: float) -> float:
    """Sum over pixels of (Hessian energy)^(p/2), p in (0, 2]."""
    if not 0 < p <= 2:
        raise ValueError(f"p must lie in (0, 2], got {p}")
    _require_min_size(u)
    E = roughness_arrays(u.data)
    if p == 2.0:
        return float(np.sum(E))
    return float(np.sum(E ** (p / 2.0)))


def reg_schatten(u: Image, p: float) -> float:
    """Sum over pixels of the eigenvalue p-norm of the Hessian, p >= 1."""
    if p < 1:
        raise ValueError(f"Schatten order must be >= 1, got {p}")
    _require_min_size(u)
    dxx, dyy, dxy = hessian_arrays(u.data)
    lam1, lam2, _, _ = eig2x2_arrays(dxx, dxy, dyy)
    return float(np.sum((np.abs(lam1) ** p + np.abs(lam2) ** p) ** (1.0 / p)))


def reg_msda(u: Image, v: Image, q: float, r: float, eps: float) -> float:
    """Roughness of u to the power r, reweighted by (eps + roughness of v)^-q."""
    if u.grid != v.grid:
        raise GridMismatch(f"u grid {u.grid} != v grid {v.grid}")
    _require_min_size(u)
    Ev = roughness_arrays(v.data)
    Eu = roughness_arrays(u.data)
    return float(np.sum((eps + Ev) ** (-q) * Eu**r))


def _merr_terms(u_data: np.ndarray, guide: StructureGuide):
    dxx, dyy, dxy = hessian_arrays(u_data)
    (a1, b1, c1), (a2, b2, c2), (a12, b12, c12) = guide.direction_coeffs()
    r1 = a1 * dxx + b1 * dyy + c1 * dxy - guide.d1v.data
    r2 = a2 * dxx + b2 * dyy + c2 * dxy - guide.d2v.data
    r12 = a12 * dxx + b12 * dyy + c12 * dxy
    return r1, r2, r12


def reg_merr(u: Image, guide: StructureGuide) -> float:
    """Directionally adaptive quadratic penalty against a structure guide."""
    if u.grid != guide.v.grid:
        raise GridMismatch(f"u grid {u.grid} != guide grid {guide.v.grid}")
    r1, r2, r12 = _merr_terms(u.data, guide)
    return float(
        np.sum(r1 * r1 / guide.w1.data)
        + np.sum(r2 * r2 / guide.w2.data)
        + np.sum(r12 * r12 / guide.w12.data)
    )


def grad_reg_merr(u: Image, guide: StructureGuide) -> Image:
    """Exact gradient of :func:`reg_merr` with respect to u."""
    if u.grid != guide.v.grid:
        raise GridMismatch(f"u grid {u.grid} != guide grid {guide.v.grid}")
    grad = merr_gradient_arrays(u.data, guide)
    return Image(u.grid, grad, channel="grad")


def merr_gradient_arrays(u_data: np.ndarray, guide: StructureGuide) -> np.ndarray:
    r1, r2, r12 = _merr_terms(u_data, guide)
    s1 = r1 / guide.w1.data
    s2 = r2 / guide.w2.data
    s12 = r12 / guide.w12.data
    (a1, b1, c1), (a2, b2, c2), (a12, b12, c12) = guide.direction_coeffs()
    zxx = a1 * s1 + a2 * s2 + a12 * s12
    zyy = b1 * s1 + b2 * s2 + b12 * s12
    zxy = c1 * s1 + c2 * s2 + c12 * s12
    return 2.0 * hessian_adjoint_arrays(zxx, zyy, zxy)
