"""Minimize the reconstruction costs.

The cost family is

    J(u) = sum_y c(y) (h(y) - (M u)(y))^2 + lam * R(M u)  +  box[0, m](u)

where M is an optional rational upsampler from the variable grid to the data
grid and R is one of: quadratic roughness, roughness^(p/2), the reweighted
baseline, or the structure-adaptive quadratic penalty.

Strategy: two-block ADMM.  The split variable carries the box constraint on
the variable grid (plus, for the p = 1 penalty, the derivative stack that is
shrunk in closed form).  Every u-update is a conjugate-gradient solve of the
smooth normal equations in operator form; no matrices are ever assembled for
the data/regularizer terms.  Fractional exponents (p < 2 except 1, or the
reweighted penalty with r < 1) run an outer majorize-minimize loop that
freezes per-pixel weights and reuses the quadratic path.

The solver tracks the best feasible iterate by true cost and never returns a
candidate worse than its initialization.  When no bound is active, a final
"interior polish" CG solve of the unconstrained problem recovers the exact
minimizer, which is also the constrained one in that case.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace

import numpy as np

from .binning import BinnedMeasurement
from .diffops import hessian_adjoint_arrays, hessian_arrays, roughness_arrays
from .errors import GridMismatch, MissingGuide, NonFiniteCost
from .gridcore import GridSpec, Image, RegParams
from .regularizers import StructureGuide, merr_gradient_arrays
from .resampling import ResampleOp, SeparableResampler, separable_resampler

__all__ = [
    "SolveSpec",
    "SolveReport",
    "SolverOptions",
    "eval_cost",
    "cost_gradient",
    "box_violation",
    "solve",
    "default_bound",
]

_REG_KINDS = ("quadratic", "lp", "msda", "merr")
_FEAS_SLACK = 1e-9


@dataclass(frozen=True)
class SolveSpec:
    """One reconstruction problem: data, regularizer, geometry, start point."""

    data: BinnedMeasurement
    reg_kind: str
    params: RegParams
    guide: StructureGuide | None = None
    upsampler: ResampleOp | None = None
    variable_grid: GridSpec | None = None
    init: Image | None = None

    def __post_init__(self):
        if self.reg_kind not in _REG_KINDS:
            raise ValueError(f"reg_kind must be one of {_REG_KINDS}, got {self.reg_kind!r}")
        if self.reg_kind in ("msda", "merr"):
            if self.guide is None:
                raise MissingGuide(f"reg_kind {self.reg_kind!r} needs a structure guide")
            if self.guide.v.grid != self.data.grid:
                raise GridMismatch("guide must live on the data grid")
        elif self.guide is not None:
            raise ValueError(f"reg_kind {self.reg_kind!r} does not take a guide")
        vg = self.variable_grid or self.data.grid
        object.__setattr__(self, "variable_grid", vg)
        if self.upsampler is None or self.upsampler.is_identity:
            if vg != self.data.grid:
                raise GridMismatch("identity upsampler requires variable grid == data grid")
        else:
            ok = (
                vg.width == vg.height == self.upsampler.from_size
                and self.data.grid.width == self.data.grid.height == self.upsampler.to_size
            )
            if not ok:
                raise GridMismatch(
                    f"upsampler {self.upsampler.from_size}->{self.upsampler.to_size} does not map "
                    f"{vg.width}x{vg.height} onto {self.data.grid.width}x{self.data.grid.height}"
                )
        if self.init is not None and self.init.grid != vg:
            raise GridMismatch("init must live on the variable grid")


@dataclass(frozen=True)
class SolverOptions:
    tol_rel: float = 1e-5
    max_iter: int = 300
    cg_tol: float = 1e-10
    cg_max_iter: int = 200
    irls_iters: int = 8
    rho0: float | None = None
    polish: bool = True
    verbose: bool = False


@dataclass(frozen=True)
class SolveReport:
    solution: Image
    iterations: int
    final_cost: float
    primal_residual: float
    dual_residual: float
    converged: bool
    init_cost: float


def default_bound(data: BinnedMeasurement) -> float:
    """Pixel upper bound when none is given: 1.05 * max(h), floored away from 0."""
    return max(1.05 * float(np.max(data.h.data)), 1e-9)


def _resolve_bound(spec: SolveSpec) -> float:
    if spec.params.bound_m is not None:
        return spec.params.bound_m
    return default_bound(spec.data)


class _Operators:
    """Shared linear machinery of one solve: upsampler, data term, regularizer."""

    def __init__(self, spec: SolveSpec):
        self.spec = spec
        self.c = spec.data.c.data
        self.h = spec.data.h.data
        self.lam = spec.params.lam
        self.M: SeparableResampler | None = separable_resampler(spec.upsampler)
        self.bound = _resolve_bound(spec)
        self.guide = spec.guide
        if spec.reg_kind == "msda":
            ev = roughness_arrays(self.guide.v.data)
            self.msda_kappa = (spec.params.epsilon + ev) ** (-spec.params.q)
        else:
            self.msda_kappa = None

    # -- geometry ----------------------------------------------------------
    def up(self, x: np.ndarray) -> np.ndarray:
        return x if self.M is None else self.M.forward(x)

    def down(self, y: np.ndarray) -> np.ndarray:
        return y if self.M is None else self.M.adjoint(y)

    # -- data term ---------------------------------------------------------
    def data_cost(self, w: np.ndarray) -> float:
        d = w - self.h
        return float(np.sum(self.c * d * d))

    def data_hess_w(self, w: np.ndarray) -> np.ndarray:
        return 2.0 * self.c * w

    def data_b_w(self) -> np.ndarray:
        return 2.0 * self.c * self.h

    # -- regularizer values on the data grid --------------------------------
    def reg_cost(self, w: np.ndarray) -> float:
        kind, p = self.spec.reg_kind, self.spec.params.p
        E = None
        if kind == "quadratic" or (kind == "lp" and p == 2.0):
            E = roughness_arrays(w)
            return float(np.sum(E))
        if kind == "lp":
            E = roughness_arrays(w)
            return float(np.sum(E ** (p / 2.0)))
        if kind == "msda":
            E = roughness_arrays(w)
            return float(np.sum(self.msda_kappa * E ** self.spec.params.r))
        r1, r2, r12 = _merr_residuals(w, self.guide)
        g = self.guide
        return float(
            np.sum(r1 * r1 / g.w1.data)
            + np.sum(r2 * r2 / g.w2.data)
            + np.sum(r12 * r12 / g.w12.data)
        )

    def cost(self, u: np.ndarray) -> float:
        w = self.up(u)
        return self.data_cost(w) + self.lam * self.reg_cost(w)

    def cost_grad(self, u: np.ndarray) -> np.ndarray:
        """Gradient of the smooth cost; only defined for the quadratic family."""
        w = self.up(u)
        g_w = 2.0 * self.c * (w - self.h)
        kind, p = self.spec.reg_kind, self.spec.params.p
        if kind == "quadratic" or (kind == "lp" and p == 2.0):
            dxx, dyy, dxy = hessian_arrays(w)
            g_w += self.lam * 2.0 * hessian_adjoint_arrays(dxx, dyy, 2.0 * dxy)
        elif kind == "merr":
            g_w += self.lam * merr_gradient_arrays(w, self.guide)
        else:
            raise ValueError(f"no closed-form gradient for reg_kind {self.spec.reg_kind!r}")
        return self.down(g_w)


def _merr_residuals(w: np.ndarray, guide: StructureGuide):
    dxx, dyy, dxy = hessian_arrays(w)
    (a1, b1, c1), (a2, b2, c2), (a12, b12, c12) = guide.direction_coeffs()
    r1 = a1 * dxx + b1 * dyy + c1 * dxy - guide.d1v.data
    r2 = a2 * dxx + b2 * dyy + c2 * dxy - guide.d2v.data
    r12 = a12 * dxx + b12 * dyy + c12 * dxy
    return r1, r2, r12


def eval_cost(u: Image, spec: SolveSpec) -> float:
    """Data term plus weighted regularizer of a candidate on the variable grid.

    Box violations are not folded in; check feasibility separately against
    ``[0, bound_m]``.
    """
    if u.grid != spec.variable_grid:
        raise GridMismatch(f"candidate grid {u.grid} != variable grid {spec.variable_grid}")
    return _Operators(spec).cost(u.data)


def cost_gradient(u: Image, spec: SolveSpec) -> Image:
    """Exact gradient of :func:`eval_cost` for the smooth (quadratic-family) costs."""
    if u.grid != spec.variable_grid:
        raise GridMismatch(f"candidate grid {u.grid} != variable grid {spec.variable_grid}")
    return Image(u.grid, _Operators(spec).cost_grad(u.data))


def box_violation(u: Image, spec: SolveSpec) -> float:
    """Largest excursion of a candidate outside [0, bound_m]; 0 when feasible.

    The indicator part of the cost is reported here instead of being folded
    into :func:`eval_cost`, which stays finite.
    """
    if u.grid != spec.variable_grid:
        raise GridMismatch(f"candidate grid {u.grid} != variable grid {spec.variable_grid}")
    bound = _resolve_bound(spec)
    return float(max(0.0, -float(u.data.min()), float(u.data.max()) - bound))


def _cg(apply_A, b, x0, tol, max_iter, inv_diag=None) -> np.ndarray:
    """Conjugate gradients on an SPD operator, warm-started at x0.

    ``inv_diag`` enables Jacobi preconditioning; the adaptive regularizer
    weights span many orders of magnitude and plain CG stalls on them.
    """
    x = x0.copy()
    r = b - apply_A(x)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b)
    threshold = (tol * b_norm) ** 2
    z = r if inv_diag is None else inv_diag * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    for _ in range(max_iter):
        if float(np.vdot(r, r)) <= threshold:
            break
        Ap = apply_A(p)
        denom = float(np.vdot(p, Ap))
        if denom <= 0:
            break  # numerical loss of positive definiteness
        alpha = rz / denom
        x += alpha * p
        r -= alpha * Ap
        z = r if inv_diag is None else inv_diag * r
        rz_new = float(np.vdot(r, z))
        p *= rz_new / rz
        p += z
        rz = rz_new
    return x


def _shift_accumulate(acc: np.ndarray, field: np.ndarray, dy: int, dx: int) -> None:
    """acc[k] += field[k - (dy, dx)] over the in-range region."""
    H, W = field.shape
    ty = slice(max(dy, 0), H + min(dy, 0))
    tx = slice(max(dx, 0), W + min(dx, 0))
    sy = slice(max(-dy, 0), H + min(-dy, 0))
    sx = slice(max(-dx, 0), W + min(-dx, 0))
    acc[ty, tx] += field[sy, sx]


def _composite_stencil_diag(a: np.ndarray, b: np.ndarray, c: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Diagonal of L^T diag(w) L for L = a*dxx + b*dyy + c*dxy (interior rows)."""
    diag = np.zeros_like(w)
    terms = [
        ((0, -1), a * a),
        ((0, 1), a * a),
        ((-1, 0), b * b),
        ((1, 0), b * b),
        ((0, 0), 4.0 * (a + b) ** 2),
    ]
    corner = c * c / 16.0
    for dy in (-1, 1):
        for dx in (-1, 1):
            terms.append(((dy, dx), corner))
    for (dy, dx), s2 in terms:
        _shift_accumulate(diag, w * s2, dy, dx)
    return diag


class _QuadraticSmoothCost:
    """Hessian-vector products of data + lam * (quadratic regularizer)."""

    def __init__(self, ops: _Operators, pixel_weights: np.ndarray | None = None):
        self.ops = ops
        kind = ops.spec.reg_kind
        self.is_merr = kind == "merr"
        self.pixel_weights = pixel_weights
        if self.is_merr:
            g = ops.guide
            self._coeffs = g.direction_coeffs()
            self._inv_w = (1.0 / g.w1.data, 1.0 / g.w2.data, 1.0 / g.w12.data)

    def _reg_hess_w(self, w: np.ndarray) -> np.ndarray:
        if self.is_merr:
            dxx, dyy, dxy = hessian_arrays(w)
            (a1, b1, c1), (a2, b2, c2), (a12, b12, c12) = self._coeffs
            iw1, iw2, iw12 = self._inv_w
            s1 = (a1 * dxx + b1 * dyy + c1 * dxy) * iw1
            s2 = (a2 * dxx + b2 * dyy + c2 * dxy) * iw2
            s12 = (a12 * dxx + b12 * dyy + c12 * dxy) * iw12
            zxx = a1 * s1 + a2 * s2 + a12 * s12
            zyy = b1 * s1 + b2 * s2 + b12 * s12
            zxy = c1 * s1 + c2 * s2 + c12 * s12
            return 2.0 * hessian_adjoint_arrays(zxx, zyy, zxy)
        wgt = self.pixel_weights
        dxx, dyy, dxy = hessian_arrays(w)
        if wgt is None:
            return 2.0 * hessian_adjoint_arrays(dxx, dyy, 2.0 * dxy)
        return 2.0 * hessian_adjoint_arrays(wgt * dxx, wgt * dyy, 2.0 * wgt * dxy)

    def hess_vec(self, u: np.ndarray) -> np.ndarray:
        w = self.ops.up(u)
        out_w = self.ops.data_hess_w(w) + self.ops.lam * self._reg_hess_w(w)
        return self.ops.down(out_w)

    def diag_field(self) -> np.ndarray:
        """Jacobi estimate of the Hessian diagonal on the variable grid."""
        ones = np.ones_like(self.ops.c)
        if self.is_merr:
            (a1, b1, c1), (a2, b2, c2), (a12, b12, c12) = self._coeffs
            iw1, iw2, iw12 = self._inv_w
            reg = _composite_stencil_diag(a1, b1, c1, iw1)
            reg += _composite_stencil_diag(a2, b2, c2, iw2)
            reg += _composite_stencil_diag(a12, b12, c12, iw12)
        else:
            wgt = ones if self.pixel_weights is None else self.pixel_weights
            zero = np.zeros_like(wgt)
            reg = _composite_stencil_diag(ones, zero, zero, wgt)
            reg += _composite_stencil_diag(zero, ones, zero, wgt)
            reg += _composite_stencil_diag(zero, zero, ones, 2.0 * wgt)
        field = 2.0 * self.ops.c + self.ops.lam * 2.0 * reg
        if self.ops.M is None:
            return field
        return self.ops.M.diag_pullback(field)

    def linear_term(self) -> np.ndarray:
        b_w = self.ops.data_b_w()
        if self.is_merr:
            g = self.ops.guide
            (a1, b1, c1), (a2, b2, c2), _ = self._coeffs
            s1 = g.d1v.data / g.w1.data
            s2 = g.d2v.data / g.w2.data
            zxx = a1 * s1 + a2 * s2
            zyy = b1 * s1 + b2 * s2
            zxy = c1 * s1 + c2 * s2
            b_w = b_w + self.ops.lam * 2.0 * hessian_adjoint_arrays(zxx, zyy, zxy)
        return self.ops.down(b_w)


class _BestTracker:
    """Keeps the best feasible candidate by true cost."""

    def __init__(self, ops: _Operators):
        self.ops = ops
        self.best_u = None
        self.best_cost = np.inf

    def offer(self, u: np.ndarray) -> float:
        cost = self.ops.cost(u)
        if not np.isfinite(cost):
            raise NonFiniteCost("cost diverged to a non-finite value; adjust lam/penalty")
        if cost < self.best_cost:
            self.best_cost = cost
            self.best_u = u.copy()
        return cost


def _progress(options: SolverOptions, it: int, cost: float, r_pri: float, r_dua: float) -> None:
    if options.verbose:
        print(f"{it},{cost:.10g},{r_pri:.4g},{r_dua:.4g}", file=sys.stderr)


def _admm_smooth(
    ops: _Operators,
    smooth: _QuadraticSmoothCost,
    u0: np.ndarray,
    options: SolverOptions,
    tracker: _BestTracker,
):
    """ADMM for (smooth quadratic cost) + box, split z = u."""
    m = ops.bound
    rho0 = options.rho0 if options.rho0 is not None else ops.lam
    rho = float(rho0)
    rho_lo, rho_hi = rho * 2.0**-40, rho * 2.0**40
    b_lin = smooth.linear_term()
    diag = smooth.diag_field()
    u = u0.copy()
    z = np.clip(u, 0.0, m)
    y = np.zeros_like(u)
    r_pri = r_dua = np.inf
    converged = False
    it = 0
    for it in range(1, options.max_iter + 1):
        rhs = b_lin + rho * (z - y)
        inv_diag = 1.0 / (diag + rho)
        u = _cg(
            lambda x: smooth.hess_vec(x) + rho * x,
            rhs,
            u,
            options.cg_tol,
            options.cg_max_iter,
            inv_diag,
        )
        z_old = z
        z = np.clip(u + y, 0.0, m)
        y = y + u - z
        r_pri = float(np.linalg.norm(u - z))
        r_dua = rho * float(np.linalg.norm(z - z_old))
        cost_z = tracker.offer(z)
        _progress(options, it, cost_z, r_pri, r_dua)
        eps_pri = options.tol_rel * max(float(np.linalg.norm(u)), float(np.linalg.norm(z)), 1.0)
        eps_dua = options.tol_rel * max(rho * float(np.linalg.norm(y)), 1.0)
        if r_pri <= eps_pri and r_dua <= eps_dua:
            converged = True
            break
        if r_pri > 10.0 * r_dua and rho < rho_hi:
            rho *= 2.0
            y /= 2.0
        elif r_dua > 10.0 * r_pri and rho > rho_lo:
            rho /= 2.0
            y *= 2.0
    if options.polish:
        _interior_polish(ops, smooth, b_lin, u, options, tracker)
    return it, r_pri, r_dua, converged


def _interior_polish(ops, smooth, b_lin, u_start, options: SolverOptions, tracker: _BestTracker):
    """If the unconstrained minimizer is (numerically) feasible, it is the
    constrained one too; accept it when it wins on cost."""
    diag = smooth.diag_field()
    floor = max(float(np.max(diag)) * 1e-14, 1e-300)
    inv_diag = 1.0 / np.maximum(diag, floor)
    u_free = _cg(smooth.hess_vec, b_lin, u_start, options.cg_tol, 4 * options.cg_max_iter, inv_diag)
    lo, hi = float(np.min(u_free)), float(np.max(u_free))
    if lo >= -_FEAS_SLACK and hi <= ops.bound + _FEAS_SLACK:
        tracker.offer(np.clip(u_free, 0.0, ops.bound))


def _group_shrink(v: np.ndarray, tau: float) -> np.ndarray:
    """Per-pixel block soft threshold of a 3-channel stack."""
    norms = np.sqrt(np.sum(v * v, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(norms > tau, 1.0 - tau / np.where(norms > 0, norms, 1.0), 0.0)
    return v * factor


_SQRT2 = np.sqrt(2.0)


def _admm_group_l1(ops: _Operators, u0: np.ndarray, options: SolverOptions, tracker: _BestTracker):
    """ADMM for data + lam * sum_y ||stack(Hess(Mu))(y)||_2 + box.

    Split: z0 = u carries the box; z1 = G u carries the derivative stack with
    the sqrt(2) channel weight, shrunk blockwise in closed form.
    """

    def G(u):
        dxx, dyy, dxy = hessian_arrays(ops.up(u))
        return np.stack([dxx, dyy, _SQRT2 * dxy])

    def GT(zeta):
        return ops.down(hessian_adjoint_arrays(zeta[0], zeta[1], _SQRT2 * zeta[2]))

    m = ops.bound
    lam = ops.lam
    rho = float(options.rho0 if options.rho0 is not None else max(ops.lam, 1e-3))
    rho_lo, rho_hi = rho * 2.0**-40, rho * 2.0**40
    u = u0.copy()
    z0 = np.clip(u, 0.0, m)
    z1 = G(u)
    y0 = np.zeros_like(u)
    y1 = np.zeros_like(z1)
    b_data = ops.down(ops.data_b_w())
    ones = np.ones_like(ops.c)
    zero = np.zeros_like(ops.c)
    gtg_diag = (
        _composite_stencil_diag(ones, zero, zero, ones)
        + _composite_stencil_diag(zero, ones, zero, ones)
        + _composite_stencil_diag(zero, zero, ones, 2.0 * ones)
    )
    data_diag = 2.0 * ops.c
    r_pri = r_dua = np.inf
    converged = False
    it = 0
    for it in range(1, options.max_iter + 1):

        def apply_A(x):
            return ops.down(ops.data_hess_w(ops.up(x))) + rho * x + rho * GT(G(x))

        field = data_diag + rho * gtg_diag
        diag = field if ops.M is None else ops.M.diag_pullback(field)
        inv_diag = 1.0 / (diag + rho)
        rhs = b_data + rho * (z0 - y0) + rho * GT(z1 - y1)
        u = _cg(apply_A, rhs, u, options.cg_tol, options.cg_max_iter, inv_diag)
        Gu = G(u)
        z0_old, z1_old = z0, z1
        z0 = np.clip(u + y0, 0.0, m)
        z1 = _group_shrink(Gu + y1, lam / rho)
        y0 = y0 + u - z0
        y1 = y1 + Gu - z1
        r_pri = float(np.sqrt(np.linalg.norm(u - z0) ** 2 + np.linalg.norm(Gu - z1) ** 2))
        r_dua = rho * float(np.linalg.norm((z0 - z0_old) + GT(z1 - z1_old)))
        cost_z = tracker.offer(z0)
        _progress(options, it, cost_z, r_pri, r_dua)
        scale = max(
            float(np.linalg.norm(u)) + float(np.linalg.norm(Gu)),
            float(np.linalg.norm(z0)) + float(np.linalg.norm(z1)),
            1.0,
        )
        eps_pri = options.tol_rel * scale
        eps_dua = options.tol_rel * max(rho * float(np.linalg.norm(y0 + GT(y1))), 1.0)
        if r_pri <= eps_pri and r_dua <= eps_dua:
            converged = True
            break
        if r_pri > 10.0 * r_dua and rho < rho_hi:
            rho *= 2.0
            y0 /= 2.0
            y1 /= 2.0
        elif r_dua > 10.0 * r_pri and rho > rho_lo:
            rho /= 2.0
            y0 *= 2.0
            y1 *= 2.0
    return it, r_pri, r_dua, converged


def _irls_weights(ops: _Operators, u: np.ndarray) -> np.ndarray:
    """Majorizer weights at the current iterate for the fractional penalties."""
    E = roughness_arrays(ops.up(u))
    eps = ops.spec.params.epsilon
    if ops.spec.reg_kind == "msda":
        r = ops.spec.params.r
        if r == 1.0:
            return ops.msda_kappa.copy()
        return ops.msda_kappa * r * (eps + E) ** (r - 1.0)
    p = ops.spec.params.p
    return (p / 2.0) * (eps + E) ** (p / 2.0 - 1.0)


def _default_init(spec: SolveSpec, ops: _Operators) -> np.ndarray:
    from .resampling import resample  # local import to keep module load light

    h_img = spec.data.h
    if spec.upsampler is None or spec.upsampler.is_identity:
        down = h_img.data
    else:
        down_op = ResampleOp.between(spec.upsampler.to_size, spec.upsampler.from_size)
        down = resample(h_img, down_op).data
    return np.clip(down, 0.0, ops.bound)


def solve(spec: SolveSpec, options: SolverOptions | None = None) -> SolveReport:
    """Minimize the cost described by ``spec``; deterministic for fixed inputs.

    The returned solution is feasible (inside ``[0, bound_m]``) and never has
    a higher cost than the initialization.
    """
    options = options or SolverOptions()
    ops = _Operators(spec)
    u0 = spec.init.data if spec.init is not None else _default_init(spec, ops)
    u0 = np.clip(u0, 0.0, ops.bound)
    tracker = _BestTracker(ops)
    init_cost = tracker.offer(u0)

    kind, p, r = spec.reg_kind, spec.params.p, spec.params.r
    if kind == "quadratic" or (kind == "lp" and p == 2.0) or kind == "merr":
        smooth = _QuadraticSmoothCost(ops)
        it, r_pri, r_dua, converged = _admm_smooth(ops, smooth, u0, options, tracker)
    elif kind == "lp" and p == 1.0:
        it, r_pri, r_dua, converged = _admm_group_l1(ops, u0, options, tracker)
    elif kind == "lp" or kind == "msda":
        if kind == "msda" and r > 1.0:
            raise ValueError("reweighted roughness exponent r > 1 is not supported")
        outer = 1 if (kind == "msda" and r == 1.0) else options.irls_iters
        inner_opts = replace(options, max_iter=max(10, options.max_iter // max(outer, 1)))
        u = u0
        it = 0
        r_pri = r_dua = np.inf
        converged = False
        for _ in range(outer):
            wgt = _irls_weights(ops, tracker.best_u if tracker.best_u is not None else u)
            smooth = _QuadraticSmoothCost(ops, pixel_weights=wgt)
            sub_it, r_pri, r_dua, converged = _admm_smooth(ops, smooth, u, inner_opts, tracker)
            it += sub_it
            u = tracker.best_u.copy()
    else:  # pragma: no cover - guarded by SolveSpec validation
        raise ValueError(f"unhandled reg_kind {kind!r}")

    best = tracker.best_u
    sol = Image(spec.variable_grid, np.clip(best, 0.0, ops.bound))
    return SolveReport(
        solution=sol,
        iterations=it,
        final_cost=tracker.best_cost,
        primal_residual=float(r_pri),
        dual_residual=float(r_dua),
        converged=bool(converged),
        init_cost=init_cost,
    )
