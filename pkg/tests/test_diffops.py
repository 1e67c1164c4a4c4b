import numpy as np
import pytest

from scatrec.diffops import (
    apply_hessian,
    dc_filter,
    dc_filter_adjoint,
    d2_filter,
    d2_filter_adjoint,
    directional_dd,
    eig2x2,
    eig2x2_arrays,
    hessian_adjoint_arrays,
    hessian_arrays,
    roughness_image,
)
from scatrec.errors import GridMismatch, ImageTooSmall
from scatrec.gridcore import GridSpec, Image, image_from_array


def ramp_product(n=9):
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    return xx, yy


def test_hessian_of_constant_is_zero():
    u = image_from_array(np.full((7, 7), 3.25))
    H = apply_hessian(u)
    assert np.all(H.dxx.data == 0)
    assert np.all(H.dyy.data == 0)
    assert np.all(H.dxy.data == 0)


def test_hessian_of_x_squared():
    xx, _ = ramp_product(9)
    H = apply_hessian(image_from_array(xx**2))
    interior = (slice(1, -1), slice(1, -1))
    np.testing.assert_allclose(H.dxx.data[interior], 2.0, atol=1e-13)
    np.testing.assert_allclose(H.dyy.data, 0.0, atol=1e-13)
    np.testing.assert_allclose(H.dxy.data, 0.0, atol=1e-13)


def test_hessian_of_xy_cross_is_one():
    xx, yy = ramp_product(9)
    H = apply_hessian(image_from_array(xx * yy))
    interior = (slice(1, -1), slice(1, -1))
    # hand-computed oracle on the bilinear ramp:
    # ((x+1)(y+1) - (x+1)(y-1) - (x-1)(y+1) + (x-1)(y-1)) / 4 == 1
    np.testing.assert_allclose(H.dxy.data[interior], 1.0, atol=1e-13)
    np.testing.assert_allclose(H.dxx.data[interior], 0.0, atol=1e-13)
    np.testing.assert_allclose(H.dyy.data[interior], 0.0, atol=1e-13)


def test_hessian_rejects_tiny_images():
    with pytest.raises(ImageTooSmall):
        apply_hessian(image_from_array(np.ones((2, 5))))


def test_hessian_is_linear():
    rng = np.random.default_rng(0)
    u = rng.standard_normal((12, 11))
    w = rng.standard_normal((12, 11))
    a, b = 1.7, -0.3
    left = hessian_arrays(a * u + b * w)
    for chan, (lu, lw) in zip(left, zip(hessian_arrays(u), hessian_arrays(w))):
        np.testing.assert_allclose(chan, a * lu + b * lw, atol=1e-12)


def test_filter_adjoints_exact():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((10, 13))
    y = rng.standard_normal((10, 13))
    for fwd, adj in ((d2_filter, d2_filter_adjoint), (dc_filter, dc_filter_adjoint)):
        for axis in (0, 1):
            lhs = np.vdot(fwd(x, axis), y)
            rhs = np.vdot(x, adj(y, axis))
            assert lhs == pytest.approx(rhs, rel=1e-13)
    zxx, zyy, zxy = (rng.standard_normal((10, 13)) for _ in range(3))
    lhs = sum(np.vdot(c, z) for c, z in zip(hessian_arrays(x), (zxx, zyy, zxy)))
    rhs = np.vdot(x, hessian_adjoint_arrays(zxx, zyy, zxy))
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_eig_diagonal_case():
    lam1, lam2, e1, e2 = eig2x2_arrays(np.array(3.0), np.array(0.0), np.array(-1.0))
    assert lam1 == 3.0 and lam2 == -1.0
    np.testing.assert_allclose(e1, [1, 0])
    np.testing.assert_allclose(e2, [0, 1])


def test_eig_antidiagonal_case():
    lam1, lam2, e1, e2 = eig2x2_arrays(np.array(0.0), np.array(1.0), np.array(0.0))
    s = 1 / np.sqrt(2)
    assert lam1 == pytest.approx(1.0) and lam2 == pytest.approx(-1.0)
    np.testing.assert_allclose(e1, [s, s], atol=1e-15)
    np.testing.assert_allclose(e2, [s, -s], atol=1e-15)


def test_eig_degenerate_identity_basis():
    lam1, lam2, e1, e2 = eig2x2_arrays(np.array(2.0), np.array(0.0), np.array(2.0))
    assert lam1 == lam2 == 2.0
    np.testing.assert_allclose(e1, [1, 0])
    np.testing.assert_allclose(e2, [0, 1])


def test_eig_random_against_numpy_oracle():
    rng = np.random.default_rng(123)
    n = 100_000
    a = rng.standard_normal(n)
    b = rng.standard_normal(n)
    d = rng.standard_normal(n)
    lam1, lam2, e1, e2 = eig2x2_arrays(a, b, d)
    # orthonormality and ordering
    assert np.max(np.abs(np.sum(e1 * e2, axis=-1))) < 1e-12
    assert np.max(np.abs(np.sum(e1 * e1, axis=-1) - 1)) < 1e-12
    assert np.max(np.abs(np.sum(e2 * e2, axis=-1) - 1)) < 1e-12
    assert np.all(lam1 >= lam2)
    # reconstruction lam1 e1 e1^T + lam2 e2 e2^T == source
    rec_a = lam1 * e1[:, 0] ** 2 + lam2 * e2[:, 0] ** 2
    rec_d = lam1 * e1[:, 1] ** 2 + lam2 * e2[:, 1] ** 2
    rec_b = lam1 * e1[:, 0] * e1[:, 1] + lam2 * e2[:, 0] * e2[:, 1]
    assert np.max(np.abs(rec_a - a)) < 1e-12
    assert np.max(np.abs(rec_b - b)) < 1e-12
    assert np.max(np.abs(rec_d - d)) < 1e-12
    # eigenvalues against the general-purpose solver
    mats = np.empty((n, 2, 2))
    mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1] = a, b, b, d
    ref = np.linalg.eigvalsh(mats)  # ascending
    assert np.max(np.abs(lam1 - ref[:, 1])) < 1e-10
    assert np.max(np.abs(lam2 - ref[:, 0])) < 1e-10


def test_directional_dd_matches_eigenvalues_and_cross_zero():
    rng = np.random.default_rng(5)
    u = image_from_array(rng.standard_normal((16, 16)))
    eig = eig2x2(apply_hessian(u))
    d1 = directional_dd(u, eig, which=1)
    d2 = directional_dd(u, eig, which=2)
    cross = directional_dd(u, eig, which="cross")
    np.testing.assert_allclose(d1.data, eig.lam1.data, atol=1e-12)
    np.testing.assert_allclose(d2.data, eig.lam2.data, atol=1e-12)
    np.testing.assert_allclose(cross.data, 0.0, atol=1e-12)


def test_directional_dd_brute_force_oracle():
    rng = np.random.default_rng(6)
    u = image_from_array(rng.standard_normal((10, 9)))
    v = image_from_array(rng.standard_normal((10, 9)))
    eig = eig2x2(apply_hessian(v))
    got = directional_dd(u, eig, which=1).data
    dxx, dyy, dxy = hessian_arrays(u.data)
    for py in range(10):
        for px in range(9):
            H = np.array([[dxx[py, px], dxy[py, px]], [dxy[py, px], dyy[py, px]]])
            e = eig.e1[py, px]
            assert got[py, px] == pytest.approx(e @ H @ e, abs=1e-12)


def test_directional_dd_grid_mismatch():
    rng = np.random.default_rng(7)
    u = image_from_array(rng.standard_normal((8, 8)))
    eig = eig2x2(apply_hessian(image_from_array(rng.standard_normal((9, 9)))))
    with pytest.raises(GridMismatch):
        directional_dd(u, eig, which=1)


def test_trace_identity():
    rng = np.random.default_rng(8)
    u = image_from_array(rng.standard_normal((14, 12)))
    eig = eig2x2(apply_hessian(u))
    d1 = directional_dd(u, eig, which=1).data
    d2 = directional_dd(u, eig, which=2).data
    dxx, dyy, _ = hessian_arrays(u.data)
    np.testing.assert_allclose(d1 + d2, dxx + dyy, atol=1e-10)


def test_sign_flip_invariance_of_directional_dd():
    rng = np.random.default_rng(12)
    u = image_from_array(rng.standard_normal((9, 9)))
    v = image_from_array(rng.standard_normal((9, 9)))
    eig = eig2x2(apply_hessian(v))
    flipped = type(eig)(eig.grid, eig.lam1, eig.lam2, -eig.e1, -eig.e2)
    for which in (1, 2, "cross"):
        np.testing.assert_allclose(
            directional_dd(u, eig, which).data,
            directional_dd(u, flipped, which).data,
            atol=1e-14,
        )


def test_roughness_constant_and_quadratic():
    assert np.all(roughness_image(image_from_array(np.full((6, 6), 2.0))).data == 0)
    xx, _ = ramp_product(9)
    E = roughness_image(image_from_array(xx**2)).data
    np.testing.assert_allclose(E[1:-1, 1:-1], 4.0, atol=1e-12)


def test_roughness_equals_eigenvalue_energy():
    rng = np.random.default_rng(10)
    u = image_from_array(rng.standard_normal((13, 13)))
    eig = eig2x2(apply_hessian(u))
    np.testing.assert_allclose(
        roughness_image(u).data,
        eig.lam1.data**2 + eig.lam2.data**2,
        atol=1e-10,
    )


def test_affine_ramp_in_null_space_interior():
    xx, yy = ramp_product(10)
    u = image_from_array(1.5 + 0.25 * xx - 0.75 * yy)
    E = roughness_image(u).data
    np.testing.assert_allclose(E[1:-1, 1:-1], 0.0, atol=1e-13)
