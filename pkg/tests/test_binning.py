import math

import numpy as np
import pytest

from scatrec.binning import bin_samples, tanh_weight
from scatrec.gridcore import GridSpec, SampleSet


def brute_force_bin(samples, grid):
    """Independent oracle: double loop over pixels x samples."""
    c = np.zeros(grid.shape)
    hw = np.zeros(grid.shape)
    for py in range(grid.height):
        for px in range(grid.width):
            for x, y, v in zip(samples.xs, samples.ys, samples.values):
                if abs(x - px) < 0.5 and abs(y - py) < 0.5:
                    r = math.hypot(x - px, y - py)
                    w = math.tanh(r) / r if r > 1e-4 else 1.0 - r * r / 3.0 + 2.0 * r**4 / 15.0
                    c[py, px] += w
                    hw[py, px] += w * v
    h = np.where(c > 0, hw / np.where(c > 0, c, 1.0), 0.0)
    return h, c


def test_tanh_weight_values():
    assert tanh_weight(0.0) == 1.0
    assert tanh_weight(1.0) == pytest.approx(math.tanh(1.0), abs=1e-15)
    assert tanh_weight(0.5) == pytest.approx(math.tanh(0.5) / 0.5, abs=1e-15)
    # frozen digits from a high-precision evaluation of tanh(r)/r
    assert tanh_weight(1.0) == pytest.approx(0.7615941559557649, abs=1e-15)
    assert tanh_weight(0.5) == pytest.approx(0.9242343145200195, abs=1e-15)


def test_tanh_weight_monotone_and_continuous_at_zero():
    r = np.linspace(0.0, 3.0, 400)
    w = tanh_weight(r)
    assert np.all(np.diff(w) < 0)
    assert abs(tanh_weight(9e-5) - tanh_weight(1.1e-4)) < 1e-8


def test_single_on_grid_sample():
    g = GridSpec(6, 5)
    out = bin_samples(SampleSet([2.0], [3.0], [0.7], g))
    assert out.c.data[3, 2] == 1.0
    assert out.h.data[3, 2] == 0.7
    mask = np.ones(g.shape, bool)
    mask[3, 2] = False
    assert np.all(out.c.data[mask] == 0)
    assert np.all(out.h.data[mask] == 0)


def test_two_symmetric_samples_average():
    g = GridSpec(5, 5)
    a, b = 0.3, 0.9
    out = bin_samples(SampleSet([2.25, 1.75], [2.0, 2.0], [a, b], g))
    assert out.h.data[2, 2] == pytest.approx((a + b) / 2, abs=1e-12)
    assert out.c.data[2, 2] == pytest.approx(2 * math.tanh(0.25) / 0.25, abs=1e-12)


def test_matches_brute_force_on_random_samples():
    rng = np.random.default_rng(42)
    g = GridSpec(32, 32)
    n = 500
    s = SampleSet(
        rng.random(n) * (g.width - 1e-9),
        rng.random(n) * (g.height - 1e-9),
        rng.random(n),
        g,
    )
    out = bin_samples(s)
    h_ref, c_ref = brute_force_bin(s, g)
    np.testing.assert_allclose(out.c.data, c_ref, atol=1e-12)
    np.testing.assert_allclose(out.h.data, h_ref, atol=1e-12)


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    g = GridSpec(16, 16)
    n = 200
    xs = rng.random(n) * 15.0
    ys = rng.random(n) * 15.0
    vs = rng.random(n)
    out = bin_samples(SampleSet(xs, ys, vs, g))
    perm = rng.permutation(n)
    out2 = bin_samples(SampleSet(xs[perm], ys[perm], vs[perm], g))
    np.testing.assert_allclose(out.c.data, out2.c.data, atol=1e-12)
    np.testing.assert_allclose(out.h.data, out2.h.data, atol=1e-12)


def test_constant_value_samples_give_constant_h():
    rng = np.random.default_rng(2)
    g = GridSpec(8, 8)
    # one sample exactly on every grid point guarantees full coverage
    yy, xx = np.mgrid[0:8, 0:8]
    extra = rng.random(30) * 7.0
    xs = np.concatenate([xx.ravel().astype(float), extra])
    ys = np.concatenate([yy.ravel().astype(float), rng.random(30) * 7.0])
    vs = np.full(xs.size, 0.37)
    out = bin_samples(SampleSet(xs, ys, vs, g))
    assert np.all(out.c.data > 0)
    np.testing.assert_allclose(out.h.data, 0.37, atol=1e-13)


def test_duplication_doubles_c_keeps_h():
    rng = np.random.default_rng(3)
    g = GridSpec(12, 12)
    n = 80
    xs, ys, vs = rng.random(n) * 11, rng.random(n) * 11, rng.random(n)
    single = bin_samples(SampleSet(xs, ys, vs, g))
    doubled = bin_samples(SampleSet(np.tile(xs, 2), np.tile(ys, 2), np.tile(vs, 2), g))
    np.testing.assert_allclose(doubled.c.data, 2 * single.c.data, atol=1e-12)
    covered = single.c.data > 0
    np.testing.assert_allclose(doubled.h.data[covered], single.h.data[covered], atol=1e-12)


def test_half_integer_sample_contributes_nowhere():
    g = GridSpec(4, 4)
    out = bin_samples(SampleSet([1.5, 2.0], [1.5, 2.0], [1.0, 0.5], g))
    # the (1.5, 1.5) sample sits on the open-square border of four pixels
    assert out.c.data.sum() == pytest.approx(1.0)
    assert out.h.data[2, 2] == 0.5
