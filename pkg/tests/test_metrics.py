import numpy as np
import pytest

from scatrec.errors import GridMismatch, ImageTooSmall
from scatrec.gridcore import image_from_array
from scatrec.metrics import SsimParams, ssim
from scatrec.phantoms import blobs_phantom
from scatrec.simulate import NoiseSpec, add_noise


def reference_ssim(x, y, window=11, sigma=1.5, k1=0.01, k2=0.03, L=1.0):
    """Direct evaluation oracle: explicit loops over valid window positions."""
    half = window // 2
    ax = np.arange(-half, half + 1, dtype=float)
    g1 = np.exp(-(ax**2) / (2 * sigma**2))
    g1 /= g1.sum()
    w2 = np.outer(g1, g1)
    H, W = x.shape
    c1, c2 = (k1 * L) ** 2, (k2 * L) ** 2
    vals = []
    for i in range(half, H - half):
        for j in range(half, W - half):
            px = x[i - half : i + half + 1, j - half : j + half + 1]
            py = y[i - half : i + half + 1, j - half : j + half + 1]
            mx = np.sum(w2 * px)
            my = np.sum(w2 * py)
            vx = np.sum(w2 * px * px) - mx * mx
            vy = np.sum(w2 * py * py) - my * my
            cxy = np.sum(w2 * px * py) - mx * my
            vals.append(
                ((2 * mx * my + c1) * (2 * cxy + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2))
            )
    return float(np.mean(vals))


def test_identity_is_exactly_one():
    img = blobs_phantom(48, seed=0)
    assert ssim(img, img) == 1.0


def test_symmetry():
    rng = np.random.default_rng(1)
    a = image_from_array(rng.random((32, 32)))
    b = image_from_array(rng.random((32, 32)))
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_matches_direct_oracle():
    rng = np.random.default_rng(2)
    a = image_from_array(rng.random((20, 18)))
    b = image_from_array(rng.random((20, 18)))
    assert ssim(a, b) == pytest.approx(reference_ssim(a.data, b.data), abs=1e-12)


def test_checkerboard_anticorrelation_is_negative():
    n = 24
    yy, xx = np.mgrid[0:n, 0:n]
    board = ((xx + yy) % 2).astype(float)
    a = image_from_array(board)
    b = image_from_array(1.0 - board)
    val = ssim(a, b)
    assert val == pytest.approx(reference_ssim(a.data, b.data), abs=1e-12)
    assert val < 0


def test_monotone_degradation():
    img = blobs_phantom(64, seed=3)
    scores = []
    for i, alpha in enumerate([0.002, 0.01, 0.05, 0.2]):
        noisy, _ = add_noise(img, NoiseSpec(seed=10, gain_alpha=alpha, sigma_g=0.0))
        clipped = image_from_array(np.clip(noisy.data, 0, 1))
        scores.append(ssim(img, clipped))
    assert all(s1 >= s2 for s1, s2 in zip(scores, scores[1:]))
    assert scores[0] > scores[-1]


def test_constant_pair_is_one():
    a = image_from_array(np.full((16, 16), 0.6))
    assert ssim(a, a) == 1.0


def test_validation_errors():
    a = image_from_array(np.ones((16, 16)))
    with pytest.raises(GridMismatch):
        ssim(a, image_from_array(np.ones((17, 17))))
    with pytest.raises(ImageTooSmall):
        ssim(image_from_array(np.ones((8, 8))), image_from_array(np.ones((8, 8))))
    with pytest.raises(ValueError):
        SsimParams(window=10)
    with pytest.raises(ValueError):
        SsimParams(k1=0.0)


def test_range_bounded():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = image_from_array(rng.random((24, 24)))
        b = image_from_array(rng.random((24, 24)))
        val = ssim(a, b)
        assert -1.0 <= val <= 1.0
