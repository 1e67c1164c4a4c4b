"""Reconstruct from 50% sampling with the single-level baselines.

The quadratic penalty smooths everything including edges; the sparse (p = 1)
penalty keeps edges at the price of occasional spike artifacts.  Both run the
same ADMM machinery with a box constraint on the pixel range.
"""

import numpy as np

from scatrec import (
    NoiseSpec,
    RegParams,
    SolverOptions,
    add_noise,
    blobs_phantom,
    reconstruct_single,
    ssim,
    subsample,
)

truth = blobs_phantom(96, seed=4)
noisy, achieved = add_noise(truth, NoiseSpec(seed=9, target_snr_db=13.3))
samples = subsample(noisy, 0.5, seed=10)
print(f"data: {len(samples)} samples at {achieved:.2f} dB")

options = SolverOptions(tol_rel=1e-4, max_iter=60)
for label, kind, lams in (
    ("quadratic", "quadratic", [0.1, 0.3, 1.0]),
    ("sparse p=1", "lp", [0.05, 0.1, 0.2]),
):
    best = None
    for lam in lams:
        params = RegParams(lam=lam, p=1.0 if kind == "lp" else 2.0)
        recon = reconstruct_single(samples, params, kind, options)
        score = ssim(truth, recon)
        if best is None or score > best[0]:
            best = (score, lam, recon)
    score, lam, recon = best
    print(f"{label:10s} best lam={lam:<5g} ssim={score:.4f} "
          f"range=[{recon.data.min():.3f}, {recon.data.max():.3f}]")
