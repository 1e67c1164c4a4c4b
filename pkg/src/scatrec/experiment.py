"""End-to-end experiment harness: simulate, reconstruct, score, persist.

A run crosses images x SNR levels x sampling densities; each cell simulates
noisy subsampled data once, reconstructs it with every requested method over
a small log-spaced grid of weights, and keeps the best structural-similarity
score per method.  Every artifact needed to re-run a cell bit-identically is
written next to the results, and a manifest records content hashes of the
configuration and all image inputs.

Cells are independent; set the SCATREC_WORKERS environment variable to run
them in a process pool.  Results are identical either way.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .gridcore import Image, RegParams, SampleSet, image_from_array, load_image, save_image, save_samples
from .metrics import ssim
from .multires import build_schedule, reconstruct_detailed, reconstruct_single
from .phantoms import phantom_by_name
from .simulate import GENERATOR_NAME, NoiseSpec, add_noise, subsample
from .solver import SolverOptions

__all__ = ["RunConfig", "CellResult", "ExperimentReport", "sweep_q", "sweep_rows_to_csv", "run_experiment"]

METHODS = ("quad", "l1", "msda", "merr")

# Weight scales differ enormously between methods because the adaptive
# penalties divide by (epsilon + |.|)^q terms; these bases center the search.
DEFAULT_LAM = {"quad": 0.3, "l1": 0.1, "msda": 3e-5, "merr": 0.06}

# Experiment-scale solver settings: reconstructions need far less precision
# than the oracle tests, and the runtime budget is per-suite, not per-solve.
DEFAULT_SOLVER = {
    "tol_rel": 1e-3,
    "max_iter": 30,
    "cg_tol": 1e-6,
    "cg_max_iter": 40,
    "polish": False,
}


@dataclass(frozen=True)
class RunConfig:
    """JSON-serializable description of one experiment; re-runs are bit-identical."""

    images: tuple = ("phantom:blobs", "phantom:filaments", "phantom:smooth_spots")
    snrs_db: tuple = (12.1, 13.3, 14.3)
    densities: tuple = (0.3, 0.4, 0.5)
    methods: tuple = ("l1", "msda", "merr")
    lam: dict = field(default_factory=lambda: dict(DEFAULT_LAM))
    lam_grid_points: int = 3
    lam_grid_decades: float = 1.0
    q: float = 0.9
    r: float = 0.5
    epsilon: float = 1e-6
    nd: int = 16
    coarse_ratio: float = 4.0
    init_lam: float = 0.3
    phantom_size: int = 128
    seed: int = 7
    output_dir: str = "runs/exp"
    solver: dict = field(default_factory=lambda: dict(DEFAULT_SOLVER))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, default=list)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        raw = json.loads(text)
        for key in ("images", "snrs_db", "densities", "methods"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class CellResult:
    image: str
    snr_db: float
    achieved_snr_db: float
    density: float
    scores: dict  # method -> (lam, ssim)
    descent_ok: bool
    feasible_ok: bool
    level0_ok: bool


@dataclass(frozen=True)
class ExperimentReport:
    config: RunConfig
    cells: tuple
    rows: tuple  # flat (image, snr, density, method, lam, ssim) records
    manifest: dict


def _solver_options(config: RunConfig) -> SolverOptions:
    merged = dict(DEFAULT_SOLVER)
    merged.update(config.solver)
    return SolverOptions(**merged)


def _lam_grid(base: float, points: int, decades: float) -> list[float]:
    if points == 1:
        return [base]
    exps = np.linspace(-decades, decades, points)
    return [float(base * 10.0**e) for e in exps]


def _cell_seed(config_seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(config_seed, spawn_key=tuple(key)).generate_state(1)[0])


def load_truth(spec: str, config: RunConfig) -> Image:
    if spec.startswith("phantom:"):
        return phantom_by_name(spec.split(":", 1)[1], config.phantom_size, seed=config.seed)
    return load_image(spec)


def reconstruct_method(
    method: str,
    samples: SampleSet,
    lam: float,
    config: RunConfig,
    options: SolverOptions,
):
    """Run one method; returns (image, diagnostics dict)."""
    if method == "quad":
        params = RegParams(lam=lam, p=2.0, epsilon=config.epsilon)
        img = reconstruct_single(samples, params, "quadratic", options)
        return img, {"descent_ok": True, "feasible_ok": _feasible(img), "level0_ok": True}
    if method == "l1":
        params = RegParams(lam=lam, p=1.0, epsilon=config.epsilon)
        img = reconstruct_single(samples, params, "lp", options)
        return img, {"descent_ok": True, "feasible_ok": _feasible(img), "level0_ok": True}
    if method in ("msda", "merr"):
        params = RegParams(lam=lam, q=config.q, r=config.r, epsilon=config.epsilon)
        sched = build_schedule(samples.grid.width, config.nd, config.coarse_ratio)
        detail = reconstruct_detailed(
            samples, params, sched, baseline=method, options=options, init_lam=config.init_lam
        )
        descent = all(rep.final_cost <= rep.init_cost + 1e-9 for rep in detail.reports)
        feasible = all(_feasible(rep.solution) for rep in detail.reports)
        level0 = detail.final_cost_level0 <= detail.quad_candidate_cost_level0 + 1e-9
        return detail.final, {"descent_ok": descent, "feasible_ok": feasible, "level0_ok": level0}
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def _feasible(img: Image, slack: float = 1e-9) -> bool:
    return bool(img.data.min() >= -slack)


def sweep_q(samples: SampleSet, truth: Image, base: RunConfig):
    """Grid search q in 0.5..1.0 (step 0.1) x 7 weights log-spaced around the base.

    Returns rows (q, lam, ssim) sorted by score descending; ties break on
    (q, lam) so the output is stable.
    """
    options = _solver_options(base)
    rows = []
    base_lam = base.lam.get("merr", DEFAULT_LAM["merr"])
    lams = [float(base_lam * 10.0**e) for e in np.linspace(-1.5, 1.5, 7)]
    for q in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0):
        cfg = replace(base, q=q)
        for lam in lams:
            img, _ = reconstruct_method("merr", samples, lam, cfg, options)
            rows.append((q, lam, ssim(truth, img)))
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    return rows


def sweep_rows_to_csv(rows) -> str:
    lines = ["q,lambda,ssim"]
    for q, lam, score in rows:
        lines.append(f"{q!r},{lam!r},{score!r}")
    return "\n".join(lines) + "\n"


def _run_cell(args):
    (config, image_name, truth_data, i_img, i_snr, i_dens) = args
    truth = image_from_array(truth_data, channel="truth")
    snr = config.snrs_db[i_snr]
    density = config.densities[i_dens]
    options = _solver_options(config)
    noisy, achieved = add_noise(
        truth, NoiseSpec(seed=_cell_seed(config.seed, i_img, i_snr, 0), target_snr_db=snr)
    )
    samples = subsample(noisy, density, seed=_cell_seed(config.seed, i_img, i_snr, i_dens, 1))
    scores = {}
    recons = {}
    descent = feasible = level0 = True
    for method in config.methods:
        base = config.lam.get(method, DEFAULT_LAM[method])
        best = None
        for lam in _lam_grid(base, config.lam_grid_points, config.lam_grid_decades):
            img, diag = reconstruct_method(method, samples, lam, config, options)
            score = ssim(truth, img)
            descent &= diag["descent_ok"]
            feasible &= diag["feasible_ok"]
            level0 &= diag["level0_ok"]
            if best is None or score > best[1]:
                best = (lam, score, img)
        scores[method] = (best[0], best[1])
        recons[method] = best[2]
    cell = CellResult(
        image=image_name,
        snr_db=snr,
        achieved_snr_db=achieved,
        density=density,
        scores=scores,
        descent_ok=descent,
        feasible_ok=feasible,
        level0_ok=level0,
    )
    return cell, noisy, samples, recons


def _sha256_bytes(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def _write_cell_artifacts(outdir: str, cell: CellResult, noisy, samples, recons) -> None:
    tag = f"{cell.image.replace(':', '_')}_snr{cell.snr_db:g}_d{int(round(cell.density * 100))}"
    cdir = os.path.join(outdir, tag)
    os.makedirs(cdir, exist_ok=True)
    save_image(noisy, os.path.join(cdir, "noisy.f32"))
    save_samples(samples, os.path.join(cdir, "samples.csv"))
    for method, img in recons.items():
        save_image(img, os.path.join(cdir, f"recon_{method}.f32"))


def run_experiment(config: RunConfig, write_artifacts: bool = True) -> ExperimentReport:
    """Execute every cell of the configured grid; returns the scored report."""
    outdir = config.output_dir
    if write_artifacts:
        os.makedirs(outdir, exist_ok=True)
    truths = [(name, load_truth(name, config)) for name in config.images]
    tasks = [
        (config, name, truth.data, i_img, i_snr, i_dens)
        for i_img, (name, truth) in enumerate(truths)
        for i_snr in range(len(config.snrs_db))
        for i_dens in range(len(config.densities))
    ]
    workers = int(os.environ.get("SCATREC_WORKERS", "1"))
    partial_path = os.path.join(outdir, "results_partial.csv") if write_artifacts else None
    if partial_path:
        with open(partial_path, "w", encoding="ascii") as fh:
            fh.write("image,snr_db,density,method,lambda,ssim\n")

    cells = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, tasks))
    else:
        outcomes = [_run_cell(t) for t in tasks]
    for cell, noisy, samples, recons in outcomes:
        cells.append(cell)
        if write_artifacts:
            _write_cell_artifacts(outdir, cell, noisy, samples, recons)
            with open(partial_path, "a", encoding="ascii") as fh:
                for method, (lam, score) in cell.scores.items():
                    fh.write(f"{cell.image},{cell.snr_db!r},{cell.density!r},{method},{lam!r},{score!r}\n")

    rows = tuple(
        (cell.image, cell.snr_db, cell.density, method, lam, score)
        for cell in cells
        for method, (lam, score) in sorted(cell.scores.items())
    )
    manifest = _build_manifest(config, truths)
    if write_artifacts:
        with open(os.path.join(outdir, "results.csv"), "w", encoding="ascii") as fh:
            fh.write("image,snr_db,density,method,lambda,ssim\n")
            for image, snr, dens, method, lam, score in rows:
                fh.write(f"{image},{snr!r},{dens!r},{method},{lam!r},{score!r}\n")
        with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return ExperimentReport(config=config, cells=tuple(cells), rows=rows, manifest=manifest)


def _build_manifest(config: RunConfig, truths) -> dict:
    inputs = {}
    for name, truth in truths:
        inputs[name] = _sha256_bytes(truth.data.tobytes())
    config_json = config.to_json()
    return {
        "config": json.loads(config_json),
        "config_sha256": _sha256_bytes(config_json.encode()),
        "inputs": inputs,
        "generator": GENERATOR_NAME,
        "package_version": __version__,
    }


def ordering_stats(report: ExperimentReport) -> dict:
    """Fractions of cells where the guided method beats the baselines."""
    total = len(report.cells)
    full_order = 0
    merr_beats_l1 = 0
    for cell in report.cells:
        s = {m: v[1] for m, v in cell.scores.items()}
        if {"merr", "msda", "l1"} <= set(s):
            if s["merr"] >= s["msda"] >= s["l1"]:
                full_order += 1
            if s["merr"] > s["l1"]:
                merr_beats_l1 += 1
    return {
        "cells": total,
        "full_order_fraction": full_order / total if total else 0.0,
        "merr_over_l1_fraction": merr_beats_l1 / total if total else 0.0,
        "all_descent_ok": all(c.descent_ok for c in report.cells),
        "all_feasible_ok": all(c.feasible_ok for c in report.cells),
        "all_level0_ok": all(c.level0_ok for c in report.cells),
    }
