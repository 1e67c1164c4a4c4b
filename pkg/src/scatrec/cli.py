"""Command-line entry points.

Subcommands: bin, simulate, reconstruct, evaluate, sweep, experiment.
Exit codes: 0 success, 2 usage error, 3 data error, 4 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import sys

from .binning import bin_samples
from .errors import NonFiniteCost, ScatrecError
from .experiment import (
    DEFAULT_LAM,
    RunConfig,
    ordering_stats,
    run_experiment,
    sweep_q,
    sweep_rows_to_csv,
)
from .gridcore import GridSpec, RegParams, load_image, load_samples, save_image, save_samples
from .metrics import ssim
from .multires import build_schedule, reconstruct, reconstruct_single
from .simulate import GENERATOR_NAME, NoiseSpec, add_noise, subsample
from .solver import SolverOptions


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-5, help="relative stopping tolerance")
    p.add_argument("--max-iter", type=int, default=300, help="outer iteration cap")
    p.add_argument("--verbose", action="store_true", help="stream iter,cost,residuals to stderr")


def _solver_options(args) -> SolverOptions:
    return SolverOptions(tol_rel=args.tol, max_iter=args.max_iter, verbose=args.verbose)


def _cmd_bin(args) -> int:
    grid = None
    if args.width and args.height:
        grid = GridSpec(args.width, args.height)
    samples = load_samples(args.samples, grid=grid)
    out = bin_samples(samples)
    save_image(out.h, args.out_h)
    save_image(out.c, args.out_c)
    print(f"binned {len(samples)} samples onto {samples.grid.width}x{samples.grid.height}")
    return 0


def _cmd_simulate(args) -> int:
    img = load_image(args.infile)
    if args.snr is not None:
        spec = NoiseSpec(seed=args.seed, target_snr_db=args.snr)
    else:
        spec = NoiseSpec(seed=args.seed, gain_alpha=args.alpha, sigma_g=args.sigma_g)
    noisy, achieved = add_noise(img, spec)
    samples = subsample(noisy, args.density, seed=args.seed)
    save_image(noisy, args.out_noisy)
    save_samples(samples, args.out_samples)
    meta = {
        "input": args.infile,
        "target_snr_db": args.snr,
        "achieved_snr_db": achieved,
        "density": args.density,
        "samples": len(samples),
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "poisson_share": 0.7,
    }
    if args.meta:
        with open(args.meta, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, sort_keys=True, indent=2)
            fh.write("\n")
    print(f"achieved_snr_db={achieved:.4f} samples={len(samples)}")
    return 0


def _cmd_reconstruct(args) -> int:
    samples = load_samples(args.samples)
    options = _solver_options(args)
    params = RegParams(
        lam=args.lam,
        q=args.q,
        r=args.r,
        p=args.p,
        epsilon=args.epsilon,
        bound_m=args.bound_m,
    )
    if args.method in ("merr", "msda"):
        sched = build_schedule(samples.grid.width, args.nd, args.coarse_ratio)
        img = reconstruct(samples, params, sched, baseline=args.method, options=options, init_lam=args.init_lam)
    elif args.method == "l1":
        img = reconstruct_single(samples, RegParams(
            lam=args.lam, p=1.0, epsilon=args.epsilon, bound_m=args.bound_m), "lp", options)
    elif args.method == "quad":
        img = reconstruct_single(samples, RegParams(
            lam=args.lam, p=2.0, epsilon=args.epsilon, bound_m=args.bound_m), "quadratic", options)
    else:  # pragma: no cover - argparse choices guard this
        raise ValueError(args.method)
    save_image(img, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    ref = load_image(args.ref)
    test = load_image(args.test)
    value = ssim(ref, test)
    print(f"ssim={value!r}")
    record = {"ref": args.ref, "test": args.test, "ssim": value}
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(record, fh, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_sweep(args) -> int:
    samples = load_samples(args.samples)
    truth = load_image(args.truth)
    config = RunConfig(lam={**DEFAULT_LAM, "merr": args.lam}, nd=args.nd, coarse_ratio=args.coarse_ratio)
    rows = sweep_q(samples, truth, config)
    csv_text = sweep_rows_to_csv(rows)
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(csv_text)
    best = rows[0]
    print(f"best q={best[0]!r} lambda={best[1]!r} ssim={best[2]!r}")
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = RunConfig.from_json(fh.read())
    if args.out_dir:
        config = RunConfig.from_json(
            json.dumps({**json.loads(config.to_json()), "output_dir": args.out_dir})
        )
    report = run_experiment(config)
    stats = ordering_stats(report)
    print(json.dumps(stats, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bin", help="bin scattered samples into the (h, c) image pair")
    p.add_argument("--samples", required=True)
    p.add_argument("--out-h", required=True)
    p.add_argument("--out-c", required=True)
    p.add_argument("--width", type=int, help="grid width if no sidecar is present")
    p.add_argument("--height", type=int, help="grid height if no sidecar is present")
    p.set_defaults(func=_cmd_bin)

    p = sub.add_parser("simulate", help="add mixed noise and subsample a ground-truth image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--snr", type=float, help="target SNR in dB (omit to use --alpha/--sigma-g)")
    p.add_argument("--alpha", type=float, help="explicit photon gain")
    p.add_argument("--sigma-g", type=float, default=0.0, help="explicit Gaussian std")
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-samples", required=True)
    p.add_argument("--out-noisy", required=True)
    p.add_argument("--meta")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct an image from a samples CSV")
    p.add_argument("--samples", required=True)
    p.add_argument("--method", choices=("merr", "msda", "l1", "quad"), required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--bound-m", type=float, default=None)
    p.add_argument("--nd", type=int, default=16)
    p.add_argument("--coarse-ratio", type=float, default=4.0)
    p.add_argument("--init-lam", type=float, default=None, help="weight of the coarsest quadratic solve")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score a reconstruction against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--json", help="also write a JSON record here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="grid-search q and the weight for the guided method")
    p.add_argument("--samples", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAM["merr"])
    p.add_argument("--nd", type=int, default=16)
    p.add_argument("--coarse-ratio", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("experiment", help="run a full image x SNR x density grid from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", help="override the config's output directory")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteCost as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ScatrecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
