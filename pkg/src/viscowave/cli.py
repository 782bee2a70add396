"""Command-line experiment runner.

Subcommands mirror the experiment names; flags override config-file keys.
The output root defaults to $VISCOWAVE_OUT, then ./out.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    config_from_file,
    merge_overrides,
    parse_components,
    parse_float_list,
)
from .experiments import EXIT_CONFIG_ERROR, run_experiment


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key-value config file; flags override its keys")
    p.add_argument("--n", type=int, help="spatial dimension (1 or 2)")
    p.add_argument("--p", type=float, help="nonlinearity power")
    p.add_argument("--form", choices=["signed", "abs"], help="|u|^(p-1)u or |u|^p")
    p.add_argument("--N", type=int, help="grid points per axis (power of two)")
    p.add_argument("--L", type=float, help="box half-width")
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--sample-dt", type=float, help="observable sampling cadence")
    p.add_argument("--k", help="comma list of derivative orders to track, e.g. 0.5,1")
    p.add_argument("--amp", type=float, help="amplitude of the default Gaussian data")
    p.add_argument("--u0", help="initial displacement components, kind:amp:width:center|...")
    p.add_argument("--u1", help="initial velocity components")
    p.add_argument("--p-list", dest="p_list", help="comma list of powers (fujita-sweep)")
    p.add_argument("--R-list", dest="r_list", help="comma list of cutoff radii (blowup-functional)")
    p.add_argument("--control-amp", type=float, help="small-data control amplitude for sweeps")
    p.add_argument("--snapshot-times", help="comma list of state snapshot times")
    p.add_argument("--snapshot-dt", type=float, help="field snapshot cadence")
    p.add_argument("--growth-factor", type=float, help="sup-norm growth threshold for 'growing'")
    p.add_argument("--dealias", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument(
        "--boundary-guard", action=argparse.BooleanOptionalAction, default=None,
        help="abort when L1 mass reaches the outer shell (default on)",
    )
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--out", help="output directory (default $VISCOWAVE_OUT or ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viscowave",
        description="Pseudospectral experiments for the doubly damped semilinear wave equation",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        _add_common_flags(sub.add_parser(name))
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        base = config_from_file(args.config)
        base = merge_overrides(base, {"experiment": args.experiment})
    else:
        base = ExperimentConfig(experiment=args.experiment)
        if args.experiment in ("fujita-sweep", "blowup-functional"):
            # growth experiments source from |u|^p unless told otherwise
            base = merge_overrides(base, {"form": "abs"})
    out = args.out or os.environ.get("VISCOWAVE_OUT")
    overrides = {
        "n": args.n,
        "p": args.p,
        "form": args.form,
        "N": args.N,
        "L": args.L,
        "T": args.T,
        "dt": args.dt,
        "sample_dt": args.sample_dt,
        "k_list": parse_float_list(args.k) if args.k is not None else None,
        "amp": args.amp,
        "u0": parse_components(args.u0) if args.u0 is not None else None,
        "u1": parse_components(args.u1) if args.u1 is not None else None,
        "p_list": parse_float_list(args.p_list) if args.p_list is not None else None,
        "r_list": parse_float_list(args.r_list) if args.r_list is not None else None,
        "control_amp": args.control_amp,
        "snapshot_times": parse_float_list(args.snapshot_times)
        if args.snapshot_times is not None
        else None,
        "snapshot_dt": args.snapshot_dt,
        "growth_factor": args.growth_factor,
        "dealias": args.dealias,
        "boundary_guard": args.boundary_guard,
        "jobs": args.jobs,
        "out_dir": out,
    }
    return merge_overrides(base, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        print(f"viscowave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return run_experiment(config)


if __name__ == "__main__":
    sys.exit(main())
