"""Experiment drivers: run a config, emit CSV artifacts and a manifest.

Every experiment writes observables.csv / fits.csv / manifest.txt plus its
specific extras; files are written atomically (write-then-rename) and only
after the computation finishes, so a failed run leaves no partial CSV.
Identical configs produce byte-identical CSVs; the only varying output is
the manifest wall-time field.
"""

from __future__ import annotations

import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .analysis import (
    accumulate_mass,
    convolution_decay_report,
    decay_fit,
    default_window,
    gaussian_moment_report,
    profile_error,
    smoothed_convolution_report,
    xnorm,
)
from .blowup import annulus_integral, classify, kr_functional, viscoelastic_term
from .config import ConfigError, ExperimentConfig, build_initial_data, config_to_text
from .propagators import State, apply_linear
from .solver import Nonlinearity, Trajectory, TruncationError, dk_key, run
from .spectral import (
    Spectrum,
    hermitianize,
    inverse_transform,
    l1_norm,
    l2_norm,
    make_grid,
    mass,
    sup_norm,
    transform,
)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_BLOWUP = 3
EXIT_TRUNCATION = 4


def _toolkit_version() -> str:
    try:
        from importlib.metadata import version

        return version("viscowave")
    except Exception:
        return "unknown"


def _fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else "NA"
    return str(v)


def write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)


def write_manifest(path: str, config: ExperimentConfig, extras: dict, wall_time: float) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# resolved configuration\n")
        fh.write(config_to_text(config))
        fh.write("# run record\n")
        fh.write(f"toolkit_version = {_toolkit_version()}\n")
        fh.write(f"wall_time_s = {wall_time:.3f}\n")
        for key in sorted(extras):
            fh.write(f"{key} = {_fmt(extras[key])}\n")
    os.replace(tmp, path)


def _observable_header(k_list) -> list[str]:
    return ["t", "l2", "l1", "sup", *[dk_key(k) for k in k_list], "mass", "f_mass"]


def _trajectory_rows(traj: Trajectory) -> list[tuple]:
    keys = ["l2", "l1", "sup", *[dk_key(k) for k in traj.k_values], "mass", "f_mass"]
    rows = [
        (traj.times[i], *[traj.observables[key][i] for key in keys])
        for i in range(len(traj.times))
    ]
    if traj.blown_up:
        rows.append((traj.blowup_time, *[None] * len(keys)))
    return rows


def _fit_rows(traj: Trajectory, quantities: list[str]) -> list[tuple]:
    rows = []
    if len(traj.times) < 2:
        return rows
    window = default_window(float(traj.times[-1]))
    for q in quantities:
        try:
            fit = decay_fit(traj.times, traj.observables[q], window)
        except ValueError:
            continue
        rows.append((q, fit.slope, fit.intercept, fit.stderr, fit.t_min, fit.t_max, fit.n_samples))
    return rows


FITS_HEADER = ["quantity", "slope", "intercept", "stderr", "t_min", "t_max", "n_samples"]


def _linear_trajectory(config: ExperimentConfig) -> tuple[Trajectory, list[State]]:
    """Exact propagation of the linear flow at the sample cadence (no stepping)."""
    grid = make_grid(config.n, config.N, config.L)
    u0, u1 = build_initial_data(config, grid)
    state0 = State(
        0.0,
        Spectrum(grid, hermitianize(transform(u0).coef)),
        Spectrum(grid, hermitianize(transform(u1).coef)),
    )
    n_samples = int(round(config.T / config.sample_dt))
    times = config.sample_dt * np.arange(n_samples + 1)
    nl = Nonlinearity(config.p, config.form)
    keys = ["l2", "l1", "sup", *[dk_key(k) for k in config.k_list], "mass", "f_mass"]
    cols: dict[str, list[float]] = {key: [] for key in keys}
    states = []
    for t in times:
        st = apply_linear(state0, float(t))
        states.append(st)
        u = inverse_transform(st.u_hat)
        cols["l2"].append(l2_norm(st.u_hat))
        cols["l1"].append(l1_norm(u))
        cols["sup"].append(sup_norm(u))
        for k in config.k_list:
            cols[dk_key(k)].append(l2_norm(st.u_hat, k))
        cols["mass"].append(float(st.u_hat.coef[(0,) * grid.dim].real / grid.cn))
        cols["f_mass"].append(0.0)  # linear flow: no source
    traj = Trajectory(
        times=times,
        observables={key: np.asarray(col) for key, col in cols.items()},
        k_values=tuple(config.k_list),
        p0=mass(u0),
        p1=mass(u1),
        meta={"n": config.n, "p": config.p, "form": config.form, "linear": True},
    )
    return traj, states


def _data_extras(config: ExperimentConfig, traj: Trajectory) -> dict:
    extras = {
        "p0": traj.p0,
        "p1": traj.p1,
        # growth heuristics assume positive data mass; report it, never enforce it
        "positive_mass_condition": "yes" if (traj.p0 > 0 and traj.p1 > 0) else "no",
        "max_tail_energy_fraction": traj.max_tail_fraction,
        "blown_up": "yes" if traj.blown_up else "no",
    }
    if traj.blown_up:
        extras["blowup_time"] = traj.blowup_time
    return extras


def _exp_linear_decay(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    traj, _ = _linear_trajectory(config)
    write_csv(os.path.join(out, "observables.csv"), _observable_header(config.k_list), _trajectory_rows(traj))
    write_csv(
        os.path.join(out, "fits.csv"),
        FITS_HEADER,
        _fit_rows(traj, ["l2", *[dk_key(k) for k in config.k_list]]),
    )
    return _data_extras(config, traj), EXIT_OK


def _exp_profile(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    traj, states = _linear_trajectory(config)
    big_m = traj.p0 + traj.p1
    ks = sorted({0.0, *config.k_list})
    rows = [
        (st.time, k, big_m, profile_error(st, big_m, k))
        for st in states
        if st.time > 0
        for k in ks
    ]
    write_csv(os.path.join(out, "observables.csv"), _observable_header(config.k_list), _trajectory_rows(traj))
    write_csv(os.path.join(out, "fits.csv"), FITS_HEADER, _fit_rows(traj, ["l2", *[dk_key(k) for k in config.k_list]]))
    write_csv(os.path.join(out, "profile.csv"), ["t", "k", "M_used", "error"], rows)
    return _data_extras(config, traj), EXIT_OK


def _exp_nonlinear_decay(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    if not config.snapshot_times:
        config = replace(
            config, snapshot_times=(0.2 * config.T, 0.5 * config.T, 0.8 * config.T)
        )
    traj = run(config)
    write_csv(os.path.join(out, "observables.csv"), _observable_header(config.k_list), _trajectory_rows(traj))
    write_csv(
        os.path.join(out, "fits.csv"),
        FITS_HEADER,
        [] if traj.blown_up else _fit_rows(traj, ["l2", *[dk_key(k) for k in config.k_list]]),
    )
    extras = _data_extras(config, traj)
    profile_rows = []
    if not traj.blown_up:
        p0p1 = traj.p0 + traj.p1
        try:
            est = accumulate_mass(traj, config.p, config.n)
            extras.update(
                mass_linear=est.linear_part,
                mass_nonlinear=est.nonlinear_part,
                mass_tail=est.tail,
                mass_total=est.total,
            )
            m_values = [p0p1, est.total]
        except ValueError as exc:
            extras["mass_note"] = str(exc)
            m_values = [p0p1]
        ks = sorted({0.0, *config.k_list})
        for st in traj.states:
            if st.time <= 0:
                continue
            for k in ks:
                for m in m_values:
                    profile_rows.append((st.time, k, m, profile_error(st, m, k)))
        k0 = max(config.k_list) if config.k_list else 0.0
        try:
            extras["xnorm_full"] = xnorm(traj, config.n, k0)
            extras["xnorm_half"] = xnorm(traj, config.n, k0, t_max=traj.times[-1] / 2.0)
        except (KeyError, ValueError):
            pass
    write_csv(os.path.join(out, "profile.csv"), ["t", "k", "M_used", "error"], profile_rows)
    return extras, EXIT_BLOWUP if traj.blown_up else EXIT_OK


def _sweep_run(config: ExperimentConfig) -> Trajectory:
    return run(config)


def _exp_fujita_sweep(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    ps = config.p_list or (config.p,)
    cases = [(p, config.amp, "main") for p in ps] + [(p, config.control_amp, "control") for p in ps]
    sub_configs = [
        replace(config, p=p, amp=amp, u0=(), u1=(), p_list=(), snapshot_times=())
        for p, amp, _ in cases
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            trajectories = list(pool.map(_sweep_run, sub_configs))
    else:
        trajectories = [_sweep_run(sc) for sc in sub_configs]

    lines = ["p amp kind classification sup_ratio annotation"]
    extras: dict = {}
    for (p, amp, kind), sub, traj in zip(cases, sub_configs, trajectories):
        sub_out = os.path.join(out, f"p{p:g}_amp{amp:g}")
        os.makedirs(sub_out, exist_ok=True)
        write_csv(
            os.path.join(sub_out, "observables.csv"),
            _observable_header(sub.k_list),
            _trajectory_rows(traj),
        )
        result = classify(traj)
        note = result.annotation or "-"
        lines.append(f"{p:g} {amp:g} {kind} {result.label} {result.sup_ratio:.6g} {note}")
        extras[f"class_p{p:g}_amp{amp:g}"] = result.label
    tmp = os.path.join(out, "classification.txt.tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, os.path.join(out, "classification.txt"))
    return extras, EXIT_OK


def _exp_blowup_functional(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    r_list = config.r_list or (10.0, 20.0, 40.0)
    horizon = max(r_list) ** 2
    cadence = min(r_list) ** 2 / 100.0
    run_config = replace(config, T=horizon, snapshot_dt=cadence, snapshot_times=())
    traj = run(run_config)
    grid = make_grid(config.n, config.N, config.L)
    u0, _ = build_initial_data(config, grid)
    rows = []
    if not traj.blown_up:
        for r in r_list:
            rows.append(
                (
                    r,
                    kr_functional(traj, r, config.p),
                    annulus_integral(traj, r, config.p),
                    viscoelastic_term(u0, r, config.p),
                )
            )
    write_csv(os.path.join(out, "observables.csv"), _observable_header(config.k_list), _trajectory_rows(traj))
    write_csv(
        os.path.join(out, "fits.csv"),
        FITS_HEADER,
        [] if traj.blown_up else _fit_rows(traj, ["l2"]),
    )
    write_csv(os.path.join(out, "kr.csv"), ["R", "K_R", "annulus", "viscoelastic"], rows)
    extras = _data_extras(run_config, traj)
    extras["t_horizon"] = horizon
    return extras, EXIT_OK


def _exp_lemma_oracles(config: ExperimentConfig, out: str) -> tuple[dict, int]:
    reports = [
        gaussian_moment_report(k=1.0, r=2.0, n=config.n, times=np.logspace(0, 3, 16)),
        convolution_decay_report(a=2.0, b=0.5, times=np.logspace(0, 4, 17)),
        smoothed_convolution_report(a=0.5, b=1.0, c=1.0, times=np.logspace(0, 4, 17)),
    ]
    rows = []
    extras = {}
    for rep in reports:
        for t, lhs, bound in zip(rep.times, rep.lhs, rep.bound):
            rows.append((rep.label, t, lhs, bound, lhs / bound))
        extras[f"spread[{rep.label}]"] = rep.spread
    write_csv(os.path.join(out, "oracles.csv"), ["oracle", "t", "lhs", "bound", "ratio"], rows)
    return extras, EXIT_OK


_DISPATCH = {
    "linear-decay": _exp_linear_decay,
    "profile": _exp_profile,
    "nonlinear-decay": _exp_nonlinear_decay,
    "fujita-sweep": _exp_fujita_sweep,
    "blowup-functional": _exp_blowup_functional,
    "lemma-oracles": _exp_lemma_oracles,
}


def run_experiment(config: ExperimentConfig) -> int:
    """Validate, dispatch, and write artifacts; returns the process exit code."""
    try:
        config.validate()
    except ConfigError as exc:
        print(f"viscowave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    out = config.out_dir or "out"
    os.makedirs(out, exist_ok=True)
    started = time.perf_counter()
    try:
        extras, code = _DISPATCH[config.experiment](config, out)
    except TruncationError as exc:
        print(f"viscowave: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    write_manifest(os.path.join(out, "manifest.txt"), config, extras, time.perf_counter() - started)
    return code
