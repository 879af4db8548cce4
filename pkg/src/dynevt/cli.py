"""Command-line front end.

Subcommands::

    dynevt simulate  --config cfg.ini --out DIR [--seed S]   write an orbit CSV
    dynevt dimension --config cfg.ini --out DIR [--seed S]   local dimension estimate
    dynevt ei        --config cfg.ini --out DIR [--seed S]   cluster coefficients / theta
    dynevt visits    --config cfg.ini --out DIR [--seed S]   visit-count distribution
    dynevt spectrum  --config cfg.ini --out DIR [--seed S]   generalized dimensions D_q
    dynevt embed     --config cfg.ini --out DIR [--seed S]   delay-coordinate ladder
    dynevt ingest    --path data.csv --out DIR [...]         analyze an external record
    dynevt preset    --name NAME --out DIR [--seed S]        run a named experiment

The config file format is described in ``dynevt.config``; the ``[run]``
section carries method parameters (orbit_length, block_size, trials, quantile,
seed, t, ensemble, ks, q_grid).  Every command echoes a config snapshot next
to its results so runs can be reproduced bit-exactly.  ``preset`` exits
nonzero unless every manifest check passes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from dynevt import config as cfgmod
from dynevt import presets as presetmod
from dynevt.dimensions import estimate_Dq
from dynevt.extremal import empirical_theta
from dynevt.gev import block_maxima, estimate_dimension, fit_gev, sample_attractor_point, trial_phi_series
from dynevt.ingest import analyze_series, ingest, synthetic_pressure_grid, write_series
from dynevt.observables import Coordinate, Delay, SpatialMean, TargetSpec, series_values
from dynevt.rng import stream
from dynevt.systems import default_burn_in, orbit, random_initial
from dynevt.visits import poisson_pmf, visit_counts


def _run_get(run, key, cast, default):
    if run is None or key not in run:
        return default
    return cast(run[key])


def _load(args, need_observable=True, need_target=True):
    cp = cfgmod.load_config(args.config)
    system = cfgmod.system_from_config(cp, "system")
    observable = (
        cfgmod.observable_from_config(cp, "observable")
        if need_observable and cp.has_section("observable")
        else None
    )
    target = (
        cfgmod.target_from_config(cp, "target")
        if need_target and cp.has_section("target")
        else None
    )
    run = cp["run"] if cp.has_section("run") else None
    seed = args.seed if args.seed is not None else _run_get(run, "seed", int, 0)
    return cp, system, observable, target, run, seed


def _echo_config(cp, out_dir, seed):
    cp2 = cfgmod.new_config()
    for section in cp.sections():
        cp2[section] = dict(cp[section])
    if not cp2.has_section("run"):
        cp2["run"] = {}
    cp2["run"]["seed"] = str(seed)
    cfgmod.write_config(os.path.join(out_dir, "config_echo.ini"), cp2)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args) -> int:
    cp, system, _, _, run, seed = _load(args, need_observable=False, need_target=False)
    n = _run_get(run, "orbit_length", int, 10_000)
    os.makedirs(args.out, exist_ok=True)
    g = stream(seed, 0)
    x0 = random_initial(system, g)
    traj = orbit(system, x0, n, seed, stream_index=0)
    states = traj.states if traj.states.ndim == 2 else traj.states[:, None]
    labels = [f"x{i + 1}" for i in range(states.shape[1])]
    write_series(os.path.join(args.out, "orbit.csv"), states, labels)
    _echo_config(cp, args.out, seed)
    print(f"wrote {n} states to {args.out}/orbit.csv")
    return 0


def cmd_dimension(args) -> int:
    cp, system, observable, target, run, seed = _load(args)
    if observable is None or target is None:
        raise SystemExit("dimension needs [observable] and [target] sections")
    M = _run_get(run, "orbit_length", int, 10**7)
    n_block = _run_get(run, "block_size", int, 5000)
    trials = _run_get(run, "trials", int, 10)
    os.makedirs(args.out, exist_ok=True)
    est = estimate_dimension(
        system, observable, target, orbit_length=M, block_size=n_block,
        trials=trials, seed=seed,
    )
    rows = [
        [t, d, f.sigma, f.kappa, f.xi]
        for t, (d, f) in enumerate(zip(est.per_trial, est.fits))
    ]
    presetmod._write_csv(
        os.path.join(args.out, "dimension_trials.csv"),
        ["trial", "d", "sigma", "kappa", "xi"],
        rows,
    )
    _write_json(
        os.path.join(args.out, "dimension.json"),
        {
            "d": est.d, "sd": est.sd, "trials": est.trials,
            "orbit_length": M, "block_size": n_block, "seed": seed,
        },
    )
    _echo_config(cp, args.out, seed)
    print(est)
    return 0


def cmd_ei(args) -> int:
    cp, system, observable, target, run, seed = _load(args)
    if observable is None or target is None:
        raise SystemExit("ei needs [observable] and [target] sections")
    M = _run_get(run, "orbit_length", int, 10**7)
    trials = _run_get(run, "trials", int, 1)
    p = _run_get(run, "quantile", float, 0.999)
    K = _run_get(run, "K", int, 5)
    os.makedirs(args.out, exist_ok=True)
    ccs = empirical_theta(system, observable, target, M, seed, trials=trials, p=p, K=K)
    rows = [
        [t, cc.u, cc.n_exceedances] + list(cc.q) + [cc.theta]
        for t, cc in enumerate(ccs)
    ]
    presetmod._write_csv(
        os.path.join(args.out, "ei_trials.csv"),
        ["trial", "u", "n_exceedances"] + [f"q{k}" for k in range(K)] + ["theta"],
        rows,
    )
    thetas = [cc.theta for cc in ccs]
    _write_json(
        os.path.join(args.out, "ei.json"),
        {
            "theta_mean": float(np.mean(thetas)), "theta_sd": float(np.std(thetas)),
            "trials": trials, "quantile": p, "K": K, "orbit_length": M, "seed": seed,
        },
    )
    _echo_config(cp, args.out, seed)
    print(f"theta_{K} = {np.mean(thetas):.4f} +/- {np.std(thetas):.4f}")
    return 0


def cmd_visits(args) -> int:
    cp, system, observable, target, run, seed = _load(args)
    if observable is None or target is None:
        raise SystemExit("visits needs [observable] and [target] sections")
    t_par = _run_get(run, "t", float, 10.0)
    M = _run_get(run, "orbit_length", int, 10**6)
    ensemble = _run_get(run, "ensemble", int, 10_000)
    p = _run_get(run, "quantile", float, 0.995)
    os.makedirs(args.out, exist_ok=True)
    vd = visit_counts(
        system, observable, target, t=t_par, orbit_length=M,
        ensemble=ensemble, seed=seed, p_quantile=p,
    )
    kmax = len(vd.pmf) - 1
    rows = [[k, float(vd.pmf[k]), poisson_pmf(t_par, k)] for k in range(kmax + 1)]
    presetmod._write_csv(
        os.path.join(args.out, "visits.csv"), ["k", "empirical", "poisson"], rows
    )
    _write_json(
        os.path.join(args.out, "visits.json"),
        {
            "t": vd.t, "radius": vd.r, "measure_estimate": vd.measure_estimate,
            "measure_estimate_half_pilot": vd.measure_estimate_half,
            "horizon": vd.horizon, "ensemble": vd.ensemble, "seed": seed,
        },
    )
    _echo_config(cp, args.out, seed)
    print(f"visit counts over horizon {vd.horizon}: mean {vd.counts.mean():.2f}")
    return 0


def cmd_spectrum(args) -> int:
    cp, system, observable, target, run, seed = _load(args, need_target=False)
    if observable is None:
        raise SystemExit("spectrum needs an [observable] section")
    M = _run_get(run, "orbit_length", int, 2 * 10**6)
    q_grid = _run_get(
        run, "q_grid", lambda s: tuple(float(v) for v in s.split(",")),
        (1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0),
    )
    os.makedirs(args.out, exist_ok=True)
    g = stream(seed, 0)
    x0 = random_initial(system, g)
    burn = default_burn_in(system)
    traj = orbit(system, x0, M + burn, seed, stream_index=0)
    vals = series_values(observable, traj.states[burn:], system)
    spec = estimate_Dq(vals, q_grid=q_grid, seed=seed)
    rows = [[q, d, r2] for q, d, r2 in zip(spec.q, spec.D, spec.r2)]
    presetmod._write_csv(os.path.join(args.out, "spectrum.csv"), ["q", "D", "r2"], rows)
    _write_json(
        os.path.join(args.out, "spectrum.json"),
        {"q": list(spec.q), "D": list(spec.D), "flagged": list(spec.flagged),
         "orbit_length": M, "seed": seed},
    )
    _echo_config(cp, args.out, seed)
    print("D_q:", {q: round(d, 4) for q, d in spec.as_dict().items()})
    return 0


def cmd_embed(args) -> int:
    cp, system, observable, target, run, seed = _load(args, need_target=False)
    base = observable if observable is not None else Coordinate(index=0)
    M = _run_get(run, "orbit_length", int, 4 * 10**6)
    n_block = _run_get(run, "block_size", int, 1000)
    trials = _run_get(run, "trials", int, 5)
    ks = _run_get(run, "ks", lambda s: tuple(int(v) for v in s.split(",")), (1, 2, 3, 4, 5))
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for k in ks:
        obs = Delay(base=base, k=k)
        ds = []
        for t in range(trials):
            z = sample_attractor_point(system, seed, 61 + 10 * k + t, warm=12_000)
            tgt = TargetSpec(z=tuple(np.atleast_1d(z).astype(float)))
            phis = trial_phi_series(system, obs, tgt, M, seed, 1000 * k + t)
            fit = fit_gev(block_maxima(phis, n_block), gumbel_constrained=True)
            ds.append(1.0 / fit.sigma)
        rows.append([k, float(np.mean(ds)), float(np.std(ds)), trials])
        print(f"k={k}: d = {np.mean(ds):.3f} +/- {np.std(ds):.3f}")
    presetmod._write_csv(os.path.join(args.out, "embed.csv"), ["k", "d", "sd", "trials"], rows)
    _echo_config(cp, args.out, seed)
    return 0


def cmd_ingest(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    if args.generate:
        values, labels = synthetic_pressure_grid(seed=seed)
        path = os.path.join(args.out, "synthetic_grid.csv")
        write_series(path, values, labels)
        print(f"wrote synthetic record to {path}")
        if args.path is None:
            args.path = path
    if args.path is None:
        raise SystemExit("ingest needs --path (or --generate)")
    series = ingest(args.path, delimiter=args.delimiter)
    obs = (
        SpatialMean()
        if args.observable == "spatial_mean"
        else Coordinate(index=int(args.observable.removeprefix("coordinate")))
    )
    res = analyze_series(
        series, observable=obs, block_size=args.block, p_quantile=args.quantile,
        n_targets=args.targets, seed=seed,
    )
    presetmod._write_csv(
        os.path.join(args.out, "series_analysis.csv"),
        ["row", "f0", "d", "sigma", "kappa", "xi", "theta0"],
        [[r.row, r.f0, r.d, r.sigma, r.kappa, r.xi, r.theta0] for r in res.records],
    )
    summary = res.summary()
    summary["n_rows"] = series.n_rows
    summary["n_cols"] = series.n_cols
    summary["n_dropped_rows"] = series.n_dropped
    summary["seed"] = seed
    _write_json(os.path.join(args.out, "series_analysis.json"), summary)
    print(
        f"{series.n_rows} rows x {series.n_cols} cols ({series.n_dropped} dropped); "
        f"d = {summary['d_mean']:.3f} +/- {summary['d_sd']:.3f}, "
        f"theta0 = {summary['theta0_mean']:.3f}"
    )
    return 0


def cmd_preset(args) -> int:
    if args.list:
        for name in sorted(presetmod.PRESETS):
            doc = (presetmod.PRESETS[name].__doc__ or "").strip().splitlines()[0]
            print(f"{name:20s} {doc}")
        return 0
    if args.name is None:
        raise SystemExit("preset needs --name (or --list)")
    seed = args.seed if args.seed is not None else 1
    manifest = presetmod.run_preset(args.name, seed=seed, out_dir=args.out, scale=args.scale)
    for c in manifest["checks"]:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[c["passed"]]
        print(f"[{status}] {c['name']}: computed {c['computed']} vs {c['reference']}")
    print(f"manifest: {os.path.join(args.out, 'manifest.json')}")
    return 0 if manifest["all_pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dynevt",
        description="Extreme-value recurrence analysis of observables on chaotic systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="INI experiment file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")

    p = sub.add_parser("simulate", help="simulate an orbit")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("dimension", help="estimate the local image-measure dimension")
    common(p)
    p.set_defaults(fn=cmd_dimension)

    p = sub.add_parser("ei", help="estimate cluster coefficients and the extremal index")
    common(p)
    p.set_defaults(fn=cmd_ei)

    p = sub.add_parser("visits", help="empirical visit-count distribution")
    common(p)
    p.set_defaults(fn=cmd_visits)

    p = sub.add_parser("spectrum", help="generalized-dimension spectrum of an observable")
    common(p)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("embed", help="delay-coordinate dimension ladder")
    common(p)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("ingest", help="ingest and analyze an external record")
    common(p, config=False)
    p.add_argument("--path", default=None, help="delimited text file to analyze")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--observable", default="spatial_mean",
                   help="spatial_mean or coordinate<i>")
    p.add_argument("--block", type=int, default=50, help="block size for maxima")
    p.add_argument("--quantile", type=float, default=0.99)
    p.add_argument("--targets", type=int, default=50)
    p.add_argument("--generate", action="store_true",
                   help="write (and analyze) a synthetic gridded record")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("preset", help="run a named, reference-checked experiment")
    common(p, config=False)
    p.add_argument("--name", default=None)
    p.add_argument("--scale", choices=("desk", "full"), default="desk")
    p.add_argument("--list", action="store_true", help="list preset names")
    p.set_defaults(fn=cmd_preset)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    _sys.exit(main())
