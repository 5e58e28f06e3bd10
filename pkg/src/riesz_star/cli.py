"""Command-line entry point: ``riesz-star {steady,evolve,verify,fit-decay}``.

Exit codes: 0 ok, 2 configuration or regime error, 3 guard trip, 4 failed
verification (also steady non-convergence and a failed decay fit),
5 degenerate fit input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checks
from .diagnostics import NORM_NAMES, DegenerateFitError, EnergyReport, decay_fit, trajectory_reports
from .io import (SNAPSHOT_COLUMNS, OutputSettings, RunConfig, SteadySettings, canonical_json,
                 load_profile, read_csv, save_profile, write_csv, write_json)
from .kernel import RegimeError, RieszParams, beta_fn
from .scheme import ConfigError, LagrangianScheme, SchemeConfig, simulate
from .steady import SteadyConvergenceError, SteadyProfile, solve_steady

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_VERIFY, EXIT_DEGENERATE = 0, 2, 3, 4, 5

ENERGY_COLUMNS = EnergyReport.CSV_COLUMNS + ("e_h",)
FIT_PASS_SLOPE = -0.4
IDENTITY_TOL = 1e-6
BETA_TOL = 1e-8
HARDY_DRIFT = 0.01


def _err(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def _prepare_out(directory) -> Path:
    """Create the output directory and make sure it is writable."""
    d = Path(directory).resolve()
    d.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryFile(dir=d):
        pass
    return d


# ------------------------------------------------------------------- steady
def cmd_steady(cfg: RunConfig) -> int:
    out = _prepare_out(cfg.outputs.directory)
    st = cfg.steady
    try:
        prof = solve_steady(cfg.params, n=st.n_grid, tol=st.tol, relax=st.relax)
    except SteadyConvergenceError as exc:
        _err("steady_nonconvergence", str(exc), iterations=len(exc.history),
             last_change=exc.history[-1] if exc.history else None)
        return EXIT_VERIFY
    save_profile(prof, out)
    print(f"residual {prof.residual:.6e} iterations {prof.iterations}")
    return EXIT_OK


# ------------------------------------------------------------------- evolve
def _snapshot_rows(scheme: LagrangianScheme, traj):
    n = scheme.n
    ks = np.arange(-n, n + 1)
    x = ks * scheme.h
    for snap in traj.snapshots:
        st = snap.state
        eta, rho_cell, v, _ = scheme.eulerian(st)
        stretch = np.diff(eta) / scheme.h
        stretch = np.append(stretch, stretch[-1])
        for i in range(ks.size):
            yield (float(st.t), int(ks[i]), x[i], eta[i], v[i], stretch[i], rho_cell[i])


def cmd_evolve(cfg: RunConfig, profile: SteadyProfile | None = None) -> int:
    out = _prepare_out(cfg.outputs.directory)
    if profile is None:
        st = cfg.steady
        profile = solve_steady(cfg.params, n=st.n_grid, tol=st.tol, relax=st.relax)
    elif (abs(profile.s - cfg.params.s) > 1e-12 or abs(profile.gamma - cfg.params.gamma) > 1e-12):
        _err("config", f"profile has (s, gamma) = ({profile.s}, {profile.gamma}), "
                       f"run asks for ({cfg.params.s}, {cfg.params.gamma})")
        return EXIT_CONFIG
    scfg = replace(cfg.scheme, snapshot_every=cfg.outputs.snapshot_every)
    scheme = LagrangianScheme(profile, scfg)
    with np.errstate(all="ignore"):
        traj = simulate(scfg, profile, scheme=scheme, record_step_energy=False)

    write_csv(out / "snapshots.csv", SNAPSHOT_COLUMNS, _snapshot_rows(scheme, traj))
    reports = trajectory_reports(traj)
    rows = (r.row() + (s.forces.energy,) for r, s in zip(reports, traj.snapshots))
    write_csv(out / "energy.csv", ENERGY_COLUMNS, rows)
    manifest = {
        "run_id": cfg.run_id(profile.digest()),
        "config": cfg.to_dict(include_paths=False),
        "profile_hash": profile.digest(),
        "dt": scheme.default_dt(),
        "steps": traj.steps,
        "snapshots": len(traj.snapshots),
        "guard": {"status": traj.status, "time": traj.guard_time, "message": traj.message},
    }
    write_json(out / "manifest.json", manifest)
    if traj.status != "completed":
        _err("guard_trip", traj.message, time=traj.guard_time)
        return EXIT_GUARD
    print(f"completed {traj.steps} steps, {len(traj.snapshots)} snapshots")
    return EXIT_OK


# ------------------------------------------------------------------- verify
def _record(name, trials, failures, worst_margin, worst_case=None, **info):
    rec = {"name": name, "trials": int(trials), "failures": int(failures),
           "worst_margin": None if worst_margin is None else float(worst_margin)}
    if worst_case is not None:
        rec["worst_case"] = worst_case
    rec.update(info)
    return rec


def _fn_desc(w) -> dict:
    return {"kind": w.kind, "params": [float(v) for v in w.params]}


def verify_identity(profile, seed, count):
    fam = list(checks.TestFunctionFamily(seed=seed, count=count))
    worst, case, fails = np.inf, None, 0
    for w in fam:
        res = checks.quadratic_identity_check(w, profile)
        ok = res.rel_error <= IDENTITY_TOL and res.lhs <= 0.0
        fails += not ok
        m = 1.0 - res.rel_error / IDENTITY_TOL if res.lhs <= 0.0 else -np.inf
        if m < worst:
            worst, case = m, {**_fn_desc(w), "rel_error": res.rel_error}
    return _record("quadratic_identity", len(fam), fails, worst, case)


def verify_coercivity(profile, seed, count):
    p = profile.params
    fam = checks.TestFunctionFamily(seed=seed, count=count)
    worst, case, fails, max_ratio = np.inf, None, 0, 0.0
    for w in fam:
        res = checks.coercivity_check(w, profile)
        fails += not res.passed
        m = 1.0 - res.ratio
        max_ratio = max(max_ratio, res.ratio)
        if m < worst:
            worst, case = m, {**_fn_desc(w), "ratio": res.ratio}
    return _record("coercivity", count, fails, worst, case, max_ratio=max_ratio,
                   ratio_bound_analytic=p.gamma / (2.0 * (1.0 - p.s)))


def verify_remainders(p, seed, trials, aeps=0.05):
    sweep = checks.remainder_sweep(p, trials=trials, aeps=aeps, seed=seed)
    out = []
    for r in checks.REMAINDERS:
        rec = sweep[r]
        expo = checks.remainder_scaling(r, p, seed=seed)
        out.append(_record(f"remainder_{r}", rec["trials"], rec["failures"],
                           rec["worst_margin"] if rec["trials"] else None,
                           scaling_exponent=expo, aeps=aeps))
    return out


def verify_beta(seed, points=20):
    rng = np.random.default_rng(seed)
    worst, case, fails = np.inf, None, 0
    for _ in range(points):
        x = float(rng.uniform(-0.95, 0.95))
        alpha = float(rng.uniform(0.05, 0.9))
        s = float(rng.uniform(0.3, 0.49))
        res = checks.beta_identity_check(x, alpha, s)
        fails += res.rel_error > BETA_TOL
        m = 1.0 - res.rel_error / BETA_TOL
        if m < worst:
            worst, case = m, {"x": x, "alpha": alpha, "s": s, "rel_error": res.rel_error}
    pi_err = abs(beta_fn(0.5, 0.5) - np.pi)
    fails += pi_err > 1e-10
    worst = min(worst, 1.0 - pi_err / 1e-10)
    return _record("beta_identity", points + 1, fails, worst, case)


def verify_hardy(seed, count=50, n=4000):
    fam = list(checks.TestFunctionFamily(seed=seed, count=count))
    rng = np.random.default_rng(seed + 1)
    worst, case, fails, sup_ratio = np.inf, None, 0, 0.0
    for w in fam:
        k = float(rng.uniform(1.25, 3.0))
        r1 = checks.hardy_check(w, k, n=n, deriv=w.deriv).ratio
        r2 = checks.hardy_check(w, k, n=2 * n, deriv=w.deriv).ratio
        drift = abs(r2 - r1) / max(abs(r2), 1e-300)
        ok = np.isfinite(r1) and np.isfinite(r2) and drift < HARDY_DRIFT
        fails += not ok
        sup_ratio = max(sup_ratio, r2)
        m = 1.0 - drift / HARDY_DRIFT
        if m < worst:
            worst, case = m, {**_fn_desc(w), "k_exp": k, "drift": drift}
    return _record("hardy_refinement", count, fails, worst, case, sup_ratio=sup_ratio)


def run_verify(profile: SteadyProfile, seed: int = 0, identity_functions: int = 20,
               coercivity_functions: int = 1000, remainder_trials: int = 10_000,
               hardy_functions: int = 50) -> dict:
    p = profile.params
    report = [verify_identity(profile, seed, identity_functions),
              verify_coercivity(profile, seed, coercivity_functions),
              *verify_remainders(p, seed, remainder_trials),
              verify_beta(seed),
              verify_hardy(seed, hardy_functions)]
    total = sum(r["failures"] for r in report)
    ranked = [r for r in report if r["worst_margin"] is not None]
    worst = min(ranked, key=lambda r: r["worst_margin"])["name"] if ranked else None
    return {"seed": int(seed), "params": p.to_dict(), "profile_hash": profile.digest(),
            "checks": report, "failures": total, "worst_check": worst}


def cmd_verify(cfg: RunConfig, profile: SteadyProfile | None = None, **counts) -> int:
    out = _prepare_out(cfg.outputs.directory)
    if profile is None:
        st = cfg.steady
        profile = solve_steady(cfg.params, n=st.n_grid, tol=st.tol, relax=st.relax)
    report = run_verify(profile, seed=cfg.seed, **counts)
    write_json(out / "verify.json", report)
    sys.stdout.write(canonical_json(report))
    if report["failures"]:
        _err("verification", f"{report['failures']} failures, worst check {report['worst_check']}")
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------- fit-decay
def cmd_fit_decay(path, norm: str, window, out_dir=None) -> int:
    cols = read_csv(path)
    key = f"norm_{norm}" if norm in NORM_NAMES else norm
    if key not in cols or "t" not in cols:
        _err("config", f"unknown norm {norm!r}")
        return EXIT_CONFIG
    try:
        fit = decay_fit(cols["t"], cols[key], window=tuple(window))
    except DegenerateFitError as exc:
        _err("degenerate_fit", str(exc), norm_name=norm)
        return EXIT_DEGENERATE
    rec = {"norm_name": norm, "window": [float(window[0]), float(window[1])],
           "slope": fit.slope, "r2": fit.r2, "samples": fit.samples,
           "pass": bool(fit.slope <= FIT_PASS_SLOPE)}
    if out_dir is not None:
        write_json(_prepare_out(out_dir) / f"fit_{norm}.json", rec)
    sys.stdout.write(canonical_json(rec))
    return EXIT_OK if rec["pass"] else EXIT_VERIFY


# ------------------------------------------------------------------ parsing
def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--s", type=float, default=None, help="interaction exponent (default 0.45)")
    common.add_argument("--gamma", type=float, default=None, help="adiabatic exponent (default 1.2)")
    common.add_argument("--strict-regime", action="store_true",
                        help="require 3/8 < s < 1/2 and gamma < 1 + 2s/3")
    common.add_argument("--tol", type=float, default=1e-10, help="steady solver tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--inject-fault", choices=["kernel-sign"], help=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="riesz-star", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("steady", parents=[common], help="solve for the steady profile")
    sp.add_argument("--n", type=int, default=400, help="half-grid count of the profile")
    sp.add_argument("--relax", type=float, default=0.5)

    ev = sub.add_parser("evolve", parents=[common], help="run the Lagrangian scheme")
    ev.add_argument("--n", type=int, default=200, help="half-grid count of the scheme")
    ev.add_argument("--profile", help="profile CSV written by 'steady' (JSON header alongside)")
    ev.add_argument("--steady-n", type=int, default=None,
                    help="profile half-grid count when no profile file is given "
                         "(default: smallest multiple of --n that is at least 400)")
    ev.add_argument("--eps0", type=float, default=0.01)
    ev.add_argument("--t-end", type=float, default=50.0)
    ev.add_argument("--dt", type=float, default=None)
    ev.add_argument("--integrator", choices=["imex_be", "explicit_rk4"], default="imex_be")
    ev.add_argument("--dt-policy", choices=["fixed", "adaptive"], default="fixed")
    ev.add_argument("--snapshot-every", type=float, default=0.25)

    vf = sub.add_parser("verify", parents=[common], help="run the inequality and identity sweeps")
    vf.add_argument("--n", type=int, default=400, help="half-grid count of the profile")
    vf.add_argument("--profile", help="profile CSV written by 'steady'")
    vf.add_argument("--identity-functions", type=int, default=20)
    vf.add_argument("--coercivity-functions", type=int, default=1000)
    vf.add_argument("--remainder-trials", type=int, default=10_000)
    vf.add_argument("--hardy-functions", type=int, default=50)

    fd = sub.add_parser("fit-decay", help="fit a power-law decay rate to an energy series")
    fd.add_argument("series", help="energy CSV written by 'evolve'")
    fd.add_argument("--norm", required=True,
                    help=f"one of {', '.join(NORM_NAMES)} or any column of the CSV")
    fd.add_argument("--window", type=float, nargs=2, default=(5.0, 50.0), metavar=("T_LO", "T_HI"))
    fd.add_argument("--out", default=None, help="also write the fit record here")
    return ap


def _params(args, profile: SteadyProfile | None) -> RieszParams:
    s = args.s if args.s is not None else (profile.s if profile else 0.45)
    g = args.gamma if args.gamma is not None else (profile.gamma if profile else 1.2)
    return RieszParams(s, g, strict_regime=args.strict_regime)


def config_from_args(args, profile: SteadyProfile | None = None) -> RunConfig:
    params = _params(args, profile)
    if args.command == "evolve":
        steady_n = args.steady_n or args.n * -(-400 // args.n)
    else:
        steady_n = args.n
    steady = SteadySettings(n_grid=steady_n, tol=args.tol, relax=getattr(args, "relax", 0.5))
    if args.command == "evolve":
        scheme = SchemeConfig(n=args.n, t_end=args.t_end, dt=args.dt, dt_policy=args.dt_policy,
                              integrator=args.integrator, eps0=args.eps0,
                              snapshot_every=args.snapshot_every)
        outputs = OutputSettings(directory=args.out, snapshot_every=args.snapshot_every)
    else:
        scheme = SchemeConfig()
        outputs = OutputSettings(directory=args.out)
    return RunConfig(params=params, scheme=scheme, steady=steady, outputs=outputs, seed=args.seed)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "fit-decay":
        try:
            return cmd_fit_decay(args.series, args.norm, args.window, args.out)
        except (OSError, ValueError) as exc:
            _err("config", str(exc))
            return EXIT_CONFIG

    old_sign = checks.KERNEL_SIGN
    if args.inject_fault == "kernel-sign":
        checks.KERNEL_SIGN = -1.0
    try:
        profile = None
        if getattr(args, "profile", None):
            profile = load_profile(args.profile)
        cfg = config_from_args(args, profile)
        if args.command == "steady":
            return cmd_steady(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg, profile)
        return cmd_verify(cfg, profile, identity_functions=args.identity_functions,
                          coercivity_functions=args.coercivity_functions,
                          remainder_trials=args.remainder_trials,
                          hardy_functions=args.hardy_functions)
    except SteadyConvergenceError as exc:
        _err("steady_nonconvergence", str(exc), iterations=len(exc.history))
        return EXIT_VERIFY
    except (RegimeError, ConfigError) as exc:
        _err("regime" if isinstance(exc, RegimeError) else "config", str(exc))
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        _err("config", str(exc))
        return EXIT_CONFIG
    finally:
        checks.KERNEL_SIGN = old_sign


if __name__ == "__main__":
    sys.exit(main())
