"""Command-line entry point: ``hons {simulate,picard,norms,verify,estimate}``.

Exit status 0 on success, 2 on a failed check or invalid input, 3 on blow-up.
Every non-zero exit also writes ``error.json`` into the output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bourgain as B
from . import dynamics as D
from . import invariants as I
from . import reference as R
from .config import COMMANDS, ConfigError, RunConfig, load_config, serialize
from .dispersion import ResonanceTriple, q_minus, q_plus, resonance_factor
from .grid import PairState, SpectralField, sobolev_norm, to_physical
from .snapshot import SnapshotFormatError, write_snapshot

EXIT_OK, EXIT_FAILED, EXIT_BLOWUP = 0, 2, 3


class CheckFailed(RuntimeError):
    """A run completed but one of its acceptance conditions did not hold."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([_fmt(v) for v in r])


def _threads() -> int:
    raw = os.environ.get("HONS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HONS_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"HONS_THREADS must be a positive integer, got {raw!r}")
    return n


# ---------------------------------------------------------------------------
# subcommands


def _write_trajectory(traj: D.Trajectory, out: Path) -> None:
    write_csv(out / "diagnostics.csv", I.CSV_HEADER.split(","), (d.row() for d in traj.diagnostics))
    for i, st in enumerate(traj.states):
        write_snapshot(st, out / f"snapshot_{i:05d}.hnls")


def cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    params = cfg.params
    st0 = cfg.initial_state()
    try:
        traj = D.evolve(st0, cfg.T, cfg.dt, params, cfg.save_every, cfg.formulation,
                        monitor=lambda s: I.sample(s, params))
    except D.BlowUpError as e:
        if e.trajectory is not None:
            _write_trajectory(e.trajectory, out)
        raise
    _write_trajectory(traj, out)
    d = traj.diagnostics
    return {"snapshots": len(traj.states), "I1_drift": abs(d[-1].I1 - d[0].I1) / d[0].I1 if d[0].I1 else 0.0}


def cmd_picard(cfg: RunConfig, out: Path) -> dict:
    st0 = cfg.initial_state()
    rep = D.picard_solve(st0, cfg.picard_T, cfg.picard_nodes, cfg.picard_max_iter, cfg.picard_tol, cfg.params, cfg.s)
    ratios = [float("nan")] + list(rep.contraction_ratios)
    write_csv(out / "picard.csv", ["iteration", "distance", "contraction_ratio"],
              ((i + 1, d, r) for i, (d, r) in enumerate(zip(rep.distances, ratios))))
    if rep.n_iterations:
        write_snapshot(rep.state_at(-1), out / "picard_final.hnls")
    summary = {"iterations": rep.n_iterations, "converged": rep.converged, "final_error": rep.final_error}
    if not rep.converged or not rep.contracting:
        raise CheckFailed(f"Picard iteration did not contract to tolerance: {summary}")
    return summary


def cmd_norms(cfg: RunConfig, out: Path) -> dict:
    st0 = cfg.initial_state()
    traj = D.evolve(st0, cfg.T, cfg.dt, cfg.params, cfg.save_every, cfg.formulation)
    su, sw = B.spacetime_transform(traj)
    rows = []
    for name, spec in (("u", su), ("w", sw)):
        rows.append((name, cfg.s, B.xsb_norm(spec, cfg.s, 0.5), B.zs_norm(spec, cfg.s), B.ys_norm(spec, cfg.s)))
    write_csv(out / "norms.csv", ["component", "s", "x_s_half", "z_s", "y_s"], rows)
    return {"samples": len(traj.states)}


def _check_rows(cfg: RunConfig) -> list[tuple[str, float, float, object]]:
    """(check, value, tolerance, passed) rows; passed is 'skipped' when the parameters do not apply."""
    params = cfg.params
    grid = cfg.grid
    st0 = cfg.initial_state()
    rows: list[tuple[str, float, float, object]] = []

    def add(name, value, tol, ok=None):
        rows.append((name, value, tol, bool(value <= tol) if ok is None else ok))

    def skip(name):
        rows.append((name, float("nan"), float("nan"), "skipped"))

    # linear group
    gp = params.gauged(st0.u, st0.w)
    worst = 0.0
    for t in (0.1, 1.0, 10.0):
        o = D.apply_linear(st0, t, gp)
        for s in (0.0, 0.5, 1.0):
            for a, b in ((st0.u, o.u), (st0.w, o.w)):
                n0 = sobolev_norm(a.coeffs, grid, s)
                if n0 > 0:
                    worst = max(worst, abs(sobolev_norm(b.coeffs, grid, s) - n0) / n0)
    add("linear_unitarity", worst, 1e-12)

    # resonance identity in exact arithmetic at the configured q
    rng = np.random.default_rng(cfg.seed)
    q = Fraction(params.q).limit_denominator(10**6)
    g = Fraction(params.gamma).limit_denominator(10**6)
    p_exact = params.replace(q=q, gamma=g, c0=Fraction(1, 3))
    bad = 0
    if g == 2:
        for _ in range(1000):
            n, n1, n2 = (int(v) for v in rng.integers(-100, 101, 3))
            tau, t1, t2 = (Fraction(int(rng.integers(-10**5, 10**5)), int(rng.integers(1, 50))) for _ in range(3))
            tri = ResonanceTriple(n, n1, n2)
            lhs = q_plus(n, tau, p_exact) - q_plus(n1, t1, p_exact) - q_minus(n2, t2, p_exact) - q_plus(tri.n3, tau - t1 - t2, p_exact)
            bad += lhs != resonance_factor(tri, q, g)
        add("resonance_identity_mismatches", float(bad), 0.0)
    else:
        skip("resonance_identity_mismatches")

    # trajectory on the configured data
    traj = D.evolve(st0, cfg.T, cfg.dt, params, cfg.save_every, cfg.formulation)
    i1 = [I.compute_I1(s) for s in traj.states]
    add("I1_relative_drift", max(abs(v - i1[0]) for v in i1) / i1[0] if i1[0] else 0.0, 1e-9)
    try:
        E = [I.compute_energy(s, params) for s in traj.states]
        scale = max(abs(E[0]), 1e-300)
        add("energy_relative_drift", max(abs(e - E[0]) for e in E) / scale, 1e-8)
    except ValueError:
        skip("energy_relative_drift")
    res = 0.0
    for s in traj.states:
        tot = complex(np.sum(I.i2_terms(s, params)))
        res = max(res, abs(tot.imag) / (1.0 + abs(tot.real)))
    add("I2_imaginary_residue", res, 1e-12)

    # time-derivative identities on a dense short run, order under dt halving
    if params.unit_sigmas:
        Tl = min(cfg.T, 0.1)
        reps = [I.verify_derivative_identities(D.evolve(st0, Tl, h, params), params) for h in (5e-4, 2.5e-4)]
        add("derivative_identity_residual", reps[1].max_relative(), 1e-3)
        # identities already satisfied to roundoff carry no order information
        live = reps[0].rel_residual > 1e-11
        ratio = reps[0].rel_residual[live] / np.maximum(reps[1].rel_residual[live], 1e-300)
        order = float(np.min(np.log2(ratio))) if live.any() else 2.0
        rows.append(("derivative_identity_order", order, 1.8, bool(order >= 1.8)))
    else:
        skip("derivative_identity_residual")
        skip("derivative_identity_order")

    # plane wave closed form
    Tp = min(cfg.T, 1.0)
    pw = R.PlaneWaveSpec(0.5, 3, params)
    add("plane_wave_closed_form_residual", R.plane_wave_residual(pw), 1e-10)
    fin = D.evolve(pw.state(grid), Tp, cfg.dt, params, save_every=10**9, formulation=cfg.formulation).final
    add("plane_wave_error", float(np.max(np.abs(to_physical(fin.u) - pw.samples(grid.x, Tp)[0]))), 1e-8)

    # w = 0 reduction against the scalar stepper
    Tr = min(cfg.T, 0.5)
    dtr = min(cfg.dt, 5e-4)
    red = D.evolve(PairState(st0.u, SpectralField.zeros(grid)), Tr, dtr, params, save_every=10**9)
    ref = R.single_equation_evolve(st0.u, Tr, dtr, params)
    add("reduction_max_w", float(np.max(np.abs(red.final.w.coeffs))), 1e-12)
    add("reduction_difference", float(np.max(np.abs(to_physical(red.final.u) - to_physical(ref)))), 1e-8)

    # restricted nonlinearity
    if params.restricted:
        a = D.eval_G(st0, params)
        b = D.eval_G_restricted(st0, params)
        scale = max(1.0, float(np.max(np.abs(a[0].coeffs))), float(np.max(np.abs(a[1].coeffs))))
        diff = max(np.max(np.abs(a[0].coeffs - b[0].coeffs)), np.max(np.abs(a[1].coeffs - b[1].coeffs)))
        add("restricted_form_difference", float(diff) / scale, 1e-12)
    else:
        skip("restricted_form_difference")

    # change of variables from the transport system
    try:
        R.check_rl_conditions(params)
        R.rl_shift(params)
    except ValueError:
        skip("rl_transform_error")
    else:
        Tq = min(cfg.T, 0.5)
        red = D.evolve(st0, Tq, cfg.dt, R.reduced_params(params), save_every=10**9).final
        full = D.evolve(R.rl_transform(st0, params), Tq, cfg.dt, params, save_every=10**9).final
        a, b = R.rl_transform(red, params), full
        err = max(np.max(np.abs(to_physical(a.u) - to_physical(b.u))), np.max(np.abs(to_physical(a.w) - to_physical(b.w))))
        add("rl_transform_error", float(err), 1e-6)
    return rows


def cmd_verify(cfg: RunConfig, out: Path) -> dict:
    rows = _check_rows(cfg)
    write_csv(out / "verify.csv", ["check", "value", "tolerance", "passed"], rows)
    failed = [r[0] for r in rows if r[3] is False]
    if failed:
        raise CheckFailed(f"failed checks: {', '.join(failed)}")
    return {"checks": len(rows), "skipped": sum(r[3] == "skipped" for r in rows)}


def cmd_estimate(cfg: RunConfig, out: Path) -> dict:
    ec = B.EstimateConfig(s=cfg.s, theta=cfg.theta, ensemble_size=cfg.ensemble_size, seed=cfg.seed, band=cfg.band)
    params = cfg.params
    lin = B.linear_bound_experiment(ec, params)
    write_csv(out / "estimate_linear.csv", ["N", "member_id", "lhs", "rhs", "ratio"],
              ((n, i, a, b, a / b) for n in lin.n_values for i, (a, b) in enumerate(zip(lin.lhs[n], lin.rhs[n]))))
    summary = {"linear_growth": lin.growth(), **{f"linear_max_ratio_N{n}": lin.max_ratio(n) for n in lin.n_values}}
    tri = None
    if params.restricted and params.nonresonant:
        tri = B.trilinear_ratio_experiment(ec, params, workers=_threads())
        write_csv(out / "estimate_trilinear.csv",
                  ["N", "member_id", "lhs", "rhs", "ratio", "lhs_l2", "ratio_l2"],
                  ((n, i, a, r, a / r, c, c / r) for n in tri.n_values
                   for i, (a, c, r) in enumerate(zip(tri.lhs_l1[n], tri.lhs_l2[n], tri.rhs[n]))))
        summary.update(trilinear_growth=tri.growth("l1"), trilinear_growth_l2=tri.growth("l2"),
                       scale_deviation=tri.scale_deviation)
    write_csv(out / "estimate_summary.csv", ["quantity", "value"], summary.items())
    growth = max(v for k, v in summary.items() if "growth" in k)
    if growth > 1.5 or summary.get("scale_deviation", 0.0) > 1e-10:
        raise CheckFailed(f"estimate ratios not stable under N doubling: {summary}")
    return summary


COMMAND_FUNCS = {
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "norms": cmd_norms,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hons", description="Coupled third-order NLS toolkit.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, default=None, help="key = value configuration file")
    ap.add_argument("--seed", type=int, default=None, help="overrides the configured seed")
    ap.add_argument("--out", type=Path, default=None, help="output directory (overrides out_dir)")
    return ap


def _error_record(out: Path, code: int, exc: BaseException) -> None:
    rec = {"exit_code": code, "error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, D.BlowUpError):
        rec["time"] = exc.time
        if exc.trajectory is not None:
            rec["saved_states"] = len(exc.trajectory.states)
    if isinstance(exc, ConfigError) and exc.line is not None:
        rec["line"] = exc.line
    if isinstance(exc, SnapshotFormatError):
        rec["offset"] = exc.offset
    out.mkdir(parents=True, exist_ok=True)
    (out / "error.json").write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.cfg").write_text(serialize(cfg), encoding="utf-8")
    try:
        summary = COMMAND_FUNCS[cfg.experiment](cfg, out)
    except D.BlowUpError as e:
        _error_record(out, EXIT_BLOWUP, e)
        print(f"blow-up: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except (CheckFailed, ConfigError, SnapshotFormatError, I.ConsistencyError, ValueError) as e:
        _error_record(out, EXIT_FAILED, e)
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    for k, v in summary.items():
        print(f"{k}: {v}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out
    try:
        cfg = load_config(args.config) if args.config is not None else RunConfig()
        cfg = cfg.replace(experiment=args.command)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        if out is not None:
            cfg = cfg.replace(out_dir=str(out))
        _threads()
    except (ConfigError, SnapshotFormatError, OSError) as e:
        _error_record(out or Path("out"), EXIT_FAILED, e)
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    return run(cfg, Path(cfg.out_dir))


if __name__ == "__main__":
    sys.exit(main())
