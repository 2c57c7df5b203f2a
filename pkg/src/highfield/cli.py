"""Command-line entry point.

Subcommands: coeffs, moments-check, qdd-run, kinetic-run, converge-sweep,
selftest.  Each reads a JSON config, writes RFC-4180-style CSV with
``#``-prefixed metadata lines, and returns 0 on success, 2 on config errors,
3 on numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .core import PhysicalParams, WignerField, density, norm_l2
from .equilibrium import kernel_m, kernel_moments_closed_form, project_q
from .harness import (ExperimentConfig, FitDegenerate, SweepResult,
                      initial_data, run_sweep)
from .kinetic import KineticProblem, KineticStepper, kinetic_solve
from .layer import semigroup_g
from .potential import make_potential
from .pseudodiff import apply_theta, build_theta
from .qdd import QddProblem, initial_correction_n1, qdd_solve
from .transport import build_coeffs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _metadata_lines(cfg: ExperimentConfig, kind: str) -> list[str]:
    return [
        f"# highfield {kind}",
        f"# config_hash: {cfg.config_hash()}",
        "# periodic_truncation: true",
    ]


def _write_csv(path: str, meta: list[str], header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in meta:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_coeffs(cfg: ExperimentConfig, out: str) -> int:
    grid = cfg.phase_grid().space
    coeffs = build_coeffs(cfg.potential, cfg.params, grid)
    rows = [(f"{x:.12g}", f"{d:.12g}", f"{w:.12g}", f"{e:.12g}")
            for x, d, w, e in zip(grid.points, coeffs.D, coeffs.W, coeffs.E)]
    meta = _metadata_lines(cfg, "coeffs")
    meta.append(f"# ellipticity_floor: {coeffs.ellipticity_floor:.12g}")
    _write_csv(out, meta, ["x", "D", "W", "E"], rows)
    return EXIT_OK


def cmd_moments_check(cfg: ExperimentConfig, out: str) -> int:
    grid = cfg.phase_grid()
    kern = kernel_m(cfg.potential, cfg.params, grid)
    x = grid.space.points
    m0, m1, m2 = kernel_moments_closed_form(cfg.potential, cfg.params, x)
    rows = [(f"{xi:.12g}", f"{a:.12g}", f"{b:.12g}", f"{c:.12g}",
             f"{d:.12g}", f"{e:.12g}", f"{f:.12g}")
            for xi, a, b, c, d, e, f in zip(
                x, kern.mass, m0, kern.first_moment, m1, kern.second_moment, m2)]
    err = max(float(np.max(np.abs(kern.mass - m0))),
              float(np.max(np.abs(kern.first_moment - m1)) / max(1.0, np.max(np.abs(m1)))),
              float(np.max(np.abs(kern.second_moment - m2)) / np.max(np.abs(m2))))
    meta = _metadata_lines(cfg, "moments-check")
    meta.append(f"# max_rel_err: {err:.3e}")
    _write_csv(out, meta, ["x", "m0_num", "m0_exact", "m1_num", "m1_exact",
                           "m2_num", "m2_exact"], rows)
    print(f"moments-check: max relative error {err:.3e}")
    return EXIT_OK


def cmd_qdd_run(cfg: ExperimentConfig, out: str) -> int:
    grid = cfg.phase_grid()
    theta = build_theta(cfg.potential, cfg.params, grid)
    kern = kernel_m(cfg.potential, cfg.params, grid, theta)
    w0 = initial_data(cfg, grid, kern)
    n0 = density(w0)
    n1 = initial_correction_n1(project_q(w0, kern), theta)
    coeffs = build_coeffs(cfg.potential, cfg.params, grid.space)
    prob = QddProblem(coeffs, cfg.params, grid.space, n0, n1,
                      cfg.t_final, cfg.dt_qdd)
    traj = qdd_solve(prob, cfg.output_times)
    rows = []
    for t, n in zip(traj.times, traj.densities):
        for x, val in zip(grid.space.points, n.values):
            rows.append((f"{t:.12g}", f"{x:.12g}", f"{val:.12g}"))
    _write_csv(out, _metadata_lines(cfg, "qdd-run"), ["t", "x", "n"], rows)
    return EXIT_OK


def cmd_kinetic_run(cfg: ExperimentConfig, out: str, density_only: bool) -> int:
    grid = cfg.phase_grid()
    theta = build_theta(cfg.potential, cfg.params, grid)
    kern = kernel_m(cfg.potential, cfg.params, grid, theta)
    w0 = initial_data(cfg, grid, kern)
    prob = KineticProblem(cfg.potential, cfg.params, grid, w0,
                          cfg.t_final, cfg.dt_kinetic)
    traj = kinetic_solve(prob, cfg.output_times)
    rows = []
    if density_only:
        for t, w in zip(traj.times, traj.fields):
            n = density(w)
            for x, val in zip(grid.space.points, n.values):
                rows.append((f"{t:.12g}", f"{x:.12g}", f"{val:.12g}"))
        header = ["t", "x", "n"]
    else:
        for t, w in zip(traj.times, traj.fields):
            for i, x in enumerate(grid.space.points):
                for j, v in enumerate(grid.v_points):
                    rows.append((f"{t:.12g}", f"{x:.12g}", f"{v:.12g}",
                                 f"{w.values[i, j]:.12g}"))
        header = ["t", "x", "v", "w"]
    _write_csv(out, _metadata_lines(cfg, "kinetic-run"), header, rows)
    return EXIT_OK


def write_sweep_csv(result: SweepResult, cfg: ExperimentConfig, out: str) -> None:
    meta = _metadata_lines(cfg, "converge-sweep")
    meta += [
        f"# fitted_order: {result.fitted_order:.6f}",
        f"# fitted_order_ci95: [{result.ci_low:.6f}, {result.ci_high:.6f}]",
        f"# fit_time: {result.fit_time:.12g}",
        f"# floor_estimate: {result.floor_estimate:.6e}",
        f"# excluded_eps: {list(result.excluded_eps)}",
        f"# monotone_in_eps: {str(result.monotone).lower()}",
    ]
    rows = [(f"{r.eps:.12g}", f"{r.t:.12g}", f"{r.composite_error:.12g}",
             f"{r.layer_error:.12g}", f"{r.bulk_error:.12g}")
            for r in result.rows]
    _write_csv(out, meta, ["eps", "t", "composite_error", "layer_error",
                           "bulk_error"], rows)


def cmd_converge_sweep(cfg: ExperimentConfig, out: str, threads: int) -> int:
    result = run_sweep(cfg, threads=threads)
    write_sweep_csv(result, cfg, out)
    print(f"converge-sweep: fitted order {result.fitted_order:.3f} "
          f"(95% CI [{result.ci_low:.3f}, {result.ci_high:.3f}]), "
          f"monotone={result.monotone}")
    return EXIT_OK


def cmd_selftest(seed: int) -> int:
    """Fast invariant battery: transform round trip, operator algebra,
    conservation, and semigroup decay."""
    rng = np.random.default_rng(seed)
    from .core import PhaseGrid, SpaceGrid, dft_v, idft_v
    params = PhysicalParams()
    grid = PhaseGrid(SpaceGrid(32, 2.0 * np.pi), 128, 10.0)
    pot = make_potential("cosine", amplitude=0.3, wavenumber=1.0)
    theta = build_theta(pot, params, grid)
    checks = []

    w = WignerField(grid, rng.standard_normal(grid.shape))
    checks.append(("dft round trip",
                   float(np.max(np.abs(idft_v(grid, dft_v(w)) - w.values))) < 1e-12))

    smooth = WignerField(grid, np.outer(1 + 0.3 * np.cos(grid.space.points),
                                        np.exp(-0.5 * grid.v_points ** 2)))
    tw = apply_theta(theta, smooth)
    checks.append(("theta mass annihilation",
                   float(np.max(np.abs(density(tw).values))) < 1e-12))
    inner = float((tw.values * smooth.values).sum() * grid.space.dx * grid.dv)
    checks.append(("theta skew symmetry", abs(inner) < 1e-10 * norm_l2(smooth) ** 2))

    kern = kernel_m(pot, params, grid, theta)
    m0, m1, m2 = kernel_moments_closed_form(pot, params, grid.space.points)
    checks.append(("kernel moments",
                   float(np.max(np.abs(kern.first_moment - m1))) < 1e-6 and
                   float(np.max(np.abs(kern.second_moment - m2))) < 1e-6))

    odd = WignerField(grid, np.outer(np.sin(grid.space.points),
                                     grid.v_points * np.exp(-grid.v_points ** 2)))
    g = semigroup_g(theta, odd, 1.0)
    checks.append(("semigroup decay",
                   abs(norm_l2(g) - np.exp(-params.nu) * norm_l2(odd)) < 1e-12))

    stepper = KineticStepper(pot, params, grid, theta)
    before = density(smooth).values
    after = density(WignerField(grid, stepper.collision_field(smooth.values, 0.05))).values
    checks.append(("collision density invariance",
                   float(np.max(np.abs(after - before))) < 1e-12))

    ok = True
    for name, passed in checks:
        print(f"selftest: {name}: {'ok' if passed else 'FAIL'}")
        ok &= passed
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="highfield")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("coeffs", "moments-check", "qdd-run", "kinetic-run",
                 "converge-sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)
        if name == "kinetic-run":
            p.add_argument("--density-only", action="store_true")
        if name == "converge-sweep":
            p.add_argument("--threads", type=int, default=1)
    p = sub.add_parser("selftest")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args.seed)
    try:
        cfg = ExperimentConfig.from_json(args.config)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "coeffs":
            return cmd_coeffs(cfg, args.out)
        if args.command == "moments-check":
            return cmd_moments_check(cfg, args.out)
        if args.command == "qdd-run":
            return cmd_qdd_run(cfg, args.out)
        if args.command == "kinetic-run":
            return cmd_kinetic_run(cfg, args.out, args.density_only)
        return cmd_converge_sweep(cfg, args.out, args.threads)
    except (FitDegenerate, FloatingPointError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
