"""Experiment orchestration: configuration parsing, single-case runs,
eps-sweeps with a discretization-floor control, and the log-log order fit."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .assembler import AsymptoticSolution, error_split, make_psi_bar_1
from .core import (NormSpec, PhaseGrid, PhysicalParams, SpaceGrid,
                   WignerField, density)
from .equilibrium import kernel_m, project_q
from .kinetic import KineticProblem, kinetic_solve
from .layer import build_layer_terms
from .potential import Potential, make_potential, require_periodic
from .pseudodiff import build_theta
from .qdd import QddProblem, initial_correction_n1, qdd_solve
from .transport import build_coeffs


class FitDegenerate(RuntimeError):
    """The sweep cannot support an order fit (too few usable points or all
    errors at the numerical floor)."""


MIN_FIT_POINTS = 4
FLOOR_EXCLUSION_FACTOR = 10.0
ABSOLUTE_FLOOR = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    params: PhysicalParams
    n_x: int
    length: float
    n_v: int
    v_max: float
    norm_k: int
    potential: Potential
    density_baseline: float
    density_amplitude: float
    density_mode: int
    fluct_amplitude: float
    fluct_mode: int
    t_final: float
    dt_kinetic: float
    dt_qdd: float
    output_times: tuple[float, ...]
    eps_list: tuple[float, ...]
    fit_time: float
    floor_control: bool
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        p = d.get("params", {})
        params = PhysicalParams(
            hbar=float(p.get("hbar", 1.0)), m=float(p.get("m", 1.0)),
            beta=float(p.get("beta", 1.0)), nu=float(p.get("nu", 1.0)),
            eps=float(p.get("eps", 0.1)))
        g = d.get("grid", {})
        pot_spec = dict(d.get("potential", {"kind": "zero"}))
        kind = pot_spec.pop("kind")
        pot = make_potential(kind, **pot_spec)
        ini = d.get("initial", {})
        den = ini.get("density", {})
        flu = ini.get("fluctuation", {})
        tm = d.get("time", {})
        sw = d.get("sweep", {})
        out_times = tuple(float(t) for t in tm.get("output_times",
                                                   [tm.get("t_final", 0.5)]))
        cfg = ExperimentConfig(
            params=params,
            n_x=int(g.get("n_x", 128)), length=float(g.get("length", 2.0 * np.pi)),
            n_v=int(g.get("n_v", 128)), v_max=float(g.get("v_max", 10.0)),
            norm_k=int(d.get("norm_k", 1)),
            potential=pot,
            density_baseline=float(den.get("baseline", 1.0)),
            density_amplitude=float(den.get("amplitude", 0.0)),
            density_mode=int(den.get("mode", 1)),
            fluct_amplitude=float(flu.get("amplitude", 0.0)),
            fluct_mode=int(flu.get("mode", 1)),
            t_final=float(tm.get("t_final", 0.5)),
            dt_kinetic=float(tm.get("dt_kinetic", 1e-3)),
            dt_qdd=float(tm.get("dt_qdd", 2.5e-3)),
            output_times=out_times,
            eps_list=tuple(float(e) for e in sw.get("eps_list", [params.eps])),
            fit_time=float(sw.get("fit_time", out_times[-1])),
            floor_control=bool(sw.get("floor_control", True)),
            raw=d,
        )
        cfg.validate()
        return cfg

    @staticmethod
    def from_json(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def validate(self) -> None:
        for n, name in ((self.n_x, "n_x"), (self.n_v, "n_v")):
            if n < 2 or n & (n - 1):
                raise ValueError(f"{name}={n} must be a power of two")
        if any(not 0.0 < e < 1.0 for e in self.eps_list):
            raise ValueError("every eps in eps_list must lie in (0, 1)")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValueError("eps_list must be strictly decreasing")
        for t in self.output_times:
            for dt, name in ((self.dt_kinetic, "dt_kinetic"), (self.dt_qdd, "dt_qdd")):
                if abs(round(t / dt) * dt - t) > 1e-9:
                    raise ValueError(f"output time {t} is not a multiple of {name}={dt}")
        if self.fit_time not in self.output_times:
            raise ValueError("fit_time must be one of output_times")

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def phase_grid(self, scale: int = 1) -> PhaseGrid:
        return PhaseGrid(SpaceGrid(self.n_x * scale, self.length),
                         self.n_v * scale, self.v_max)


@dataclass(frozen=True)
class SweepRow:
    eps: float
    t: float
    composite_error: float
    layer_error: float
    bulk_error: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    fitted_order: float
    ci_low: float
    ci_high: float
    fit_time: float
    floor_estimate: float
    excluded_eps: tuple[float, ...]
    monotone: bool
    config_hash: str

    def errors_at_fit_time(self) -> dict[float, float]:
        return {r.eps: r.composite_error for r in self.rows
                if abs(r.t - self.fit_time) < 1e-12}


def initial_data(cfg: ExperimentConfig, grid: PhaseGrid, kernel) -> WignerField:
    """Prepared datum n0(x) M(x, v) plus an odd-in-v (zero-mass) fluctuation."""
    x = grid.space.points
    L = grid.space.length
    n0 = cfg.density_baseline + cfg.density_amplitude * np.cos(
        2.0 * np.pi * cfg.density_mode * x / L)
    vals = n0[:, None] * kernel.values
    if cfg.fluct_amplitude != 0.0:
        shape_x = np.sin(2.0 * np.pi * cfg.fluct_mode * x / L)
        shape_v = grid.v_points * np.exp(-grid.v_points ** 2)
        vals = vals + cfg.fluct_amplitude * np.outer(shape_x, shape_v)
    return WignerField(grid, vals)


def run_case(cfg: ExperimentConfig, eps: float, scale: int = 1) -> list[SweepRow]:
    """Kinetic reference vs composite asymptotic solution for one eps; the
    optional scale doubles resolution for the floor-control run."""
    params = cfg.params.with_eps(eps)
    grid = cfg.phase_grid(scale)
    require_periodic(cfg.potential, grid.space)
    spec = NormSpec(cfg.norm_k)

    theta = build_theta(cfg.potential, params, grid)
    kernel = kernel_m(cfg.potential, params, grid, theta)
    coeffs = build_coeffs(cfg.potential, params, grid.space)
    w0 = initial_data(cfg, grid, kernel)

    n0 = density(w0)
    psi0 = project_q(w0, kernel)
    n1 = initial_correction_n1(psi0, theta)

    dt_k = cfg.dt_kinetic / scale
    dt_q = cfg.dt_qdd / scale
    kin = kinetic_solve(
        KineticProblem(cfg.potential, params, grid, w0, cfg.t_final, dt_k),
        cfg.output_times)
    qdd = qdd_solve(
        QddProblem(coeffs, params, grid.space, n0, n1, cfg.t_final, dt_q),
        cfg.output_times)
    layer = build_layer_terms(w0, kernel, theta, params, spec)
    asym = AsymptoticSolution(qdd, kernel, make_psi_bar_1(kernel, theta,
                                                          cfg.potential, params),
                              layer, params)
    rows = []
    for t in cfg.output_times:
        comp, lay, bulk = error_split(kin, asym, spec, t)
        rows.append(SweepRow(eps, t, comp, lay, bulk))
    return rows


def fit_order(eps: Sequence[float], errors: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope of log(error) against log(eps) with a 95% CI."""
    x = np.log(np.asarray(eps))
    y = np.log(np.asarray(errors))
    n = len(x)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sxx = float(((x - x.mean()) ** 2).sum())
    se = float(np.sqrt((resid ** 2).sum() / max(n - 2, 1) / sxx))
    tcrit = float(stats.t.ppf(0.975, max(n - 2, 1)))
    return float(slope), float(slope - tcrit * se), float(slope + tcrit * se)


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> SweepResult:
    if len(cfg.eps_list) < MIN_FIT_POINTS:
        raise FitDegenerate(
            f"order fit needs at least {MIN_FIT_POINTS} eps values, got "
            f"{len(cfg.eps_list)}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_case, cfg, e) for e in cfg.eps_list]
            case_rows = [f.result() for f in futures]
    else:
        case_rows = [run_case(cfg, e) for e in cfg.eps_list]
    rows = tuple(r for rows_ in case_rows for r in rows_)

    errs = {e: next(r.composite_error for r in rows
                    if r.eps == e and abs(r.t - cfg.fit_time) < 1e-12)
            for e in cfg.eps_list}

    if max(errs.values()) < ABSOLUTE_FLOOR:
        raise FitDegenerate(
            f"all errors below {ABSOLUTE_FLOOR:.0e}: datum sits in the exact "
            "kernel of the fast dynamics, nothing to fit")

    floor = 0.0
    if cfg.floor_control:
        eps_small = cfg.eps_list[-1]
        control = run_case(cfg, eps_small, scale=2)
        fine = next(r.composite_error for r in control
                    if abs(r.t - cfg.fit_time) < 1e-12)
        floor = abs(errs[eps_small] - fine)

    usable = [e for e in cfg.eps_list if errs[e] >= FLOOR_EXCLUSION_FACTOR * floor]
    excluded = tuple(e for e in cfg.eps_list if e not in usable)
    if len(usable) < MIN_FIT_POINTS:
        raise FitDegenerate(
            f"only {len(usable)} eps values clear {FLOOR_EXCLUSION_FACTOR:.0f}x "
            f"the discretization floor {floor:.3e}; refusing a contaminated fit")

    order, lo, hi = fit_order(usable, [errs[e] for e in usable])
    ordered = [errs[e] for e in cfg.eps_list]
    monotone = all(b < a for a, b in zip(ordered, ordered[1:]))
    return SweepResult(rows, order, lo, hi, cfg.fit_time, floor, excluded,
                       monotone, cfg.config_hash())
