"""Solver for the high-field quantum drift-diffusion equation in divergence
form,

    dn/dt = d/dx(E n) + eps * d/dx(D dn/dx) + eps * d/dx(W n),

on the periodic box, with the eps-corrected initial datum n(0) = n0 + eps*n1.

Spatial discretization is second-order centered flux differences, so discrete
total mass telescopes exactly; time stepping is Crank-Nicolson on the
diffusion flux and explicit midpoint on the drift fluxes, which keeps the
diffusion unconditionally stable and lets an eps-sweep share one dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .core import (DensityField, NonZeroMassError, PhysicalParams, SpaceGrid,
                   StabilityViolation, WignerField, density_values,
                   x_derivative)
from .pseudodiff import ThetaOperator, resolvent_values
from .transport import TransportCoeffs, check_ellipticity

CFL_FACTOR = 0.25
BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class QddProblem:
    coeffs: TransportCoeffs
    params: PhysicalParams
    grid: SpaceGrid
    n0: DensityField
    n1: DensityField
    t_final: float
    dt: float

    @property
    def initial_density(self) -> DensityField:
        return DensityField(self.grid, self.n0.values + self.params.eps * self.n1.values)


@dataclass(frozen=True)
class QddTrajectory:
    grid: SpaceGrid
    times: tuple[float, ...]
    densities: tuple[DensityField, ...]

    def at(self, t: float, tol: float = 1e-9) -> DensityField:
        for ti, ni in zip(self.times, self.densities):
            if abs(ti - t) <= tol:
                return ni
        raise KeyError(f"time {t} not in trajectory {self.times}")


def initial_correction_n1(psi0: WignerField, theta: ThetaOperator) -> DensityField:
    """First-order datum correction
    n1 = integral v * d/dx F^-1( Fpsi0 / (i deltaV - nu) ) dv,
    with (i deltaV - nu) = -(nu - i deltaV) folded into the resolvent sign.
    """
    grid = psi0.grid
    n_psi = density_values(grid, psi0.values)
    if np.max(np.abs(n_psi)) > 1e-8 * max(1.0, float(np.max(np.abs(psi0.values)))):
        raise NonZeroMassError(
            f"psi0 must carry zero density; max |n| = {np.max(np.abs(n_psi)):.2e}")
    inner = -resolvent_values(theta, psi0.values)
    slope = x_derivative(inner, grid.space)
    n1 = grid.dv * (slope * grid.v_points[None, :]).sum(axis=1)
    return DensityField(grid.space, n1)


class QddStepper:
    """Dense flux-form operators with a prefactored Crank-Nicolson solve.

    One step: backward-Euler half step for diffusion to place the drift at
    the midpoint, then the trapezoidal diffusion + midpoint drift update.
    Both stages preserve the discrete mass identically (column sums of the
    flux matrices vanish).
    """

    def __init__(self, problem: QddProblem, dt: float | None = None):
        coeffs = problem.coeffs
        check_ellipticity(coeffs)
        self.dt = problem.dt if dt is None else dt
        grid = problem.grid
        eps = problem.params.eps
        dx = grid.dx
        n = grid.n_x

        drift = coeffs.E + eps * coeffs.W
        a_face = 0.5 * (drift + np.roll(drift, -1))        # a_{i+1/2}
        d_face = 0.5 * (coeffs.D + np.roll(coeffs.D, -1))  # D_{i+1/2}

        advective = float(np.max(np.abs(coeffs.E) + eps * np.abs(coeffs.W)))
        if advective > 0.0 and self.dt > CFL_FACTOR * dx / advective:
            raise ValueError(
                f"dt={self.dt} exceeds the advective heuristic "
                f"{CFL_FACTOR * dx / advective:.3e}")

        up = np.eye(n, k=1) + np.eye(n, k=1 - n)       # shifts n_{i+1} into row i
        down = np.eye(n, k=-1) + np.eye(n, k=n - 1)    # shifts n_{i-1} into row i
        ident = np.eye(n)

        # eps * [D_{i+1/2}(n_{i+1}-n_i) - D_{i-1/2}(n_i-n_{i-1})] / dx^2
        self.A = (eps / dx ** 2) * (d_face[:, None] * (up - ident)
                                    - np.roll(d_face, 1)[:, None] * (ident - down))
        # [a_{i+1/2}(n_i+n_{i+1}) - a_{i-1/2}(n_{i-1}+n_i)] / (2 dx)
        self.B = (0.5 / dx) * (a_face[:, None] * (ident + up)
                               - np.roll(a_face, 1)[:, None] * (down + ident))
        self._lu = lu_factor(ident - 0.5 * self.dt * self.A)

    def step(self, n: np.ndarray) -> np.ndarray:
        half = lu_solve(self._lu, n + 0.5 * self.dt * (self.B @ n))
        return lu_solve(self._lu, n + self.dt * (self.B @ half)
                        + 0.5 * self.dt * (self.A @ n))


def qdd_step(problem: QddProblem, n: DensityField, dt: float) -> DensityField:
    out = QddStepper(problem, dt).step(n.values)
    _guard(out, n.values)
    return DensityField(problem.grid, out)


def _guard(new: np.ndarray, ref: np.ndarray) -> None:
    if not np.all(np.isfinite(new)) or \
            np.max(np.abs(new)) > BLOWUP_FACTOR * max(1.0, float(np.max(np.abs(ref)))):
        raise StabilityViolation("density norm blew up during a step")


def qdd_solve(problem: QddProblem, output_times=None) -> QddTrajectory:
    """Time-march from the eps-corrected datum and record the requested
    snapshots (each must sit on the dt grid)."""
    dt = problem.dt
    if output_times is None:
        output_times = [problem.t_final]
    marks = {}
    for t in output_times:
        steps = int(round(t / dt))
        if abs(steps * dt - t) > 1e-9:
            raise ValueError(f"output time {t} is not a multiple of dt={dt}")
        marks[steps] = float(t)
    total = int(round(problem.t_final / dt))
    if abs(total * dt - problem.t_final) > 1e-9:
        raise ValueError("t_final must be a multiple of dt")

    stepper = QddStepper(problem)
    n = problem.initial_density.values.copy()
    n_ref = n.copy()
    times, fields = [], []
    if 0 in marks:
        times.append(marks[0])
        fields.append(DensityField(problem.grid, n.copy()))
    for k in range(1, max(total, max(marks, default=0)) + 1):
        n = stepper.step(n)
        _guard(n, n_ref)
        if k in marks:
            times.append(marks[k])
            fields.append(DensityField(problem.grid, n.copy()))
    return QddTrajectory(problem.grid, tuple(times), tuple(fields))
