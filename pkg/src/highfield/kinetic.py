"""Reference solver for the scaled kinetic equation

    eps dw/dt = eps * S w + Theta[V] w - nu*(w - Omega w / nu),

by Strang splitting of two exactly solvable substeps: spectral free transport
in x, and the stiff collision-field flow solved mode-by-mode in the velocity
Fourier variable with the (invariant) density frozen.  Neither substep has a
CFL constraint tied to 1/eps, so the same dt serves the whole eps-sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (PhaseGrid, PhysicalParams, StabilityViolation, WignerField,
                   density_values, dft_v_values, idft_v)
from .equilibrium import equilibrium_profile
from .potential import Potential, require_periodic
from .pseudodiff import ThetaOperator, build_theta

BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class KineticProblem:
    pot: Potential
    params: PhysicalParams
    grid: PhaseGrid
    w0: WignerField
    t_final: float
    dt: float


@dataclass(frozen=True)
class KineticTrajectory:
    grid: PhaseGrid
    times: tuple[float, ...]
    fields: tuple[WignerField, ...]

    def at(self, t: float, tol: float = 1e-9) -> WignerField:
        for ti, wi in zip(self.times, self.fields):
            if abs(ti - t) <= tol:
                return wi
        raise KeyError(f"time {t} not in trajectory {self.times}")


def _phi1(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z with a series branch for small |z|."""
    small = np.abs(z) < 1e-4
    zs = np.where(small, 0.0, z)
    direct = np.divide(np.exp(zs) - 1.0, zs, out=np.ones_like(z), where=~small)
    series = 1.0 + z / 2.0 + z ** 2 / 6.0 + z ** 3 / 24.0 + z ** 4 / 120.0
    return np.where(small, series, direct)


class KineticStepper:
    """Precomputed mode tables for one (potential, params, grid, dt) tuple."""

    def __init__(self, pot: Potential, params: PhysicalParams, grid: PhaseGrid,
                 theta: ThetaOperator | None = None):
        self.grid = grid
        self.params = params
        self.theta = theta if theta is not None else build_theta(pot, params, grid)
        self.eq_hat = dft_v_values(grid, equilibrium_profile(pot, params, grid))
        # generator of the collision-field flow per (x, eta) mode
        self.a = (self.theta.multiplier - params.nu) / params.eps
        self._coll_cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
        self._shift_cache: dict[float, np.ndarray] = {}

    def _collision_tables(self, dt: float):
        hit = self._coll_cache.get(dt)
        if hit is None:
            grow = np.exp(self.a * dt)
            duhamel = dt * _phi1(self.a * dt)
            hit = self._coll_cache[dt] = (grow, duhamel)
        return hit

    def collision_field(self, values: np.ndarray, dt: float) -> np.ndarray:
        """Exact variation-of-constants update of
        dw/dt = (1/eps)(Theta - nu) w + (nu/eps) n (F + hbar^2 F2)
        with n frozen at its invariant value."""
        if dt == 0.0:
            return values
        grow, duhamel = self._collision_tables(dt)
        n = density_values(self.grid, values)
        source = (self.params.nu / self.params.eps) * n[:, None] * self.eq_hat
        hat = dft_v_values(self.grid, values)
        return idft_v(self.grid, grow * hat + duhamel * source).real

    def _shift_phase(self, dt: float) -> np.ndarray:
        hit = self._shift_cache.get(dt)
        if hit is None:
            kx = self.grid.space.wavenumbers
            hit = self._shift_cache[dt] = np.exp(
                -1j * dt * kx[:, None] * self.grid.v_points[None, :])
        return hit

    def transport(self, values: np.ndarray, dt: float) -> np.ndarray:
        """Exact free streaming on the periodic box: shift x by v*dt through
        the x-Fourier phase.  Needs the field spectrally resolved in x."""
        if dt == 0.0:
            return values
        hat = np.fft.fft(values, axis=0)
        return np.fft.ifft(self._shift_phase(dt) * hat, axis=0).real

    def strang_step(self, values: np.ndarray, dt: float) -> np.ndarray:
        out = self.transport(values, 0.5 * dt)
        out = self.collision_field(out, dt)
        return self.transport(out, 0.5 * dt)


def collision_field_substep(stepper: KineticStepper, w: WignerField, dt: float) -> WignerField:
    return WignerField(stepper.grid, stepper.collision_field(w.values, dt))


def transport_substep(stepper: KineticStepper, w: WignerField, dt: float) -> WignerField:
    return WignerField(stepper.grid, stepper.transport(w.values, dt))


def kinetic_solve(problem: KineticProblem, output_times=None) -> KineticTrajectory:
    require_periodic(problem.pot, problem.grid.space)
    dt = problem.dt
    if output_times is None:
        output_times = [problem.t_final]
    marks = {}
    for t in output_times:
        steps = int(round(t / dt))
        if abs(steps * dt - t) > 1e-9:
            raise ValueError(f"output time {t} is not a multiple of dt={dt}")
        marks[steps] = float(t)
    total = max(int(round(problem.t_final / dt)), max(marks, default=0))

    stepper = KineticStepper(problem.pot, problem.params, problem.grid)
    w = problem.w0.values.copy()
    scale = max(1.0, float(np.max(np.abs(w))))
    times, fields = [], []
    if 0 in marks:
        times.append(marks[0])
        fields.append(WignerField(problem.grid, w.copy()))
    for k in range(1, total + 1):
        w = stepper.strang_step(w, dt)
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > BLOWUP_FACTOR * scale:
            raise StabilityViolation(f"kinetic field blew up at step {k}")
        if k in marks:
            times.append(marks[k])
            fields.append(WignerField(problem.grid, w.copy()))
    return KineticTrajectory(problem.grid, tuple(times), tuple(fields))
