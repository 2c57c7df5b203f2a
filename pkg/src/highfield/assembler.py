"""Builds the composite asymptotic solution — bulk density profile, its
first-order fluctuation correction, and the initial-layer transients — and
measures its distance to the kinetic reference in the weighted norm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (DensityField, NormSpec, PhysicalParams, WignerField,
                   norm_xk, x_derivative)
from .equilibrium import KernelM, kernel_x_derivative
from .kinetic import KineticTrajectory
from .layer import LayerTerms
from .potential import Potential, require_periodic
from .pseudodiff import ThetaOperator, resolvent_values
from .qdd import QddTrajectory
from .transport import diffusion_coeff, drift_coeff


class TimeNotInTrajectory(KeyError):
    """Requested output time was not recorded by a solver run."""


@dataclass(frozen=True)
class PsiBar1Evaluator:
    """Coefficient fields of the first-order bulk fluctuation
    psi_bar_1 = dn/dx * A(x, v) + n * B(x, v), precomputed once per
    configuration.  A = -D2 and B = -D1 of the resolvent problems below."""

    grid: object
    A: np.ndarray
    B: np.ndarray

    def __call__(self, n: DensityField) -> WignerField:
        slope = x_derivative(n.values, n.grid)
        vals = slope[:, None] * self.A + n.values[:, None] * self.B
        return WignerField(self.grid, vals)


def solve_d2(kernel: KernelM, theta: ThetaOperator, pot: Potential,
             params: PhysicalParams) -> np.ndarray:
    """Zero-mass solution of (Theta - nu) D2 = -M (v + V'/(nu m))."""
    grid = theta.grid
    drift = pot.d1(grid.space.points) / (params.nu * params.m)
    rhs = kernel.values * (grid.v_points[None, :] + drift[:, None])
    return resolvent_values(theta, rhs)


def solve_d1(kernel: KernelM, theta: ThetaOperator, pot: Potential,
             params: PhysicalParams) -> np.ndarray:
    """Zero-mass solution of (Theta - nu) D1 = -v dM/dx - M V''/(nu m).

    Differentiates M in x spectrally, so the potential must pass the
    periodicity gate.
    """
    grid = theta.grid
    require_periodic(pot, grid.space)
    lap = pot.d2(grid.space.points) / (params.nu * params.m)
    rhs = grid.v_points[None, :] * kernel_x_derivative(kernel) + \
        kernel.values * lap[:, None]
    return resolvent_values(theta, rhs)


def make_psi_bar_1(kernel: KernelM, theta: ThetaOperator, pot: Potential,
                   params: PhysicalParams) -> PsiBar1Evaluator:
    return PsiBar1Evaluator(theta.grid,
                            A=-solve_d2(kernel, theta, pot, params),
                            B=-solve_d1(kernel, theta, pot, params))


def psi_bar_1(n: DensityField, kernel: KernelM, theta: ThetaOperator,
              pot: Potential, params: PhysicalParams) -> WignerField:
    """First-order bulk fluctuation for a given density profile."""
    return make_psi_bar_1(kernel, theta, pot, params)(n)


def verify_d2_d1(kernel: KernelM, theta: ThetaOperator, pot: Potential,
                 params: PhysicalParams) -> dict:
    """Cross-check the resolvent solutions against the closed-form transport
    coefficients: integral v*D2 dv = D(x) and integral v*D1 dv = W(x)."""
    grid = theta.grid
    x = grid.space.points
    v = grid.v_points
    d2 = solve_d2(kernel, theta, pot, params)
    d1 = solve_d1(kernel, theta, pot, params)
    num_D = grid.dv * (v[None, :] * d2).sum(axis=1)
    num_W = grid.dv * (v[None, :] * d1).sum(axis=1)
    return {
        "max_err_D": float(np.max(np.abs(num_D - diffusion_coeff(pot, params, x)))),
        "max_err_W": float(np.max(np.abs(num_W - drift_coeff(pot, params, x)))),
        "max_mass_D2": float(np.max(np.abs(grid.dv * d2.sum(axis=1)))),
        "max_mass_D1": float(np.max(np.abs(grid.dv * d1.sum(axis=1)))),
    }


@dataclass(frozen=True)
class AsymptoticSolution:
    """Composite expansion: n(t) M + eps*psi_bar_1(t) plus the layer terms
    evaluated at tau = t/eps."""

    n_traj: QddTrajectory
    kernel: KernelM
    psi_bar: PsiBar1Evaluator
    layer: LayerTerms
    params: PhysicalParams

    def bulk_values(self, t: float) -> np.ndarray:
        try:
            n = self.n_traj.at(t)
        except KeyError as exc:
            raise TimeNotInTrajectory(str(exc)) from None
        return n.values[:, None] * self.kernel.values + \
            self.params.eps * self.psi_bar(n).values

    def layer_values(self, t: float) -> np.ndarray:
        tau = t / self.params.eps
        eps = self.params.eps
        return (self.layer.psi0_tilde(tau).values
                + eps * self.layer.phi1_tilde(tau).values
                + eps * self.layer.psi1_tilde(tau).values)

    def field_at(self, t: float) -> WignerField:
        grid = self.kernel.grid
        return WignerField(grid, self.bulk_values(t) + self.layer_values(t))


def composite_error(kin: KineticTrajectory, asym: AsymptoticSolution,
                    spec: NormSpec, t: float) -> float:
    """Weighted-norm distance between the kinetic reference and the full
    composite at a shared output time."""
    try:
        w = kin.at(t)
    except KeyError as exc:
        raise TimeNotInTrajectory(str(exc)) from None
    diff = w.values - asym.field_at(t).values
    return norm_xk(WignerField(kin.grid, diff), spec)


def error_split(kin: KineticTrajectory, asym: AsymptoticSolution,
                spec: NormSpec, t: float) -> tuple[float, float, float]:
    """(composite, layer, bulk) errors at time t; the layer and bulk parts
    bound the composite by the triangle inequality."""
    try:
        w = kin.at(t)
    except KeyError as exc:
        raise TimeNotInTrajectory(str(exc)) from None
    grid = kin.grid
    bulk = asym.bulk_values(t)
    lay = asym.layer_values(t)
    composite = norm_xk(WignerField(grid, w.values - bulk - lay), spec)
    bulk_err = norm_xk(WignerField(grid, w.values - bulk), spec)
    layer_err = norm_xk(WignerField(grid, lay), spec)
    return composite, layer_err, bulk_err
