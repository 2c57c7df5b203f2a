"""Equilibrium objects: the Maxwellian, its hbar^2 correction, the BGK target
operator, the kernel function M of the fast dynamics with its moments, and the
spectral projections P, Q.

M is computed through the resolvent, M = nu*(nu - Theta)^-1 (F + hbar^2 F2),
which is algebraically identical to the direct Fourier-multiplier expression
(kept here as :func:`kernel_m_multiplier` for cross-checking).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (PhaseGrid, PhysicalParams, WignerField, density_values,
                   dft_v_values, idft_v, x_derivative)
from .potential import Potential
from .pseudodiff import ThetaOperator, resolvent_values

MOMENT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class Maxwellian:
    """Unit-mass Gaussian F(v) = sqrt(beta*m/2pi) * exp(-beta*m*v^2/2)."""

    params: PhysicalParams
    values: np.ndarray


def maxwellian(params: PhysicalParams, grid: PhaseGrid) -> Maxwellian:
    bm = params.beta * params.m
    v = grid.v_points
    return Maxwellian(params, np.sqrt(bm / (2.0 * np.pi)) * np.exp(-0.5 * bm * v ** 2))


def check_velocity_box(params: PhysicalParams, grid: PhaseGrid) -> None:
    """Second moments are only trustworthy when the Gaussian tail times v^4
    is negligible at the box edge."""
    bm = params.beta * params.m
    tail = np.exp(-0.5 * bm * grid.v_max ** 2) * grid.v_max ** 4
    if tail > MOMENT_TAIL_TOL:
        raise ValueError(
            f"v_max={grid.v_max} too small: tail weight {tail:.2e} exceeds "
            f"{MOMENT_TAIL_TOL:.0e}")


def f2_correction(pot: Potential, params: PhysicalParams, grid: PhaseGrid) -> WignerField:
    """hbar^2-coefficient of the local equilibrium:
    F2(x, v) = (beta^2/24) * V''(x) * (beta*v^2 - 1/m) * F(v) in 1D.

    Integrates to zero in v for every x (Gaussian moment cancellation).
    """
    F = maxwellian(params, grid).values
    v2 = grid.v_points ** 2
    d2 = pot.d2(grid.space.points)
    coeff = params.beta ** 2 / 24.0
    vals = coeff * d2[:, None] * (params.beta * v2 - 1.0 / params.m)[None, :] * F[None, :]
    return WignerField(grid, vals)


def equilibrium_profile(pot: Potential, params: PhysicalParams, grid: PhaseGrid) -> np.ndarray:
    """F(v) + hbar^2 F2(x, v) as an (n_x, n_v) array — the per-unit-density
    BGK relaxation target."""
    F = maxwellian(params, grid).values
    return F[None, :] + params.hbar ** 2 * f2_correction(pot, params, grid).values


def omega_apply(w: WignerField, pot: Potential, params: PhysicalParams,
                grid: PhaseGrid) -> WignerField:
    """Omega w = nu * n[w](x) * (F + hbar^2 F2)(x, v): rank one in v."""
    n = density_values(grid, w.values)
    return WignerField(grid, params.nu * n[:, None] * equilibrium_profile(pot, params, grid))


def ac_apply(theta: ThetaOperator, w: WignerField, pot: Potential,
             params: PhysicalParams) -> WignerField:
    """The fast-dynamics generator: Theta[V] w - nu*w + Omega w."""
    grid = theta.grid
    hat = dft_v_values(grid, w.values)
    relaxed = idft_v(grid, (theta.multiplier - params.nu) * hat).real
    return WignerField(grid, relaxed + omega_apply(w, pot, params, grid).values)


# ---------------------------------------------------------------------------
# kernel function M

@dataclass(frozen=True)
class KernelM:
    """Unit-mass kernel profile of the fast dynamics and its first two
    velocity moments (arrays over x)."""

    grid: PhaseGrid
    values: np.ndarray
    mass: np.ndarray
    first_moment: np.ndarray
    second_moment: np.ndarray


def kernel_m(pot: Potential, params: PhysicalParams, grid: PhaseGrid,
             theta: ThetaOperator | None = None) -> KernelM:
    """M = nu * (nu - Theta)^-1 (F + hbar^2 F2), with quadrature moments."""
    from .pseudodiff import build_theta

    check_velocity_box(params, grid)
    if theta is None:
        theta = build_theta(pot, params, grid)
    vals = params.nu * resolvent_values(theta, equilibrium_profile(pot, params, grid))
    v = grid.v_points
    mass = grid.dv * vals.sum(axis=1)
    if np.max(np.abs(mass - 1.0)) > 1e-8:
        raise FloatingPointError(
            f"kernel mass deviates from 1 by {np.max(np.abs(mass - 1.0)):.2e}")
    m1 = grid.dv * (vals * v[None, :]).sum(axis=1)
    m2 = grid.dv * (vals * (v ** 2)[None, :]).sum(axis=1)
    return KernelM(grid, vals, mass, m1, m2)


def kernel_m_multiplier(pot: Potential, params: PhysicalParams, grid: PhaseGrid,
                        theta: ThetaOperator) -> np.ndarray:
    """Direct multiplier form of M: nu * F^-1{ FF(eta)/(nu - i deltaV) *
    (1 - beta*hbar^2/(24 m^2) * eta^2 V''(x)) }; used only to cross-check the
    resolvent path."""
    F = maxwellian(params, grid).values
    Fhat = dft_v_values(grid, np.broadcast_to(F, grid.shape).copy())
    eta2 = grid.eta_points ** 2
    d2 = pot.d2(grid.space.points)
    corr = 1.0 - (params.beta * params.hbar ** 2 / (24.0 * params.m ** 2)) * \
        d2[:, None] * eta2[None, :]
    out = idft_v(grid, params.nu * Fhat * corr / (params.nu - theta.multiplier))
    return out.real


def kernel_moments_closed_form(pot: Potential, params: PhysicalParams, x):
    """Closed-form moments of M at position x (1D):

    m0 = 1
    m1 = -V'/(nu*m)
    m2 = 1/(beta*m) + 2 V'^2/(nu^2 m^2) + beta*hbar^2 V''/(12 m^2)
    """
    x = np.asarray(x, dtype=float)
    nu, m, beta, hbar = params.nu, params.m, params.beta, params.hbar
    d1 = pot.d1(x)
    d2 = pot.d2(x)
    m0 = np.ones_like(x)
    m1 = -d1 / (nu * m)
    m2 = 1.0 / (beta * m) + 2.0 * d1 ** 2 / (nu * m) ** 2 + beta * hbar ** 2 * d2 / (12.0 * m ** 2)
    return m0, m1, m2


# ---------------------------------------------------------------------------
# spectral projections

def project_p(w: WignerField, kernel: KernelM) -> WignerField:
    """P w = M(x, v) * n[w](x)."""
    n = density_values(w.grid, w.values)
    return WignerField(w.grid, kernel.values * n[:, None])


def project_q(w: WignerField, kernel: KernelM) -> WignerField:
    """Q = I - P; output carries zero density up to quadrature precision."""
    return WignerField(w.grid, w.values - project_p(w, kernel).values)


def kernel_x_derivative(kernel: KernelM) -> np.ndarray:
    """Spectral d/dx of M(x, v); valid for periodic potentials only."""
    return x_derivative(kernel.values, kernel.grid.space)
