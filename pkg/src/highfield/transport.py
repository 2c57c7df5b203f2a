"""Field-dependent transport coefficients of the macroscopic limit: diffusion
D(x), drift W(x), transport field E(x), and the uniform-ellipticity gate.

With one space dimension every tensor collapses to a scalar: grad V (x) grad V
-> V'^2, the Hessian -> V'', its divergence -> V'''.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, SpaceGrid
from .potential import Potential


class EllipticityViolation(RuntimeError):
    """The configured potential breaks uniform ellipticity of the diffusion
    operator; the macroscopic solver refuses to run."""


@dataclass(frozen=True)
class TransportCoeffs:
    grid: SpaceGrid
    D: np.ndarray
    W: np.ndarray
    E: np.ndarray
    ellipticity_floor: float


def diffusion_coeff(pot: Potential, params: PhysicalParams, x):
    """D = (1/nu) * (1/(beta*m) + V'^2/(nu^2 m^2) + beta*hbar^2 V''/(12 m^2))."""
    nu, m, beta, hbar = params.nu, params.m, params.beta, params.hbar
    d1 = pot.d1(np.asarray(x, dtype=float))
    d2 = pot.d2(np.asarray(x, dtype=float))
    return (1.0 / (beta * m) + d1 ** 2 / (nu * m) ** 2
            + beta * hbar ** 2 * d2 / (12.0 * m ** 2)) / nu


def drift_coeff(pot: Potential, params: PhysicalParams, x):
    """W = (1/nu) * (3 V'' V'/(nu^2 m^2) + beta*hbar^2 V'''/(12 m^2)).

    The 3 merges the Hessian-times-gradient and Laplacian-times-gradient
    contributions, which coincide in 1D.
    """
    nu, m, beta, hbar = params.nu, params.m, params.beta, params.hbar
    xs = np.asarray(x, dtype=float)
    return (3.0 * pot.d2(xs) * pot.d1(xs) / (nu * m) ** 2
            + beta * hbar ** 2 * pot.d3(xs) / (12.0 * m ** 2)) / nu


def field_coeff(pot: Potential, params: PhysicalParams, x):
    """E = V'/(nu*m): the leading-order transport field."""
    return pot.d1(np.asarray(x, dtype=float)) / (params.nu * params.m)


def build_coeffs(pot: Potential, params: PhysicalParams, grid: SpaceGrid) -> TransportCoeffs:
    x = grid.points
    coeffs = TransportCoeffs(
        grid=grid,
        D=np.asarray(diffusion_coeff(pot, params, x)),
        W=np.asarray(drift_coeff(pot, params, x)),
        E=np.asarray(field_coeff(pot, params, x)),
        ellipticity_floor=float("nan"),
    )
    floor = check_ellipticity(coeffs)
    return TransportCoeffs(grid, coeffs.D, coeffs.W, coeffs.E, floor)


def check_ellipticity(coeffs: TransportCoeffs) -> float:
    """Grid minimum of D(x); raises when it is not strictly positive."""
    floor = float(np.min(coeffs.D))
    if not floor > 0.0:
        raise EllipticityViolation(
            f"diffusion coefficient reaches {floor:.3e} on the grid; "
            "the configured potential violates uniform ellipticity")
    return floor
