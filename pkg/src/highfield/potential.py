"""Catalog of smooth external potentials with exact derivatives up to fourth
order and the quantum finite difference deltaV(x, eta).

Potentials are analytic objects rather than sampled arrays: the macroscopic
coefficients need V''' and the equilibrium correction needs V'', so carrying
closed-form derivatives avoids stacking numerical differentiation error on
top of quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, SpaceGrid

SEAM_DECAY_TOL = 1e-12


class AperiodicPotentialError(ValueError):
    """Potential is not compatible with periodic spectral x-operators."""


@dataclass(frozen=True)
class Potential:
    """One catalog member.  ``kind`` is one of zero | linear | harmonic |
    gaussian_bump | cosine; coefficients are stored in ``a``, ``b``:

    - linear:        V = a*x
    - harmonic:      V = a**2 * x**2 / 2        (a = omega)
    - gaussian_bump: V = a * exp(-x**2/(2 b**2))
    - cosine:        V = a * cos(b*x)
    """

    kind: str
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "linear", "harmonic", "gaussian_bump", "cosine"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind in ("gaussian_bump",) and not self.b > 0.0:
            raise ValueError("gaussian_bump width must be positive")

    # -- pointwise evaluators ------------------------------------------------
    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return self.a * x
        if self.kind == "harmonic":
            return 0.5 * self.a ** 2 * x ** 2
        if self.kind == "gaussian_bump":
            return self.a * np.exp(-(x ** 2) / (2.0 * self.b ** 2))
        return self.a * np.cos(self.b * x)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return np.full_like(x, self.a)
        if self.kind == "harmonic":
            return self.a ** 2 * x
        if self.kind == "gaussian_bump":
            return -(x / self.b ** 2) * self.value(x)
        return -self.a * self.b * np.sin(self.b * x)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind in ("zero", "linear"):
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return np.full_like(x, self.a ** 2)
        if self.kind == "gaussian_bump":
            s2 = self.b ** 2
            return (x ** 2 / s2 - 1.0) / s2 * self.value(x)
        return -self.a * self.b ** 2 * np.cos(self.b * x)

    def d3(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind in ("zero", "linear", "harmonic"):
            return np.zeros_like(x)
        if self.kind == "gaussian_bump":
            s2 = self.b ** 2
            return (3.0 * x / s2 ** 2 - x ** 3 / s2 ** 3) * self.value(x)
        return self.a * self.b ** 3 * np.sin(self.b * x)

    def d4(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind in ("zero", "linear", "harmonic"):
            return np.zeros_like(x)
        if self.kind == "gaussian_bump":
            s2 = self.b ** 2
            return (x ** 4 / s2 ** 4 - 6.0 * x ** 2 / s2 ** 3 + 3.0 / s2 ** 2) * self.value(x)
        return self.a * self.b ** 4 * np.cos(self.b * x)

    @property
    def pointwise_only(self) -> bool:
        """True for kinds usable only where x enters as a parameter."""
        return self.kind in ("linear", "harmonic")


def make_potential(kind: str, **kw) -> Potential:
    """Config-facing factory.  Accepted parameter names per kind:
    linear(e0), harmonic(omega), gaussian_bump(amplitude, sigma),
    cosine(amplitude, wavenumber)."""
    if kind == "zero":
        return Potential("zero")
    if kind == "linear":
        return Potential("linear", a=float(kw["e0"]))
    if kind == "harmonic":
        return Potential("harmonic", a=float(kw["omega"]))
    if kind == "gaussian_bump":
        return Potential("gaussian_bump", a=float(kw["amplitude"]), b=float(kw["sigma"]))
    if kind == "cosine":
        return Potential("cosine", a=float(kw["amplitude"]), b=float(kw["wavenumber"]))
    raise ValueError(f"unknown potential kind {kind!r}")


def require_periodic(pot: Potential, space: SpaceGrid) -> None:
    """Gate for operators that use spectral x-transforms.

    cosine must fit the box with an integer number of periods; the bump must
    decay below SEAM_DECAY_TOL at the box seam; linear/harmonic never pass.
    """
    if pot.kind == "zero":
        return
    if pot.pointwise_only:
        raise AperiodicPotentialError(
            f"{pot.kind} potential is aperiodic: usable only as a pointwise "
            "coefficient, not with spectral x-transport")
    if pot.kind == "cosine":
        cycles = pot.b * space.length / (2.0 * np.pi)
        if abs(cycles - round(cycles)) > 1e-9:
            raise AperiodicPotentialError(
                f"cosine wavenumber {pot.b} does not fit the box "
                f"(length {space.length}: {cycles} periods)")
        return
    # gaussian_bump: effectively periodic when the tail clears the seam
    seam = np.exp(-(0.5 * space.length) ** 2 / (2.0 * pot.b ** 2))
    if seam > SEAM_DECAY_TOL:
        raise AperiodicPotentialError(
            f"gaussian_bump tail {seam:.2e} at the box seam exceeds "
            f"{SEAM_DECAY_TOL:.0e}; enlarge the box or shrink sigma")


def delta_v(pot: Potential, params: PhysicalParams, x, eta):
    """Quantum finite difference
    [V(x + hbar*eta/2m) - V(x - hbar*eta/2m)] / hbar; odd in eta and equal to
    V'(x)*eta/m for quadratic-or-lower V (hbar cancels exactly there).

    Broadcasts over array-valued x and eta.
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    shift = 0.5 * params.hbar * eta / params.m
    return (pot.value(x + shift) - pot.value(x - shift)) / params.hbar


def delta_v_table(pot: Potential, params: PhysicalParams, x: np.ndarray,
                  eta: np.ndarray) -> np.ndarray:
    """deltaV on the (x, eta) product grid, shape (len(x), len(eta))."""
    return delta_v(pot, params, x[:, None], eta[None, :])


def derivatives(pot: Potential, grid: SpaceGrid):
    """Arrays V, V', V'', V''', V'''' sampled on the grid."""
    x = grid.points
    return (pot.value(x), pot.d1(x), pot.d2(x), pot.d3(x), pot.d4(x))
