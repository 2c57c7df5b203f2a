"""Shared value types: physical parameters, phase-space grids, fields, norms,
and the velocity Fourier transform every operator module builds on.

The transform convention is the symmetric continuum one,
``Ff(eta) = (2*pi)**-0.5 * integral f(v) exp(-i*v*eta) dv``, realized on the
grid so that ``idft_v(grid, dft_v(w)) == w`` to machine precision.  No other
module touches raw FFT scaling; multiplier operators go through this pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Operator applied to a field living on a different grid."""


class NonZeroMassError(ValueError):
    """A zero-density field was required but carries mass."""


class StabilityViolation(RuntimeError):
    """A time-marching scheme produced unbounded norm growth."""


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PhysicalParams:
    """Nondimensional constants: hbar, mass, inverse temperature, relaxation
    rate, and the Knudsen number eps in (0, 1)."""

    hbar: float = 1.0
    m: float = 1.0
    beta: float = 1.0
    nu: float = 1.0
    eps: float = 0.1

    def __post_init__(self) -> None:
        for name in ("hbar", "m", "beta", "nu", "eps"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")

    def with_eps(self, eps: float) -> "PhysicalParams":
        return PhysicalParams(self.hbar, self.m, self.beta, self.nu, eps)


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform periodic grid on [-length/2, length/2)."""

    n_x: int
    length: float
    points: np.ndarray = dc_field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not _is_pow2(self.n_x):
            raise ValueError("n_x must be a power of two")
        if not self.length > 0.0:
            raise ValueError("length must be positive")
        dx = self.length / self.n_x
        pts = -0.5 * self.length + dx * np.arange(self.n_x)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "wavenumbers",
                           TWO_PI * np.fft.fftfreq(self.n_x, d=dx))

    @property
    def dx(self) -> float:
        return self.length / self.n_x


@dataclass(frozen=True)
class PhaseGrid:
    """Space grid paired with a symmetric velocity box [-v_max, v_max) and its
    Fourier-dual eta grid (FFT ordering)."""

    space: SpaceGrid
    n_v: int
    v_max: float
    v_points: np.ndarray = dc_field(init=False, repr=False, compare=False)
    eta_points: np.ndarray = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not _is_pow2(self.n_v):
            raise ValueError("n_v must be a power of two")
        if not self.v_max > 0.0:
            raise ValueError("v_max must be positive")
        dv = 2.0 * self.v_max / self.n_v
        object.__setattr__(self, "v_points", -self.v_max + dv * np.arange(self.n_v))
        object.__setattr__(self, "eta_points",
                           TWO_PI * np.fft.fftfreq(self.n_v, d=dv))

    @property
    def dv(self) -> float:
        return 2.0 * self.v_max / self.n_v

    @property
    def shape(self) -> tuple[int, int]:
        return (self.space.n_x, self.n_v)


@dataclass(frozen=True)
class WignerField:
    """Real-valued samples w(x_i, v_j) on a phase grid."""

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"field shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class DensityField:
    """Real-valued samples n(x_i) on a space grid."""

    grid: SpaceGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_x,):
            raise GridMismatchError(
                f"density shape {vals.shape} != ({self.grid.n_x},)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class NormSpec:
    """Velocity weight exponent k of the (1 + |v|^(2k))-weighted L2 norm.

    In one dimension admissibility requires 2k > 1, i.e. k >= 1.
    """

    k: int = 1

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be an integer >= 1 in one dimension")


# ---------------------------------------------------------------------------
# velocity transform

def _v_phase(grid: PhaseGrid) -> np.ndarray:
    # grid starts at v0 = -v_max, so the DFT needs the shift phase exp(-i*v0*eta)
    return np.exp(-1j * grid.v_points[0] * grid.eta_points)


def dft_v(field: WignerField) -> np.ndarray:
    """Transform w(x, v) -> Fw(x, eta) rowwise in v (symmetric convention)."""
    grid = field.grid
    coef = grid.dv / np.sqrt(TWO_PI)
    return coef * _v_phase(grid)[None, :] * np.fft.fft(field.values, axis=1)


def dft_v_values(grid: PhaseGrid, values: np.ndarray) -> np.ndarray:
    coef = grid.dv / np.sqrt(TWO_PI)
    return coef * _v_phase(grid)[None, :] * np.fft.fft(values, axis=1)


def idft_v(grid: PhaseGrid, coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft_v`; returns the complex sample array."""
    coef = np.sqrt(TWO_PI) / grid.dv
    return coef * np.fft.ifft(coeffs / _v_phase(grid)[None, :], axis=1)


def real_field(grid: PhaseGrid, values: np.ndarray, tol: float = 1e-12,
               what: str = "operator output") -> WignerField:
    """Assert the imaginary residue of a spectrally produced array is small,
    then discard it."""
    scale = max(1.0, float(np.max(np.abs(values.real))))
    residue = float(np.max(np.abs(values.imag)))
    if residue > tol * scale:
        raise FloatingPointError(
            f"{what}: imaginary residue {residue:.3e} exceeds {tol:.1e}")
    return WignerField(grid, values.real)


# ---------------------------------------------------------------------------
# x-direction spectral helpers (periodic fields only)

def x_derivative(values: np.ndarray, space: SpaceGrid) -> np.ndarray:
    """Spectral d/dx along axis 0 (axis 0 is x for both field and density
    arrays); the Nyquist mode is zeroed as usual for odd multipliers."""
    k = space.wavenumbers.copy()
    k[space.n_x // 2] = 0.0
    hat = np.fft.fft(values, axis=0)
    shape = (-1,) + (1,) * (values.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * hat, axis=0).real


# ---------------------------------------------------------------------------
# quadrature-backed functionals

def density(field: WignerField) -> DensityField:
    """n[w](x) = integral of w dv (midpoint rule on the uniform v grid)."""
    n = field.grid.dv * field.values.sum(axis=1)
    return DensityField(field.grid.space, n)


def density_values(grid: PhaseGrid, values: np.ndarray) -> np.ndarray:
    return grid.dv * values.sum(axis=1)


def total_mass(n: DensityField) -> float:
    return float(n.grid.dx * n.values.sum())


def norm_xk(field: WignerField, spec: NormSpec = NormSpec()) -> float:
    """Weighted norm ( integral |w|^2 (1 + |v|^(2k)) dx dv )^(1/2)."""
    g = field.grid
    weight = 1.0 + np.abs(g.v_points) ** (2 * spec.k)
    val = (np.abs(field.values) ** 2 * weight[None, :]).sum()
    return float(np.sqrt(val * g.space.dx * g.dv))


def norm_l2(field: WignerField) -> float:
    g = field.grid
    return float(np.sqrt((field.values ** 2).sum() * g.space.dx * g.dv))


def norm_l2_x(n: DensityField) -> float:
    return float(np.sqrt((n.values ** 2).sum() * n.grid.dx))
