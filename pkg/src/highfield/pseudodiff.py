"""The quantum force operator and its resolvent, realized as exact Fourier
multipliers in v at each fixed x (x is a parameter throughout)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (GridMismatchError, PhaseGrid, PhysicalParams, WignerField,
                   dft_v, idft_v, real_field)
from .potential import Potential, delta_v_table


@dataclass(frozen=True)
class ThetaOperator:
    """Multiplication by i*deltaV(x_i, eta_j) in the velocity-Fourier variable.

    The multiplier column at the unpaired Nyquist eta is zeroed so that
    multiplier(x, -eta) = conj(multiplier(x, eta)) holds on the discrete grid
    and real fields map to real fields.
    """

    grid: PhaseGrid
    params: PhysicalParams
    multiplier: np.ndarray

    def check(self, field: WignerField) -> None:
        if field.grid is not self.grid and field.grid != self.grid:
            raise GridMismatchError("field grid differs from operator grid")


def build_theta(pot: Potential, params: PhysicalParams, grid: PhaseGrid) -> ThetaOperator:
    table = delta_v_table(pot, params, grid.space.points, grid.eta_points)
    table[:, grid.n_v // 2] = 0.0
    return ThetaOperator(grid, params, 1j * table)


def apply_theta(op: ThetaOperator, w: WignerField) -> WignerField:
    """Theta[V] w = F^-1( i*deltaV * Fw ), rowwise in v."""
    op.check(w)
    out = idft_v(op.grid, op.multiplier * dft_v(w))
    return real_field(op.grid, out, what="apply_theta")


def resolvent(op: ThetaOperator, h: WignerField) -> WignerField:
    """(nu - Theta[V])^-1 h, i.e. Fw = Fh / (nu - i*deltaV).

    Total: the denominator modulus is bounded below by nu > 0.
    """
    op.check(h)
    out = idft_v(op.grid, dft_v(h) / (op.params.nu - op.multiplier))
    return real_field(op.grid, out, what="resolvent")


def resolvent_values(op: ThetaOperator, values: np.ndarray) -> np.ndarray:
    """Array-level resolvent used by inner loops; asserts reality without the
    field wrapping."""
    from .core import dft_v_values
    out = idft_v(op.grid, dft_v_values(op.grid, values) / (op.params.nu - op.multiplier))
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if float(np.max(np.abs(out.imag))) > 1e-12 * scale:
        raise FloatingPointError("resolvent output lost reality")
    return out.real
