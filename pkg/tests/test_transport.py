import numpy as np
import pytest

from highfield.core import PhaseGrid, PhysicalParams, SpaceGrid, x_derivative
from highfield.equilibrium import kernel_m
from highfield.potential import Potential, make_potential
from highfield.transport import (EllipticityViolation, build_coeffs,
                                 check_ellipticity, diffusion_coeff,
                                 drift_coeff, field_coeff)

COSINE = make_potential("cosine", amplitude=0.3, wavenumber=1.0)


def test_diffusion_special_cases():
    params = PhysicalParams()
    assert diffusion_coeff(make_potential("zero"), params, 0.0) == pytest.approx(1.0)
    lin = make_potential("linear", e0=0.7)
    assert diffusion_coeff(lin, params, 2.0) == pytest.approx(1.0 + 0.49)


def test_drift_special_cases():
    params = PhysicalParams()
    assert drift_coeff(make_potential("linear", e0=0.7), params, 1.0) == 0.0
    harm = make_potential("harmonic", omega=1.0)
    xs = np.array([-1.0, 0.5, 2.0])
    assert np.allclose(drift_coeff(harm, params, xs), 3.0 * xs)


def test_diffusion_matches_kernel_pressure(grid, params):
    # nu * D(x) = m2(x) - V'(x)^2 / (nu m)^2 with m2 from quadrature
    kern = kernel_m(COSINE, params, grid)
    x = grid.space.points
    lhs = params.nu * diffusion_coeff(COSINE, params, x)
    rhs = kern.second_moment - (COSINE.d1(x) / (params.nu * params.m)) ** 2
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_drift_matches_moment_derivative(grid, params):
    # nu * W(x) = d/dx m2(x) - V'' V' / (nu m)^2, m2 from quadrature
    kern = kernel_m(COSINE, params, grid)
    x = grid.space.points
    lhs = params.nu * drift_coeff(COSINE, params, x)
    rhs = x_derivative(kern.second_moment, grid.space) - \
        COSINE.d2(x) * COSINE.d1(x) / (params.nu * params.m) ** 2
    assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_ellipticity_floor():
    params = PhysicalParams()
    sg = SpaceGrid(128, 2.0 * np.pi)
    coeffs = build_coeffs(make_potential("zero"), params, sg)
    assert coeffs.ellipticity_floor == pytest.approx(1.0)
    small = build_coeffs(make_potential("cosine", amplitude=0.1, wavenumber=1.0),
                         params, sg)
    assert small.ellipticity_floor > 1.0 - 0.1 - 0.1 / 12.0


def test_ellipticity_violation():
    # beta hbar^2 A k0^2 / 12 > 1/(beta m): A=15 makes D(0) negative
    params = PhysicalParams()
    sg = SpaceGrid(128, 2.0 * np.pi)
    with pytest.raises(EllipticityViolation):
        build_coeffs(make_potential("cosine", amplitude=15.0, wavenumber=1.0),
                     params, sg)


def test_divergence_form_equivalence():
    # d/dx(D dn/dx) + d/dx(W n) written out against the expanded coefficient
    # grouping, on a smooth periodic test profile
    params = PhysicalParams(hbar=0.8, m=1.1, beta=0.9, nu=1.3)
    sg = SpaceGrid(256, 2.0 * np.pi)
    x = sg.points
    n = 1.0 + 0.3 * np.cos(x) + 0.1 * np.sin(2.0 * x)
    for pot in (COSINE, make_potential("cosine", amplitude=0.2, wavenumber=2.0)):
        D = diffusion_coeff(pot, params, x)
        W = drift_coeff(pot, params, x)
        dn = x_derivative(n, sg)
        lhs = x_derivative(D * dn + W * n, sg)
        nu, m, beta, hbar = params.nu, params.m, params.beta, params.hbar
        d1, d2, d3 = pot.d1(x), pot.d2(x), pot.d3(x)
        inner = (dn / (beta * m) + d1 ** 2 * dn / (nu * m) ** 2
                 + n * (2.0 * d2 * d1 + d2 * d1) / (nu * m) ** 2
                 + beta * hbar ** 2 / (12.0 * m ** 2) * (d2 * dn + d3 * n))
        rhs = x_derivative(inner, sg) / nu
        assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_coeffs_ignore_potential_offset():
    # D, W, E depend on V only through derivatives: make value() unusable and
    # confirm the coefficient evaluation never touches it
    params = PhysicalParams()

    class NoValue(Potential):
        def value(self, x):
            raise AssertionError("coefficients must not evaluate V itself")

    pot = NoValue("cosine", a=0.3, b=1.0)
    xs = np.linspace(-2, 2, 7)
    base = make_potential("cosine", amplitude=0.3, wavenumber=1.0)
    assert np.allclose(diffusion_coeff(pot, params, xs),
                       diffusion_coeff(base, params, xs))
    assert np.allclose(drift_coeff(pot, params, xs), drift_coeff(base, params, xs))
    assert np.allclose(field_coeff(pot, params, xs), field_coeff(base, params, xs))
