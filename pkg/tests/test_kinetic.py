import numpy as np
import pytest

from highfield.core import (NormSpec, PhaseGrid, PhysicalParams, SpaceGrid,
                            WignerField, density, norm_l2, norm_xk)
from highfield.equilibrium import kernel_m, maxwellian
from highfield.kinetic import (KineticProblem, KineticStepper,
                               collision_field_substep, kinetic_solve,
                               transport_substep)
from highfield.potential import make_potential

from conftest import gaussian_field

COSINE = make_potential("cosine", amplitude=0.3, wavenumber=1.0)


def total_phase_mass(w):
    return float(w.values.sum() * w.grid.space.dx * w.grid.dv)


def test_collision_fixed_point_on_kernel(grid, params):
    kern = kernel_m(COSINE, params, grid)
    stepper = KineticStepper(COSINE, params, grid)
    n = 1.0 + 0.2 * np.cos(grid.space.points)
    w = WignerField(grid, n[:, None] * kern.values)
    out = collision_field_substep(stepper, w, 0.3)
    scale = np.max(np.abs(w.values))
    assert np.max(np.abs(out.values - w.values)) < 1e-9 * scale


def test_collision_homogeneous_relaxation_closed_form(grid):
    # V constant, x-homogeneous datum: w(t) = n F + exp(-nu t / eps)(w0 - n F)
    params = PhysicalParams(eps=0.2, nu=1.3)
    stepper = KineticStepper(make_potential("zero"), params, grid)
    F = maxwellian(params, grid).values
    w0_row = np.exp(-0.4 * (grid.v_points - 0.8) ** 2)
    w = WignerField(grid, np.tile(w0_row, (grid.space.n_x, 1)))
    n = density(w).values[:, None]
    dt = 0.05
    out = collision_field_substep(stepper, w, dt)
    decay = np.exp(-params.nu * dt / params.eps)
    want = n * F[None, :] + decay * (w.values - n * F[None, :])
    assert np.max(np.abs(out.values - want)) < 1e-10 * np.max(np.abs(want))


def test_collision_zero_step_is_identity(grid, params, rng):
    stepper = KineticStepper(COSINE, params, grid)
    w = gaussian_field(grid)
    out = collision_field_substep(stepper, w, 0.0)
    assert np.array_equal(out.values, w.values)


def test_collision_preserves_density(grid, params):
    stepper = KineticStepper(COSINE, params, grid)
    w = gaussian_field(grid)
    before = density(w).values
    after = density(collision_field_substep(stepper, w, 0.07)).values
    assert np.max(np.abs(after - before)) <= 1e-12 * max(1.0, np.max(np.abs(before)))


def test_transport_integer_shift_oracle(params):
    grid = PhaseGrid(SpaceGrid(128, 6.4), n_v=128, v_max=8.0)
    stepper = KineticStepper(make_potential("zero"), params, grid)
    x = grid.space.points
    profile = np.exp(-8.0 * np.sin(np.pi * x / 6.4) ** 2)
    w = WignerField(grid, np.outer(np.ones(128), 0.0 * grid.v_points)
                    + profile[:, None] * np.exp(-0.5 * grid.v_points ** 2)[None, :])
    dt = 0.5
    out = transport_substep(stepper, w, dt)
    j = int(np.argmin(np.abs(grid.v_points - 1.0)))
    assert grid.v_points[j] == 1.0  # v = 1 sits on the grid
    shift_cells = round(1.0 * dt / grid.space.dx)
    assert abs(shift_cells * grid.space.dx - dt) < 1e-12
    want = np.roll(w.values[:, j], shift_cells)
    assert np.max(np.abs(out.values[:, j] - want)) < 1e-10


def test_transport_identity_cases(grid, params):
    stepper = KineticStepper(make_potential("zero"), params, grid)
    w = gaussian_field(grid)
    assert np.array_equal(transport_substep(stepper, w, 0.0).values, w.values)
    hom = WignerField(grid, np.tile(np.exp(-0.5 * grid.v_points ** 2),
                                    (grid.space.n_x, 1)))
    out = transport_substep(stepper, hom, 0.37)
    assert np.max(np.abs(out.values - hom.values)) < 1e-13


def test_transport_preserves_l2(grid, params):
    stepper = KineticStepper(make_potential("zero"), params, grid)
    w = gaussian_field(grid)
    out = transport_substep(stepper, w, 0.29)
    assert abs(norm_l2(out) - norm_l2(w)) <= 1e-12 * norm_l2(w)


def test_solve_conserves_mass(grid):
    params = PhysicalParams(eps=0.1)
    kern = kernel_m(COSINE, params, grid)
    n = 1.0 + 0.2 * np.cos(grid.space.points)
    w0 = WignerField(grid, n[:, None] * kern.values)
    prob = KineticProblem(COSINE, params, grid, w0, 1.0, 0.005)
    traj = kinetic_solve(prob, [0.0, 1.0])
    m0 = total_phase_mass(traj.at(0.0))
    assert abs(total_phase_mass(traj.at(1.0)) - m0) <= 1e-10 * abs(m0)


def test_solve_homogeneous_relaxation_many_steps():
    params = PhysicalParams(eps=0.2, nu=1.0)
    grid = PhaseGrid(SpaceGrid(16, 2.0 * np.pi), n_v=256, v_max=10.0)
    F = maxwellian(params, grid).values
    w0_row = np.exp(-0.3 * (grid.v_points + 0.5) ** 2)
    w0 = WignerField(grid, np.tile(w0_row, (16, 1)))
    prob = KineticProblem(make_potential("zero"), params, grid, w0, 0.5, 0.0025)
    traj = kinetic_solve(prob, [0.5])
    n = density(w0).values[:, None]
    decay = np.exp(-params.nu * 0.5 / params.eps)
    want = n * F[None, :] + decay * (w0.values - n * F[None, :])
    got = traj.at(0.5).values
    assert np.max(np.abs(got - want)) < 1e-8 * np.max(np.abs(want))


def test_strang_order(grid):
    params = PhysicalParams(eps=0.5)
    w0 = gaussian_field(grid)
    spec = NormSpec(1)

    def run(dt):
        prob = KineticProblem(COSINE, params, grid, w0, 0.5, dt)
        return kinetic_solve(prob, [0.5]).at(0.5)

    ref = run(0.0025)
    errs = []
    for dt in (0.02, 0.01):
        out = run(dt)
        errs.append(norm_xk(WignerField(grid, out.values - ref.values), spec))
    order = np.log2(errs[0] / errs[1])
    assert 1.8 <= order <= 2.2


def test_eps_robustness_small_knudsen(grid):
    params = PhysicalParams(eps=1e-3)
    kern = kernel_m(COSINE, params, grid)
    n = 1.0 + 0.2 * np.cos(grid.space.points)
    w0 = WignerField(grid, n[:, None] * kern.values
                     + 0.1 * np.outer(np.sin(grid.space.points),
                                      grid.v_points * np.exp(-grid.v_points ** 2)))
    prob = KineticProblem(COSINE, params, grid, w0, 0.1, 0.005)
    traj = kinetic_solve(prob, [0.1])
    out = traj.at(0.1)
    assert np.all(np.isfinite(out.values))
    assert norm_xk(out, NormSpec(1)) < 10.0 * norm_xk(w0, NormSpec(1))


def test_output_time_validation(grid, params):
    prob = KineticProblem(COSINE, params, grid, gaussian_field(grid), 0.5, 0.01)
    with pytest.raises(ValueError):
        kinetic_solve(prob, [0.005])
