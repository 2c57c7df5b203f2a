import numpy as np
import pytest

from highfield.core import PhaseGrid, PhysicalParams, SpaceGrid, WignerField


@pytest.fixture
def params():
    return PhysicalParams(hbar=1.0, m=1.0, beta=1.0, nu=1.0, eps=0.1)


@pytest.fixture
def grid():
    return PhaseGrid(SpaceGrid(64, 2.0 * np.pi), n_v=256, v_max=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def gaussian_field(grid: PhaseGrid, x_mode: int = 1, v_width: float = 1.0,
                   amplitude: float = 1.0) -> WignerField:
    """Smooth periodic-in-x field decaying below 1e-12 at the v boundary."""
    x = grid.space.points
    v = grid.v_points
    profile = 1.0 + 0.5 * np.cos(x_mode * 2.0 * np.pi * x / grid.space.length)
    bump = np.exp(-0.5 * (v / v_width) ** 2)
    return WignerField(grid, amplitude * profile[:, None] * bump[None, :])


def random_decaying_field(grid: PhaseGrid, rng, amplitude: float = 1.0) -> WignerField:
    """Random smooth field with Gaussian v-decay: a few random x-harmonics
    times a Gaussian envelope with random polynomial modulation in v."""
    x = grid.space.points
    v = grid.v_points
    L = grid.space.length
    vals = np.zeros(grid.shape)
    for mode in range(4):
        cx = rng.normal() * np.cos(2.0 * np.pi * mode * x / L) + \
            rng.normal() * np.sin(2.0 * np.pi * mode * x / L)
        pv = rng.normal() + rng.normal() * v + rng.normal() * v ** 2
        vals += np.outer(cx, pv)
    vals *= np.exp(-0.35 * v ** 2)[None, :]
    return WignerField(grid, amplitude * vals)
