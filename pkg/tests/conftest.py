import numpy as np
import pytest

from qplap import (
    EigSolverConfig,
    InverseConfig,
    constant_cell_field,
    constant_nodal_field,
    interval_grid,
    solve_inverse,
)

PI2 = np.pi**2


@pytest.fixture(scope="session")
def unit_grid_64():
    return interval_grid(0.0, 1.0, 64)


@pytest.fixture(scope="session")
def unit_grid_128():
    return interval_grid(0.0, 1.0, 128)


@pytest.fixture(scope="session")
def tight_eig_cfg():
    return EigSolverConfig(tol_lambda=1e-13, max_outer=2000)


@pytest.fixture(scope="session")
def demo_solution(unit_grid_128, tight_eig_cfg):
    """Reference inverse solve: unit prior and weight, doubled eigenvalue."""
    grid = unit_grid_128
    rho_bar = constant_cell_field(grid, 1.0)
    b = constant_nodal_field(grid, 1.0)
    sol = solve_inverse(
        grid, rho_bar, b, 2.0 * PI2, 2.0, InverseConfig(), tight_eig_cfg
    )
    return sol
