import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qplap import (
    CellField,
    DegenerateDenominatorError,
    DegenerateInputError,
    NodalField,
    ParameterError,
    b_norm_q,
    cell_gradient,
    constant_cell_field,
    constant_nodal_field,
    energy_report,
    interval_grid,
    nodal_field_from_callable,
    p_energy,
    pq_weak_residual,
    q_energy,
    q_energy_derivative,
    rayleigh_quotient,
    spectral_residual,
)

PI2 = np.pi**2


def _interp_x(grid):
    return nodal_field_from_callable(grid, lambda x: x, dirichlet=False)


def test_q_energy_unit_gradient():
    g = interval_grid(0.0, 1.0, 16)
    u = NodalField(g, g.node_coords[:, 0], dirichlet=False)
    # interpolant of x is not Dirichlet-flagged; q_energy requires the flag
    with pytest.raises(ParameterError):
        q_energy(g, constant_cell_field(g, 1.0), u, 2.0)


def test_q_energy_values():
    # tent function peaking at ~x=1/2 has |u'| = 2 everywhere
    g = interval_grid(0.0, 1.0, 16)
    x = g.node_coords[:, 0]
    tent = NodalField(g, 1.0 - np.abs(2.0 * x - 1.0), dirichlet=True)
    rho = constant_cell_field(g, 1.0)
    assert q_energy(g, rho, tent, 2.0) == pytest.approx(4.0, rel=1e-13)
    zero = NodalField(g, np.zeros(g.n_nodes), dirichlet=True)
    assert q_energy(g, rho, zero, 2.0) == 0.0
    # linear in rho
    rho2 = constant_cell_field(g, 2.0)
    assert q_energy(g, rho2, tent, 3.0) == pytest.approx(
        2.0 * q_energy(g, rho, tent, 3.0), rel=1e-13
    )


def test_q_energy_rejects_small_q():
    g = interval_grid(0.0, 1.0, 8)
    u = NodalField(g, np.zeros(g.n_nodes), dirichlet=True)
    with pytest.raises(ParameterError):
        q_energy(g, constant_cell_field(g, 1.0), u, 1.5)


def test_rayleigh_quotient_sine_near_pi2():
    g = interval_grid(0.0, 1.0, 256)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    rho = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    r = rayleigh_quotient(g, rho, b, u, 2.0)
    assert abs(r - PI2) / PI2 < 0.01


def test_rayleigh_homogeneity_in_rho():
    g = interval_grid(0.0, 1.0, 32)
    rng = np.random.default_rng(0)
    u = NodalField(g, rng.random(g.n_nodes), dirichlet=True)
    rho = CellField(g, 0.5 + rng.random(g.n_cells))
    b = constant_nodal_field(g, 1.0)
    r1 = rayleigh_quotient(g, rho, b, u, 2.0)
    r2 = rayleigh_quotient(g, CellField(g, 2.0 * rho.values), b, u, 2.0)
    assert r2 == pytest.approx(2.0 * r1, rel=1e-13)


def test_rayleigh_negative_b_degenerate():
    g = interval_grid(0.0, 1.0, 16)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    with pytest.raises(DegenerateDenominatorError):
        rayleigh_quotient(g, constant_cell_field(g, 1.0), constant_nodal_field(g, -1.0), u, 2.0)


@settings(deadline=None, max_examples=25)
@given(t=st.floats(0.0, 3.0), q=st.sampled_from([2.0, 2.5, 3.0]))
def test_q_energy_homogeneity_in_u(t, q):
    g = interval_grid(0.0, 1.0, 20)
    rng = np.random.default_rng(1)
    u_vals = rng.random(g.n_nodes)
    rho = CellField(g, 0.1 + rng.random(g.n_cells))
    e1 = q_energy(g, rho, NodalField(g, u_vals, dirichlet=True), q)
    et = q_energy(g, rho, NodalField(g, t * u_vals, dirichlet=True), q)
    assert et == pytest.approx(t**q * e1, rel=1e-10, abs=1e-12)


@settings(deadline=None, max_examples=25)
@given(t=st.floats(0.01, 50.0))
def test_rayleigh_scale_invariance_in_u(t):
    g = interval_grid(0.0, 1.0, 20)
    rng = np.random.default_rng(2)
    u_vals = rng.random(g.n_nodes)
    rho = CellField(g, 0.1 + rng.random(g.n_cells))
    b = constant_nodal_field(g, 1.0)
    r1 = rayleigh_quotient(g, rho, b, NodalField(g, u_vals, dirichlet=True), 2.0)
    rt = rayleigh_quotient(g, rho, b, NodalField(g, t * u_vals, dirichlet=True), 2.0)
    assert rt == pytest.approx(r1, rel=1e-11)


def test_energy_derivative_matches_finite_differences():
    g = interval_grid(0.0, 1.0, 48)
    rng = np.random.default_rng(3)
    rho = CellField(g, 0.5 + rng.random(g.n_cells))
    # keep |grad u| bounded away from zero: strictly increasing interior profile
    base = np.cumsum(0.5 + rng.random(g.n_nodes))
    base = base / base[-1]
    u_vals = base - base[0]
    u_vals[-1] = 0.0  # Dirichlet container zeroes it anyway
    u = NodalField(g, np.sin(np.pi * g.node_coords[:, 0]) + 0.1 * u_vals, dirichlet=True)
    h = NodalField(g, rng.normal(size=g.n_nodes), dirichlet=True)
    for q in (2.0, 3.0):
        der = q_energy_derivative(g, rho, u, h, q)
        eps = 1e-6
        up = NodalField(g, u.values + eps * h.values, dirichlet=True)
        um = NodalField(g, u.values - eps * h.values, dirichlet=True)
        fd = (q_energy(g, rho, up, q) - q_energy(g, rho, um, q)) / (2.0 * eps)
        assert abs(der - fd) / abs(der) < 1e-6


def test_energy_report_fields():
    g = interval_grid(0.0, 1.0, 64)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    rho = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    rep = energy_report(g, rho, b, u, 2.0, p=4.0)
    assert rep.dirichlet_energy > 0.0
    assert rep.p_energy == pytest.approx(p_energy(g, u, 4.0))
    assert rep.rayleigh == pytest.approx(rep.dirichlet_energy / rep.b_norm_q)
    rep2 = energy_report(g, rho, constant_nodal_field(g, -1.0), u, 2.0)
    assert rep2.rayleigh is None


def test_b_norm_sign_case():
    g = interval_grid(0.0, 1.0, 16)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    assert b_norm_q(g, constant_nodal_field(g, -1.0), u, 2.0) < 0.0


def test_pq_residual_rejects_zero_and_bad_p():
    g = interval_grid(0.0, 1.0, 16)
    rho = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    zero = NodalField(g, np.zeros(g.n_nodes), dirichlet=True)
    with pytest.raises(DegenerateInputError):
        pq_weak_residual(g, rho, b, 1.0, zero, 2.0, 4.0)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    with pytest.raises(ParameterError):
        pq_weak_residual(g, rho, b, 1.0, u, 2.0, 2.0)


def test_spectral_residual_on_discrete_eigenpair(unit_grid_64, tight_eig_cfg):
    from qplap import principal_eigenpair

    g = unit_grid_64
    rho = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    pair = principal_eigenpair(g, rho, b, 2.0, tight_eig_cfg)
    _, res = spectral_residual(g, rho, b, pair.lambda1, pair.phi1, 2.0)
    assert res < 1e-11


def test_residual_field_zero_on_boundary(unit_grid_64):
    g = unit_grid_64
    rho = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    u = nodal_field_from_callable(g, lambda x: np.sin(np.pi * x), dirichlet=True)
    field, _ = pq_weak_residual(g, rho, b, 5.0, u, 2.0, 4.0)
    assert field.values[0] == 0.0 and field.values[-1] == 0.0
