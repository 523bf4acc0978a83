import numpy as np
import pytest

from qplap import (
    CellField,
    EigSolverConfig,
    InverseConfig,
    NoSolutionError,
    PreconditionError,
    SolveStatus,
    Verdict,
    b_norm_q,
    cell_gradient,
    constant_cell_field,
    constant_nodal_field,
    construct_solution,
    existence_verdict,
    interval_grid,
    p_energy,
    pq_weak_residual,
    principal_eigenpair,
    q_energy,
    solve_inverse,
    spectral_residual,
)

PI2 = np.pi**2


def test_construct_scales_eigenfunction(demo_solution):
    pq = construct_solution(demo_solution, 2.0, 2.0)
    scale = demo_solution.mu ** 0.5  # (alpha-1)/q = 1/2
    expected = scale * demo_solution.eigenpair_at_rho_hat.phi1.values
    assert np.allclose(pq.u_hat.values, expected, rtol=1e-14)
    assert pq.p == pytest.approx(4.0)
    assert np.all(pq.u_hat.values >= 0.0)


def test_construct_with_unit_multiplier_is_identity(tight_eig_cfg):
    # mu = 1 makes u_hat equal to the eigenfunction exactly
    from qplap import InverseSolution, alpha_norm

    g = interval_grid(0.0, 1.0, 32)
    rho_bar = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    pair = principal_eigenpair(g, rho_bar, b, 2.0, tight_eig_cfg)
    _, mags = cell_gradient(g, pair.phi1)
    rho_hat = CellField(g, rho_bar.values + mags.values**2)
    sol = InverseSolution(
        grid=g, rho_bar=rho_bar, b=b, rho_hat=rho_hat, mu=1.0,
        lambda_target=pair.lambda1, lambda_achieved=pair.lambda1,
        eigenpair_at_rho_hat=pair, distance=alpha_norm(g, mags.values**2, 2.0),
        status=SolveStatus.SOLVED, outer_iterations=0, kkt=None, history=(),
    )
    pq = construct_solution(sol, 2.0, 2.0)
    assert np.array_equal(pq.u_hat.values, pair.phi1.values)


def test_full_certificate_on_demo(demo_solution):
    pq = construct_solution(demo_solution, 2.0, 2.0)
    assert pq.residual_max < 1e-6
    assert pq.verified
    # identity between recovered density increment and the solution gradient
    _, mags = cell_gradient(demo_solution.grid, pq.u_hat)
    delta = demo_solution.rho_hat.values - demo_solution.rho_bar.values
    assert np.max(np.abs(delta - mags.values**2)) < 1e-8 * demo_solution.rho_hat.values.max()


def test_constructed_solution_solves_spectral_problem(demo_solution):
    # with the optimal density, u_hat is an eigenfunction at the target value
    sol = demo_solution
    pq = construct_solution(sol, 2.0, 2.0)
    _, res = spectral_residual(
        sol.grid, sol.rho_hat, sol.b, sol.lambda_target, pq.u_hat, 2.0
    )
    assert res < 1e-9


def test_rayleigh_identity(demo_solution):
    sol = demo_solution
    pq = construct_solution(sol, 2.0, 2.0)
    g = sol.grid
    qe = q_energy(g, sol.rho_bar, pq.u_hat, 2.0)
    pe = p_energy(g, pq.u_hat, 4.0)
    bn = b_norm_q(g, sol.b, pq.u_hat, 2.0)
    lam = sol.lambda_target
    assert abs(qe / bn + pe / bn - lam) / lam < 1e-6


def test_scaled_solution_is_not_a_solution(demo_solution):
    # doubling breaks the balance: the two gradient terms scale differently
    sol = demo_solution
    pq = construct_solution(sol, 2.0, 2.0)
    g = sol.grid
    from qplap import NodalField

    doubled = NodalField(g, 2.0 * pq.u_hat.values, dirichlet=True)
    _, res = pq_weak_residual(g, sol.rho_bar, sol.b, sol.lambda_target, doubled, 2.0, 4.0)
    assert res > 1e-3


def test_halved_lambda_leaves_positive_residual(demo_solution):
    sol = demo_solution
    pq = construct_solution(sol, 2.0, 2.0)
    g = sol.grid
    _, res = pq_weak_residual(
        g, sol.rho_bar, sol.b, sol.lambda_target / 2.0, pq.u_hat, 2.0, 4.0
    )
    # the missing half of the weight term dominates the tiny certified residual
    w = g.node_weights
    b_term = w * sol.b.values * np.abs(pq.u_hat.values)
    scale = q_energy(g, sol.rho_bar, pq.u_hat, 2.0) + p_energy(g, pq.u_hat, 4.0)
    expected = 0.5 * sol.lambda_target * np.max(b_term[~g.boundary_mask]) / scale
    assert res >= 0.9 * expected
    assert res > 0.0


def test_construct_rejects_prior_feasible(tight_eig_cfg):
    g = interval_grid(0.0, 1.0, 32)
    rho_bar = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    sol = solve_inverse(g, rho_bar, b, PI2 / 2.0, 2.0, InverseConfig(), tight_eig_cfg)
    with pytest.raises(NoSolutionError):
        construct_solution(sol, 2.0, 2.0)


def test_construct_rejects_unconverged(tight_eig_cfg):
    g = interval_grid(0.0, 1.0, 32)
    rho_bar = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    starved = InverseConfig(max_outer=1, fallback=False)
    sol = solve_inverse(g, rho_bar, b, 2.0 * PI2, 2.0, starved, tight_eig_cfg)
    assert sol.status is SolveStatus.NOT_CONVERGED
    with pytest.raises(PreconditionError):
        construct_solution(sol, 2.0, 2.0)


def test_existence_verdicts(tight_eig_cfg):
    g = interval_grid(0.0, 1.0, 128)
    rho_bar = constant_cell_field(g, 1.0)
    b = constant_nodal_field(g, 1.0)
    low = existence_verdict(g, rho_bar, b, 2.0, PI2 / 2.0, tight_eig_cfg)
    assert low.verdict is Verdict.NO_SOLUTION
    high = existence_verdict(g, rho_bar, b, 2.0, 2.0 * PI2, tight_eig_cfg)
    assert high.verdict is Verdict.UNIQUE_SOLUTION
    assert high.lambda1_prior == pytest.approx(PI2, rel=1e-3)
    # the boundary case lies inside the nonexistence band
    tie = existence_verdict(g, rho_bar, b, 2.0, high.lambda1_prior, tight_eig_cfg)
    assert tie.verdict is Verdict.NO_SOLUTION
    assert tie.tolerance_band > 0.0


def test_uniqueness_of_constructed_solutions(demo_solution, tight_eig_cfg):
    # an independent re-run (fresh fixed point from the prior) rebuilds the
    # same solution field nodewise
    sol = demo_solution
    cfg = InverseConfig()
    again = solve_inverse(
        sol.grid, sol.rho_bar, sol.b, sol.lambda_target, 2.0, cfg, tight_eig_cfg
    )
    u1 = construct_solution(sol, 2.0, 2.0).u_hat.values
    u2 = construct_solution(again, 2.0, 2.0).u_hat.values
    assert np.max(np.abs(u1 - u2)) <= 10.0 * cfg.tol_fixed_point
