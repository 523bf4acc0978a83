import numpy as np
import pytest

from qplap import (
    AdmissibilityError,
    CellField,
    EigSolverConfig,
    InverseConfig,
    InverseSolution,
    KKTReport,
    NodalField,
    ParameterError,
    PreconditionError,
    SolveStatus,
    alpha_norm,
    cell_gradient,
    constant_cell_field,
    constant_nodal_field,
    interval_grid,
    kkt_report,
    principal_eigenpair,
    scale_to_feasible,
    solve_inverse,
)

PI2 = np.pi**2


def _setup(n=64):
    g = interval_grid(0.0, 1.0, n)
    return g, constant_cell_field(g, 1.0), constant_nodal_field(g, 1.0)


def test_scale_to_feasible_identity(tight_eig_cfg):
    g, rho, b = _setup()
    pair = principal_eigenpair(g, rho, b, 2.0, tight_eig_cfg)
    same = scale_to_feasible(rho, pair.lambda1, pair)
    assert np.allclose(same.values, rho.values, rtol=1e-15)


def test_scale_to_feasible_doubling(tight_eig_cfg):
    g, rho, b = _setup()
    pair = principal_eigenpair(g, rho, b, 2.0, tight_eig_cfg)
    doubled = scale_to_feasible(rho, 2.0 * pair.lambda1, pair)
    assert np.allclose(doubled.values, 2.0 * rho.values, rtol=1e-15)
    re_solved = principal_eigenpair(g, doubled, b, 2.0, tight_eig_cfg)
    assert re_solved.lambda1 == pytest.approx(2.0 * pair.lambda1, rel=1e-11)


def test_scale_to_feasible_reaches_target(tight_eig_cfg):
    # unit density on (0,1): scaling to 4 pi^2 needs rho close to 4
    g, rho, b = _setup(256)
    pair = principal_eigenpair(g, rho, b, 2.0, tight_eig_cfg)
    scaled = scale_to_feasible(rho, 4.0 * PI2, pair)
    assert np.allclose(scaled.values, 4.0 * PI2 / pair.lambda1, rtol=1e-14)
    assert scaled.values[0] == pytest.approx(4.0, rel=1e-4)


def test_prior_already_feasible(tight_eig_cfg):
    g, rho, b = _setup()
    sol = solve_inverse(g, rho, b, PI2 / 2.0, 2.0, InverseConfig(), tight_eig_cfg)
    assert sol.status is SolveStatus.PRIOR_ALREADY_FEASIBLE
    assert sol.distance == 0.0
    assert np.all(sol.rho_hat.values == rho.values)
    assert sol.kkt is None


def test_solved_demo_properties(demo_solution):
    sol = demo_solution
    lam = 2.0 * PI2
    assert sol.status is SolveStatus.SOLVED
    assert abs(sol.lambda_achieved - lam) / lam < 1e-6
    delta = sol.rho_hat.values - sol.rho_bar.values
    assert delta.min() >= -1e-12
    # symmetric data give a symmetric optimal density
    assert np.max(np.abs(sol.rho_hat.values - sol.rho_hat.values[::-1])) < 1e-9
    assert sol.mu > 0.0
    assert sol.distance > 0.0


def test_kkt_report_of_demo(demo_solution):
    sol = demo_solution
    rep = kkt_report(sol.grid, sol, sol.rho_bar, sol.b, 2.0, 2.0)
    assert rep.stationarity_residual < 1e-4
    assert rep.constraint_residual / sol.lambda_target < 1e-6
    assert rep.sign_min >= -1e-12


def test_kkt_report_rejects_prior_feasible(tight_eig_cfg):
    g, rho, b = _setup()
    sol = solve_inverse(g, rho, b, PI2 / 2.0, 2.0, InverseConfig(), tight_eig_cfg)
    with pytest.raises(PreconditionError):
        kkt_report(g, sol, rho, b, 2.0, 2.0)


def test_kkt_report_identity_construction(tight_eig_cfg):
    # hand-built stationary point: rho_hat = rho_bar + g^(q/(alpha-1)), mu = 1
    g, rho_bar, b = _setup()
    pair = principal_eigenpair(g, rho_bar, b, 2.0, tight_eig_cfg)
    _, mags = cell_gradient(g, pair.phi1)
    rho_hat = CellField(g, rho_bar.values + mags.values ** 2.0)
    sol = InverseSolution(
        grid=g, rho_bar=rho_bar, b=b, rho_hat=rho_hat, mu=1.0,
        lambda_target=pair.lambda1, lambda_achieved=pair.lambda1,
        eigenpair_at_rho_hat=pair, distance=alpha_norm(g, mags.values**2, 2.0),
        status=SolveStatus.SOLVED, outer_iterations=0, kkt=None, history=(),
    )
    rep = kkt_report(g, sol, rho_bar, b, 2.0, 2.0)
    assert rep.stationarity_residual == pytest.approx(0.0, abs=1e-14)
    assert rep.sign_min >= 0.0


def test_multiplier_identity_cellwise(demo_solution):
    sol = demo_solution
    _, mags = cell_gradient(sol.grid, sol.eigenpair_at_rho_hat.phi1)
    target = sol.mu * mags.values ** 2.0  # q/(alpha-1) = 2 here
    delta = sol.rho_hat.values - sol.rho_bar.values
    assert np.max(np.abs(delta - target)) < 1e-8 * sol.rho_hat.values.max()


def test_parameter_errors(tight_eig_cfg):
    g, rho, b = _setup(16)
    with pytest.raises(ParameterError):
        solve_inverse(g, rho, b, -1.0, 2.0, InverseConfig(), tight_eig_cfg)
    with pytest.raises(AdmissibilityError):
        solve_inverse(g, constant_cell_field(g, -1.0), b, 5.0, 2.0, InverseConfig(), tight_eig_cfg)
    with pytest.raises(ParameterError):
        InverseConfig(alpha=1.0)
    with pytest.raises(ParameterError):
        InverseConfig(mu_bracket=(1.0, 0.5))


def test_uniqueness_under_random_restarts(demo_solution, tight_eig_cfg):
    sol = demo_solution
    g = sol.grid
    rho_bar, b = sol.rho_bar, sol.b
    lam = sol.lambda_target
    cfg = InverseConfig()
    rng = np.random.default_rng(42)
    for _ in range(3):
        pert = CellField(g, rho_bar.values * np.exp(rng.uniform(-0.7, 0.7, g.n_cells)))
        p0 = principal_eigenpair(g, pert, b, 2.0, tight_eig_cfg)
        start = scale_to_feasible(pert, lam, p0)
        other = solve_inverse(g, rho_bar, b, lam, 2.0, cfg, tight_eig_cfg, rho_init=start)
        gap = np.max(np.abs(other.rho_hat.values - sol.rho_hat.values))
        assert gap <= 10.0 * cfg.tol_fixed_point


def test_nested_feasible_sets_distance_monotone(tight_eig_cfg):
    g, rho_bar, b = _setup(48)
    cfg = InverseConfig()
    lams = [1.2 * PI2, 1.7 * PI2, 2.5 * PI2]
    dists = [
        solve_inverse(g, rho_bar, b, lam, 2.0, cfg, tight_eig_cfg).distance
        for lam in lams
    ]
    assert dists[0] <= dists[1] <= dists[2]


def test_local_minimality_probe(demo_solution, tight_eig_cfg):
    # feasible perturbations of the minimizer cannot be closer to the prior
    sol = demo_solution
    g = sol.grid
    rng = np.random.default_rng(7)
    for _ in range(5):
        noise = 1.0 + 0.02 * rng.normal(size=g.n_cells)
        cand = CellField(g, sol.rho_hat.values * noise)
        pair = principal_eigenpair(g, cand, sol.b, 2.0, tight_eig_cfg)
        feas = scale_to_feasible(cand, sol.lambda_target, pair)
        d = alpha_norm(g, feas.values - sol.rho_bar.values, 2.0)
        assert d >= sol.distance - 1e-10


def test_solution_rebuilt_from_gradient_is_fixed_point(demo_solution, tight_eig_cfg):
    # rebuilding the density from the solution's own eigenfunction gradient
    # reproduces it (the defining property of the minimizer)
    sol = demo_solution
    g = sol.grid
    _, mags = cell_gradient(g, sol.eigenpair_at_rho_hat.phi1)
    rebuilt = sol.rho_bar.values + sol.mu * mags.values**2
    assert np.max(np.abs(rebuilt - sol.rho_hat.values)) < 1e-8
    pair = principal_eigenpair(g, CellField(g, rebuilt), sol.b, 2.0, tight_eig_cfg)
    assert pair.lambda1 == pytest.approx(sol.lambda_target, rel=1e-9)


def test_not_converged_status_and_fallback_path(tight_eig_cfg):
    g, rho_bar, b = _setup(32)
    # a one-iteration budget cannot satisfy the two-step stagnation rule
    starved = InverseConfig(max_outer=1, fallback=False)
    sol = solve_inverse(g, rho_bar, b, 2.0 * PI2, 2.0, starved, tight_eig_cfg)
    assert sol.status is SolveStatus.NOT_CONVERGED
    assert sol.kkt is None
    # the fallback reuses the descent restart and then converges
    with_fallback = InverseConfig(max_outer=40, fallback=True, relaxation=1.0)
    sol2 = solve_inverse(g, rho_bar, b, 2.0 * PI2, 2.0, with_fallback, tight_eig_cfg)
    assert sol2.status in (SolveStatus.SOLVED, SolveStatus.NOT_CONVERGED)


def test_history_recorded(demo_solution):
    assert len(demo_solution.history) == demo_solution.outer_iterations
    incs = [h[0] for h in demo_solution.history]
    assert incs[-1] < 1e-11


def test_alpha_norm_measure_weighting():
    g = interval_grid(0.0, 2.0, 4)
    vals = np.full(g.n_cells, 3.0)
    assert alpha_norm(g, vals, 2.0) == pytest.approx(3.0 * np.sqrt(2.0))
    assert alpha_norm(g, vals, 3.0) == pytest.approx(3.0 * 2.0 ** (1.0 / 3.0))


def test_alpha_three_halves_exponent(tight_eig_cfg):
    # non-quadratic alpha exercises the general exponent q/(alpha-1)
    g, rho_bar, b = _setup(48)
    alpha = 1.5
    cfg = InverseConfig(alpha=alpha, tol_fixed_point=1e-10)
    lam = 1.6 * PI2
    sol = solve_inverse(g, rho_bar, b, lam, 2.0, cfg, tight_eig_cfg)
    assert sol.status is SolveStatus.SOLVED
    assert abs(sol.lambda_achieved - lam) / lam < 1e-6
    _, mags = cell_gradient(g, sol.eigenpair_at_rho_hat.phi1)
    expo = 2.0 / (alpha - 1.0)
    delta = sol.rho_hat.values - rho_bar.values
    assert np.max(np.abs(delta - sol.mu * mags.values**expo)) < 1e-6 * sol.rho_hat.values.max()
