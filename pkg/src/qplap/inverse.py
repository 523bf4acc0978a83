"""Closest-density inverse problem for a prescribed principal eigenvalue.

Given a positive prior density and a target eigenvalue, find the density
closest to the prior in the discrete alpha-norm among all densities whose
principal eigenvalue is at least the target.  When the target does not
exceed the prior's eigenvalue the prior itself is the minimizer and the
solve reports PriorAlreadyFeasible.  Otherwise the constraint is active and
the unique minimizer satisfies the multiplier identity

    rho_hat = rho_bar + mu * |grad phi1(rho_hat)|^(q/(alpha-1)),   mu > 0,

which the solver iterates as a fixed point: at the current density compute
the eigenfunction gradient magnitudes g, then pick the multiplier mu by
bisection (the map mu -> lambda1(rho_bar + mu g^(q/(alpha-1))) is monotone
nondecreasing) so that the target eigenvalue is met, and repeat with the
updated density until the density increments stagnate.  The gradient term is
relaxed (geometrically averaged across iterations) because the plain
substitution overshoots; the relaxation factor is halved whenever the
increments stall.  Every iterate keeps the exact multiplier structure and is
feasible to bisection tolerance, and relaxation does not move the fixed
point.  A projected supergradient fallback with homogeneity-based rescaling
onto the feasible boundary is available when the fixed point stalls anyway.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    AdmissibilityError,
    ConvergenceError,
    ParameterError,
    PreconditionError,
)
from .grid import CellField, Grid, NodalField, _cell_gradient_raw
from .eigensolver import EigenPair, EigSolverConfig, principal_eigenpair

_TINY = 1e-300


class SolveStatus(enum.Enum):
    SOLVED = "Solved"
    PRIOR_ALREADY_FEASIBLE = "PriorAlreadyFeasible"
    NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class InverseConfig:
    """Parameters of the inverse solve.

    ``alpha`` is the norm exponent (the nonlinearity exponent p of the
    associated boundary value problem is q * alpha / (alpha - 1)).
    ``tol_constraint`` is the relative eigenvalue tolerance of the multiplier
    bisection, ``tol_fixed_point`` the relative density-increment stagnation
    tolerance of the outer iteration, ``relaxation`` the initial averaging
    weight on the fresh gradient field (halved automatically on stall).
    """

    alpha: float = 2.0
    tol_constraint: float = 1e-12
    tol_fixed_point: float = 1e-11
    max_outer: int = 200
    mu_bracket: tuple[float, float] = (1e-6, 1.0)
    fallback: bool = True
    relaxation: float = 0.6

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ParameterError(f"alpha must exceed 1, got {self.alpha}")
        if min(self.tol_constraint, self.tol_fixed_point) <= 0.0:
            raise ParameterError("tolerances must be positive")
        if self.max_outer < 1:
            raise ParameterError("max_outer must be at least 1")
        lo, hi = self.mu_bracket
        if not (0.0 < lo < hi):
            raise ParameterError("mu_bracket endpoints must be positive and ordered")
        if not (0.0 < self.relaxation <= 1.0):
            raise ParameterError("relaxation must lie in (0, 1]")


@dataclass(frozen=True)
class KKTReport:
    """Optimality diagnostics of a solved inverse problem.

    ``stationarity_residual`` is the worst relative cell deviation of
    (rho_hat - rho_bar)^(alpha-1) from mu^(alpha-1) |grad phi1|^q,
    ``constraint_residual`` the absolute eigenvalue gap |target - achieved|,
    ``sign_min`` the minimum of rho_hat - rho_bar over cells.
    """

    stationarity_residual: float
    constraint_residual: float
    sign_min: float

    def as_dict(self) -> dict:
        return {
            "stationarity_residual": self.stationarity_residual,
            "constraint_residual": self.constraint_residual,
            "sign_min": self.sign_min,
        }


@dataclass(frozen=True, eq=False)
class InverseSolution:
    """Result of an inverse solve, including the data it was solved from."""

    grid: Grid
    rho_bar: CellField
    b: NodalField
    rho_hat: CellField
    mu: float
    lambda_target: float
    lambda_achieved: float
    eigenpair_at_rho_hat: EigenPair
    distance: float
    status: SolveStatus
    outer_iterations: int
    kkt: KKTReport | None
    history: tuple[tuple[float, float], ...]  # (density increment, eigenvalue gap)


def alpha_norm(grid: Grid, values: np.ndarray, alpha: float) -> float:
    """Discrete alpha-norm of cell data, (sum |v_c|^alpha measure_c)^(1/alpha)."""
    vals = np.asarray(values, dtype=float).reshape(-1)
    return float(np.dot(grid.cell_measures, np.abs(vals) ** alpha)) ** (1.0 / alpha)


def scale_to_feasible(rho: CellField, lambda_target: float, eig: EigenPair) -> CellField:
    """Rescale a density so its principal eigenvalue equals the target exactly.

    Uses the 1-homogeneity of the eigenvalue in the density; ``eig`` must be
    the eigenpair of ``rho``.
    """
    lam = eig.lambda1
    if lam <= 0.0:
        raise AdmissibilityError(f"cannot rescale from a nonpositive eigenvalue {lam}")
    return CellField(rho.grid, rho.values * (lambda_target / lam))


def _signed_power(x: np.ndarray, expo: float) -> np.ndarray:
    return np.sign(x) * np.abs(x) ** expo


def _kkt_from_parts(
    grid: Grid,
    rho_bar_vals: np.ndarray,
    rho_hat_vals: np.ndarray,
    mu: float,
    pair: EigenPair,
    q: float,
    alpha: float,
    lambda_target: float,
) -> KKTReport:
    _, g = _cell_gradient_raw(grid, pair.phi1.values)
    rhs = mu ** (alpha - 1.0) * g**q
    lhs = _signed_power(rho_hat_vals - rho_bar_vals, alpha - 1.0)
    scale = max(float(np.max(rhs)), _TINY)
    stationarity = float(np.max(np.abs(lhs - rhs))) / scale
    return KKTReport(
        stationarity_residual=stationarity,
        constraint_residual=abs(lambda_target - pair.lambda1),
        sign_min=float(np.min(rho_hat_vals - rho_bar_vals)),
    )


def kkt_report(
    grid: Grid,
    sol: InverseSolution,
    rho_bar: CellField,
    b: NodalField,
    q: float,
    alpha: float,
) -> KKTReport:
    """Recompute optimality diagnostics for a Solved inverse solution.

    Pure report: works entirely from the solution's stored eigenpair and
    densities.  Raises PreconditionError unless the solve's constraint was
    active (status Solved).
    """
    if sol.status is not SolveStatus.SOLVED:
        raise PreconditionError(
            f"KKT diagnostics require an active constraint (status Solved), got {sol.status.value}"
        )
    return _kkt_from_parts(
        grid,
        rho_bar.values,
        sol.rho_hat.values,
        sol.mu,
        sol.eigenpair_at_rho_hat,
        q,
        alpha,
        sol.lambda_target,
    )


def _mu_bisection(
    grid: Grid,
    rho_bar_vals: np.ndarray,
    b: NodalField,
    q: float,
    base: np.ndarray,
    lambda_target: float,
    tol_rel: float,
    eig_cfg: EigSolverConfig,
    warm_phi: np.ndarray,
    bracket: tuple[float, float],
) -> tuple[float, np.ndarray, EigenPair]:
    """Find mu with lambda1(rho_bar + mu * base) = lambda_target by bisection.

    The map is monotone nondecreasing in mu, so the bracket upper end is
    doubled until it overshoots the target.  Returns the accepted multiplier
    together with the exact density array and eigenpair evaluated at it.
    """
    warm = warm_phi

    def evaluate(mu: float) -> tuple[np.ndarray, EigenPair]:
        nonlocal warm
        vals = rho_bar_vals + mu * base
        pair = principal_eigenpair(grid, CellField(grid, vals), b, q, eig_cfg, phi0=warm)
        warm = pair.phi1.values
        return vals, pair

    contrast_cap = 1e13 * float(np.min(rho_bar_vals)) / max(float(np.max(base)), _TINY)
    lo, hi = bracket
    vals_hi, pair_hi = evaluate(hi)
    expansions = 0
    while pair_hi.lambda1 < lambda_target:
        lo = hi
        hi *= 2.0
        if hi > contrast_cap:
            raise ConvergenceError(
                "multiplier bracket expansion exceeded a sane density contrast"
            )
        vals_hi, pair_hi = evaluate(hi)
        expansions += 1
        if expansions > 200:
            raise ConvergenceError("multiplier bracket expansion failed to reach the target")

    tol_abs = tol_rel * lambda_target
    best = (abs(pair_hi.lambda1 - lambda_target), hi, vals_hi, pair_hi)
    if best[0] <= tol_abs:
        return best[1], best[2], best[3]

    if lo > 0.0:
        vals_lo, pair_lo = evaluate(lo)
        if pair_lo.lambda1 >= lambda_target:
            lo = 0.0  # lambda1(rho_bar) < target is guaranteed on the active branch
        else:
            gap = abs(pair_lo.lambda1 - lambda_target)
            if gap < best[0]:
                best = (gap, lo, vals_lo, pair_lo)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        vals_mid, pair_mid = evaluate(mid)
        gap = abs(pair_mid.lambda1 - lambda_target)
        if gap < best[0]:
            best = (gap, mid, vals_mid, pair_mid)
        if gap <= tol_abs:
            break
        if pair_mid.lambda1 < lambda_target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * max(hi, 1.0):
            break
    return best[1], best[2], best[3]


def _fixed_point(
    grid: Grid,
    rho_bar_vals: np.ndarray,
    b: NodalField,
    q: float,
    lambda_target: float,
    cfg: InverseConfig,
    eig_cfg: EigSolverConfig,
    rho_vals: np.ndarray,
    pair: EigenPair,
    budget: int,
    mu_seed: float | None,
    history: list[tuple[float, float]],
) -> tuple[np.ndarray, EigenPair, float, bool, int]:
    expo = q / (cfg.alpha - 1.0)
    mu_prev = mu_seed
    used = 0
    base = None
    theta = cfg.relaxation
    prev_inc = np.inf
    stall = 0
    streak = 0
    polish_left: int | None = None
    for _ in range(budget):
        used += 1
        _, g = _cell_gradient_raw(grid, pair.phi1.values)
        fresh = g**expo
        if np.max(fresh) <= 0.0:
            raise AdmissibilityError("eigenfunction gradient vanished everywhere")
        base = fresh if base is None else (1.0 - theta) * base + theta * fresh
        bracket = cfg.mu_bracket if mu_prev is None else (mu_prev / 4.0, mu_prev * 4.0)
        try:
            mu, rho_next, pair_next = _mu_bisection(
                grid, rho_bar_vals, b, q, base, lambda_target,
                cfg.tol_constraint, eig_cfg, pair.phi1.values, bracket,
            )
        except ConvergenceError:
            break
        inc = alpha_norm(grid, rho_next - rho_vals, cfg.alpha) / max(
            alpha_norm(grid, rho_vals, cfg.alpha), _TINY
        )
        history.append((inc, abs(pair_next.lambda1 - lambda_target)))
        rho_vals, pair, mu_prev = rho_next, pair_next, mu
        if polish_left is not None:
            polish_left -= 1
            if polish_left <= 0:
                return rho_vals, pair, mu, True, used
            continue
        if inc < cfg.tol_fixed_point:
            # Two consecutive sub-tolerance increments, then a few polish
            # steps: the geometric tail leaves the returned iterate well
            # below the stagnation level (restart-to-restart agreement).
            streak += 1
            if streak >= 2:
                polish_left = 3
        else:
            streak = 0
        if inc >= 0.95 * prev_inc:
            stall += 1
            if stall >= 2:
                theta = max(0.5 * theta, 0.05)
                stall = 0
        else:
            stall = 0
        prev_inc = inc
    converged = polish_left is not None
    return rho_vals, pair, mu_prev if mu_prev is not None else 0.0, converged, used


def _projected_descent(
    grid: Grid,
    rho_bar_vals: np.ndarray,
    b: NodalField,
    q: float,
    alpha: float,
    lambda_target: float,
    eig_cfg: EigSolverConfig,
    rho_vals: np.ndarray,
    pair: EigenPair,
    steps: int,
) -> tuple[np.ndarray, EigenPair]:
    """Diminishing-step supergradient descent on the distance, projected back
    onto the feasible boundary by eigenvalue rescaling."""
    floor = 1e-6 * float(np.min(rho_bar_vals))
    measures = grid.cell_measures
    best = (np.inf, rho_vals, pair)
    for j in range(1, steps + 1):
        delta = rho_vals - rho_bar_vals
        grad = alpha * _signed_power(delta, alpha - 1.0) * measures
        gmax = max(float(np.max(np.abs(grad))), _TINY)
        step = 0.25 * float(np.max(rho_vals)) / gmax / j
        cand = np.maximum(rho_vals - step * grad, floor)
        pair_c = principal_eigenpair(
            grid, CellField(grid, cand), b, q, eig_cfg, phi0=pair.phi1.values
        )
        scale = lambda_target / pair_c.lambda1
        cand = cand * scale
        pair_c = EigenPair(  # exact by 1-homogeneity: same eigenfunction, scaled value
            lambda1=lambda_target,
            phi1=pair_c.phi1,
            iterations=pair_c.iterations,
            final_increment=pair_c.final_increment,
            inner_iterations=pair_c.inner_iterations,
            lambda_history=pair_c.lambda_history,
        )
        dist = alpha_norm(grid, cand - rho_bar_vals, alpha)
        if dist < best[0]:
            best = (dist, cand, pair_c)
        rho_vals, pair = cand, pair_c
    return best[1], best[2]


def solve_inverse(
    grid: Grid,
    rho_bar: CellField,
    b: NodalField,
    lambda_target: float,
    q: float,
    cfg: InverseConfig | None = None,
    eig_cfg: EigSolverConfig | None = None,
    rho_init: CellField | None = None,
) -> InverseSolution:
    """Solve the closest-density problem for a prescribed principal eigenvalue.

    Returns PriorAlreadyFeasible (with the prior as minimizer and zero
    distance) when the target does not exceed the prior's eigenvalue, the
    case in which the associated boundary value problem has no nonnegative
    solution.  Otherwise runs the multiplier fixed point; NotConverged is a
    status, not an exception.  ``rho_init`` optionally replaces the prior as
    the starting density (it is rescaled implicitly through the first
    multiplier solve).
    """
    if cfg is None:
        cfg = InverseConfig()
    if eig_cfg is None:
        eig_cfg = EigSolverConfig()
    if lambda_target <= 0.0:
        raise ParameterError(f"lambda_target must be positive, got {lambda_target}")
    if np.min(rho_bar.values) <= 0.0:
        raise AdmissibilityError("prior density must be positive on every cell")

    pair_bar = principal_eigenpair(grid, rho_bar, b, q, eig_cfg)
    if lambda_target <= pair_bar.lambda1:
        return InverseSolution(
            grid=grid,
            rho_bar=rho_bar,
            b=b,
            rho_hat=rho_bar,
            mu=0.0,
            lambda_target=lambda_target,
            lambda_achieved=pair_bar.lambda1,
            eigenpair_at_rho_hat=pair_bar,
            distance=0.0,
            status=SolveStatus.PRIOR_ALREADY_FEASIBLE,
            outer_iterations=0,
            kkt=None,
            history=(),
        )

    rho_bar_vals = rho_bar.values
    if rho_init is not None:
        if rho_init.grid is not grid:
            raise ParameterError("rho_init must live on the same grid")
        if np.min(rho_init.values) <= 0.0:
            raise AdmissibilityError("rho_init must be positive on every cell")
        rho_vals = rho_init.values.copy()
        pair = principal_eigenpair(grid, rho_init, b, q, eig_cfg, phi0=pair_bar.phi1.values)
    else:
        rho_vals = rho_bar_vals.copy()
        pair = pair_bar

    history: list[tuple[float, float]] = []
    rho_vals, pair, mu, converged, used = _fixed_point(
        grid, rho_bar_vals, b, q, lambda_target, cfg, eig_cfg,
        rho_vals, pair, cfg.max_outer, None, history,
    )
    outer = used

    if not converged and cfg.fallback:
        rho_vals, pair = _projected_descent(
            grid, rho_bar_vals, b, q, cfg.alpha, lambda_target, eig_cfg,
            rho_vals, pair, steps=min(cfg.max_outer, 50),
        )
        rho_vals, pair, mu, converged, used = _fixed_point(
            grid, rho_bar_vals, b, q, lambda_target, cfg, eig_cfg,
            rho_vals, pair, cfg.max_outer, None, history,
        )
        outer += used

    rho_hat = CellField(grid, rho_vals)
    status = SolveStatus.SOLVED if converged else SolveStatus.NOT_CONVERGED
    kkt = (
        _kkt_from_parts(
            grid, rho_bar_vals, rho_vals, mu, pair, q, cfg.alpha, lambda_target
        )
        if converged
        else None
    )
    return InverseSolution(
        grid=grid,
        rho_bar=rho_bar,
        b=b,
        rho_hat=rho_hat,
        mu=mu,
        lambda_target=lambda_target,
        lambda_achieved=pair.lambda1,
        eigenpair_at_rho_hat=pair,
        distance=alpha_norm(grid, rho_vals - rho_bar_vals, cfg.alpha),
        status=status,
        outer_iterations=outer,
        kkt=kkt,
        history=tuple(history),
    )
