"""Nonnegative solutions of the two-exponent boundary value problem.

The problem couples a density-weighted q-Laplacian with an unweighted
p-Laplacian, p = q * alpha / (alpha - 1) > q.  It is never solved by direct
nonlinear iteration here: the solution is built from the inverse spectral
solve by rescaling the eigenfunction of the optimal density,

    u_hat = mu^((alpha-1)/q) * phi1(rho_hat),

and then certified against the weak form on every interior hat function.
For targets at or below the prior's principal eigenvalue no nonnegative
solution exists; above it the solution is unique.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .assembly import EnergyReport, energy_report, pq_weak_residual
from .eigensolver import EigSolverConfig, principal_eigenpair
from .errors import NoSolutionError, PreconditionError
from .grid import Grid, NodalField
from .inverse import InverseSolution, SolveStatus


class Verdict(enum.Enum):
    NO_SOLUTION = "NoSolution"
    UNIQUE_SOLUTION = "UniqueSolution"


@dataclass(frozen=True)
class ExistenceVerdict:
    """Existence classification of the boundary value problem at a given lambda.

    The comparison against the prior's eigenvalue carries a relative
    tolerance band; ties inside the band are classified as NoSolution, since
    nonexistence covers equality.
    """

    verdict: Verdict
    lambda_query: float
    lambda1_prior: float
    tolerance_band: float


@dataclass(frozen=True, eq=False)
class PQSolution:
    """Certified nonnegative solution built from an inverse solve."""

    u_hat: NodalField
    lam: float
    p: float
    q: float
    residual_max: float
    energies: EnergyReport
    source: InverseSolution
    verified: bool


def construct_solution(
    sol: InverseSolution,
    q: float,
    alpha: float,
    residual_tol: float = 1e-6,
) -> PQSolution:
    """Build the solution field from a Solved inverse solve and certify it.

    Raises NoSolutionError for PriorAlreadyFeasible input (the target did not
    exceed the prior's eigenvalue, so no nonnegative solution exists) and
    PreconditionError for an unconverged solve.
    """
    if sol.status is SolveStatus.PRIOR_ALREADY_FEASIBLE:
        raise NoSolutionError(
            "no nonnegative solution exists: the target eigenvalue "
            f"{sol.lambda_target} does not exceed the prior's principal eigenvalue "
            f"{sol.lambda_achieved}"
        )
    if sol.status is not SolveStatus.SOLVED:
        raise PreconditionError("construct_solution requires a Solved inverse solution")
    p = q * alpha / (alpha - 1.0)
    scale = sol.mu ** ((alpha - 1.0) / q)
    u_hat = NodalField(sol.grid, scale * sol.eigenpair_at_rho_hat.phi1.values, dirichlet=True)
    _, residual_max = pq_weak_residual(
        sol.grid, sol.rho_bar, sol.b, sol.lambda_target, u_hat, q, p
    )
    energies = energy_report(sol.grid, sol.rho_bar, sol.b, u_hat, q, p)
    return PQSolution(
        u_hat=u_hat,
        lam=sol.lambda_target,
        p=p,
        q=q,
        residual_max=residual_max,
        energies=energies,
        source=sol,
        verified=residual_max < residual_tol,
    )


def existence_verdict(
    grid: Grid,
    rho_bar,
    b,
    q: float,
    lam: float,
    eig_cfg: EigSolverConfig | None = None,
    rel_band: float = 1e-9,
) -> ExistenceVerdict:
    """Classify existence of a nonnegative solution at the given lambda.

    Computes the prior's principal eigenvalue and compares: at or below it
    (within the tolerance band) no nonnegative solution exists; strictly
    above it the solution exists and is unique.
    """
    if eig_cfg is None:
        eig_cfg = EigSolverConfig()
    band = max(rel_band, 10.0 * eig_cfg.tol_lambda)
    pair = principal_eigenpair(grid, rho_bar, b, q, eig_cfg)
    threshold = pair.lambda1 * (1.0 + band)
    verdict = Verdict.NO_SOLUTION if lam <= threshold else Verdict.UNIQUE_SOLUTION
    return ExistenceVerdict(
        verdict=verdict,
        lambda_query=float(lam),
        lambda1_prior=pair.lambda1,
        tolerance_band=band,
    )
