"""Independent property probes for the spectral and inverse solvers.

Each probe draws or receives inputs, evaluates a structural property of the
principal eigenvalue (concavity, upper semicontinuity, the pointwise
two-expression inequality behind the spectral comparison argument) or of the
inverse map (stability along convergent input sequences), and reports the
worst observed violation against a tolerance.  Probes are deterministic
under a fixed seed; sample densities are log-uniform to exercise several
orders of magnitude.  Continuity claims are asserted only as "differences
shrink along convergent inputs", never as modulus bounds.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .assembly import _b_norm_q_raw, _check_q, _q_energy_raw
from .eigensolver import EigSolverConfig, principal_eigenpair
from .errors import ConvergenceError, ParameterError
from .grid import CellField, Grid, NodalField, _cell_gradient_raw
from .inverse import InverseConfig, SolveStatus, alpha_norm, solve_inverse
from .pqsolve import construct_solution

_TINY = 1e-300


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of one probe: worst violation against its tolerance."""

    name: str
    samples: int
    worst_violation: float
    tolerance: float
    passed: bool
    seed: int | None = None
    failures: int = 0
    records: tuple[dict, ...] = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.passed != (self.worst_violation <= self.tolerance):
            raise ParameterError("pass flag inconsistent with violation and tolerance")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seed": self.seed,
            "failures": self.failures,
            "records": list(self.records),
            "extra": self.extra,
        }


def _hash_arrays(*arrays: np.ndarray) -> str:
    digest = hashlib.sha256()
    for a in arrays:
        digest.update(np.ascontiguousarray(a).tobytes())
    return digest.hexdigest()[:16]


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("QPLAP_THREADS", "1")))
    except ValueError:
        return 1


def _map_samples(fn, items):
    """Evaluate samples, optionally fanning out to threads; order preserved."""
    workers = _worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def log_uniform_density(grid: Grid, rng: np.random.Generator, low: float = 0.1, high: float = 10.0) -> CellField:
    """Random positive cell density, log-uniform in [low, high]."""
    vals = np.exp(rng.uniform(np.log(low), np.log(high), size=grid.n_cells))
    return CellField(grid, vals)


def concavity_probe(
    grid: Grid,
    b: NodalField,
    q: float,
    samples: int = 50,
    t_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
    eig_cfg: EigSolverConfig | None = None,
    seed: int = 0,
    tol: float | None = None,
    rho_range: tuple[float, float] = (0.1, 10.0),
) -> ProbeReport:
    """Check concavity of the principal eigenvalue in the density.

    For random positive density pairs the eigenvalue of every convex
    combination must be at least the combination of eigenvalues; the worst
    signed violation is solver noise, bounded by twice the eigenvalue
    stagnation tolerance times the largest eigenvalue seen (the default
    tolerance when ``tol`` is not given).
    """
    if samples < 1:
        raise ParameterError("samples must be at least 1")
    if eig_cfg is None:
        eig_cfg = EigSolverConfig(tol_lambda=1e-11)
    rng = np.random.default_rng(seed)
    pairs = [
        (log_uniform_density(grid, rng, *rho_range), log_uniform_density(grid, rng, *rho_range))
        for _ in range(samples)
    ]

    def run(pair_input):
        rho1, rho2 = pair_input
        try:
            p1 = principal_eigenpair(grid, rho1, b, q, eig_cfg)
            p2 = principal_eigenpair(grid, rho2, b, q, eig_cfg, phi0=p1.phi1.values)
            worst = -np.inf
            worst_t = None
            lam_max = max(p1.lambda1, p2.lambda1)
            warm = p1.phi1.values
            for t in t_grid:
                mix = CellField(grid, t * rho1.values + (1.0 - t) * rho2.values)
                pm = principal_eigenpair(grid, mix, b, q, eig_cfg, phi0=warm)
                warm = pm.phi1.values
                lam_max = max(lam_max, pm.lambda1)
                violation = t * p1.lambda1 + (1.0 - t) * p2.lambda1 - pm.lambda1
                if violation > worst:
                    worst, worst_t = violation, t
            return {
                "inputs": _hash_arrays(rho1.values, rho2.values),
                "lambda1": p1.lambda1,
                "lambda2": p2.lambda1,
                "worst_violation": worst,
                "worst_t": worst_t,
                "lambda_max": lam_max,
                "failed": False,
            }
        except ConvergenceError as err:
            return {
                "inputs": _hash_arrays(rho1.values, rho2.values),
                "failed": True,
                "error": str(err),
            }

    records = _map_samples(run, pairs)
    ok = [r for r in records if not r["failed"]]
    failures = len(records) - len(ok)
    worst = max((r["worst_violation"] for r in ok), default=0.0)
    lam_max = max((r["lambda_max"] for r in ok), default=0.0)
    tolerance = tol if tol is not None else 2.0 * eig_cfg.tol_lambda * lam_max
    return ProbeReport(
        name="concavity",
        samples=samples,
        worst_violation=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
        seed=seed,
        failures=failures,
        records=tuple(records),
        extra={"lambda_max": lam_max},
    )


def picone_probe(
    grid: Grid,
    rho: CellField,
    phi: NodalField,
    u: NodalField,
    eps: float,
    q: float,
) -> tuple[float, float]:
    """Evaluate both density-weighted comparison integrals for (phi, u + eps).

    The left expression is, per cell with ratio factors taken from
    cell-averaged nodal values,

        L = |grad phi|^q + (q-1) t^q |grad u|^q
            - q t^(q-1) |grad u|^(q-2) (grad phi, grad u),   t = phi / (u + eps),

    which is pointwise nonnegative by Young's inequality.  The right
    expression replaces the coupling term by the gradient of the nodal
    interpolant of phi^q / (u + eps)^(q-1),

        R = |grad phi|^q - |grad u|^(q-2) (grad(phi^q / (u+eps)^(q-1)), grad u).

    The two agree in the continuum; discretely they differ by interpolation
    error that shrinks at first order under refinement.  Returns the pair of
    rho-weighted integrals (L_integral, R_integral).
    """
    q = _check_q(q)
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if not (phi.dirichlet and u.dirichlet):
        raise ParameterError("phi and u must be Dirichlet-flagged")
    if np.min(phi.values) < 0.0 or np.min(u.values) < 0.0:
        raise ParameterError("phi and u must be nonnegative")
    if rho.grid is not grid or phi.grid is not grid or u.grid is not grid:
        raise ParameterError("all fields must live on this grid")

    gphi, nphi = _cell_gradient_raw(grid, phi.values)
    gu, nu = _cell_gradient_raw(grid, u.values)
    dots = np.einsum("cd,cd->c", gphi, gu)

    phi_bar = phi.values[grid.cell_nodes].mean(axis=1)
    u_bar = u.values[grid.cell_nodes].mean(axis=1)
    t = phi_bar / (u_bar + eps)

    left = nphi**q + (q - 1.0) * t**q * nu**q - q * t ** (q - 1.0) * nu ** (q - 2.0) * dots

    quotient = phi.values**q / (u.values + eps) ** (q - 1.0)
    gq, _ = _cell_gradient_raw(grid, quotient)
    right = nphi**q - nu ** (q - 2.0) * np.einsum("cd,cd->c", gq, gu)

    m = grid.cell_measures
    return (
        float(np.dot(m, rho.values * left)),
        float(np.dot(m, rho.values * right)),
    )


def upper_semicontinuity_probe(
    grid: Grid,
    b: NodalField,
    q: float,
    rho: CellField,
    rho_sequence: list[CellField],
    eig_cfg: EigSolverConfig | None = None,
    tol: float | None = None,
    tail_fraction: float = 0.25,
) -> ProbeReport:
    """One-sided semicontinuity check along a convergent density sequence.

    Approximates limsup of the perturbed eigenvalues by the maximum over the
    trailing part of the (finite) sequence and requires it not to exceed the
    limit eigenvalue by more than ``tol``.
    """
    if not rho_sequence:
        raise ParameterError("rho_sequence must not be empty")
    if eig_cfg is None:
        eig_cfg = EigSolverConfig()
    pair_ref = principal_eigenpair(grid, rho, b, q, eig_cfg)
    lam_ref = pair_ref.lambda1
    tolerance = tol if tol is not None else 1e-5 * abs(lam_ref)

    def run(rho_n: CellField):
        try:
            pair = principal_eigenpair(grid, rho_n, b, q, eig_cfg, phi0=pair_ref.phi1.values)
            return {"inputs": _hash_arrays(rho_n.values), "lambda1": pair.lambda1, "failed": False}
        except ConvergenceError as err:
            return {"inputs": _hash_arrays(rho_n.values), "failed": True, "error": str(err)}

    records = _map_samples(run, rho_sequence)
    ok = [r for r in records if not r["failed"]]
    failures = len(records) - len(ok)
    tail_len = max(1, int(np.ceil(tail_fraction * len(ok))))
    tail = ok[-tail_len:] if ok else []
    worst = max((r["lambda1"] - lam_ref for r in tail), default=0.0)
    return ProbeReport(
        name="semicontinuity",
        samples=len(rho_sequence),
        worst_violation=worst,
        tolerance=tolerance,
        passed=worst <= tolerance,
        failures=failures,
        records=tuple(records),
        extra={"lambda_ref": lam_ref, "tail_length": tail_len},
    )


def stability_sweep(
    grid: Grid,
    rho_bar: CellField,
    b: NodalField,
    q: float,
    alpha: float,
    lambda_sequence: list[float] | None = None,
    rho_bar_sequence: list[CellField] | None = None,
    lambda_target: float | None = None,
    inv_cfg: InverseConfig | None = None,
    eig_cfg: EigSolverConfig | None = None,
    tol_final: float = 1e-4,
    name: str = "stability",
) -> ProbeReport:
    """Solve the inverse problem along a convergent input sequence.

    Exactly one of ``lambda_sequence`` (targets shrinking toward a limit,
    prior fixed) or ``rho_bar_sequence`` (priors converging to ``rho_bar``,
    target fixed at ``lambda_target``) must be given.  Records successive
    differences of the optimal densities (alpha-norm), of the constructed
    solutions (first-order Sobolev-type norm), and of their p-gradient
    norms.  Passes when the density differences are nonincreasing and the
    last one is at most ``tol_final``.
    """
    if (lambda_sequence is None) == (rho_bar_sequence is None):
        raise ParameterError("provide exactly one of lambda_sequence or rho_bar_sequence")
    if rho_bar_sequence is not None and lambda_target is None:
        raise ParameterError("rho_bar_sequence mode needs a fixed lambda_target")
    if inv_cfg is None:
        inv_cfg = InverseConfig(alpha=alpha)
    if eig_cfg is None:
        eig_cfg = EigSolverConfig()
    p = q * alpha / (alpha - 1.0)

    records = []
    solutions = []
    failures = 0
    warm: CellField | None = None
    inputs = (
        [("lambda", lam) for lam in lambda_sequence]
        if lambda_sequence is not None
        else [("rho_bar", rb) for rb in rho_bar_sequence]
    )
    for kind, value in inputs:
        lam_n = value if kind == "lambda" else lambda_target
        prior_n = rho_bar if kind == "lambda" else value
        sol = solve_inverse(grid, prior_n, b, lam_n, q, inv_cfg, eig_cfg, rho_init=warm)
        rec = {
            "lambda": float(lam_n),
            "status": sol.status.value,
            "distance": sol.distance,
            "mu": sol.mu,
            "lambda_achieved": sol.lambda_achieved,
        }
        if kind == "rho_bar":
            rec["prior_hash"] = _hash_arrays(prior_n.values)
        if sol.status is SolveStatus.SOLVED:
            pq = construct_solution(sol, q, alpha)
            solutions.append((sol, pq))
            warm = sol.rho_hat
        else:
            failures += 1
            solutions.append((sol, None))
        records.append(rec)

    rho_diffs = []
    u_diffs = []
    gradp_diffs = []
    ones = np.ones(grid.n_cells)
    for (sol_a, pq_a), (sol_b, pq_b) in zip(solutions, solutions[1:]):
        rho_diffs.append(alpha_norm(grid, sol_b.rho_hat.values - sol_a.rho_hat.values, alpha))
        if pq_a is not None and pq_b is not None:
            du = pq_b.u_hat.values - pq_a.u_hat.values
            wq = (
                _q_energy_raw(grid, ones, du, q)
                + float(np.dot(grid.node_weights, np.abs(du) ** q))
            ) ** (1.0 / q)
            u_diffs.append(wq)
            na = _p_grad_norm(grid, pq_a.u_hat.values, p)
            nb = _p_grad_norm(grid, pq_b.u_hat.values, p)
            gradp_diffs.append(abs(nb - na))

    monotone_violation = max(
        (rho_diffs[i + 1] - rho_diffs[i] for i in range(len(rho_diffs) - 1)), default=0.0
    )
    final_violation = (rho_diffs[-1] - tol_final) if rho_diffs else 0.0
    worst = max(monotone_violation, final_violation, 0.0) if (failures == 0) else np.inf
    return ProbeReport(
        name=name,
        samples=len(inputs),
        worst_violation=worst,
        tolerance=0.0,
        passed=worst <= 0.0,
        failures=failures,
        records=tuple(records),
        extra={
            "rho_diffs": rho_diffs,
            "u_diffs": u_diffs,
            "gradp_diffs": gradp_diffs,
            "distances": [r["distance"] for r in records],
            "tol_final": tol_final,
        },
    )


def _p_grad_norm(grid: Grid, u_vals: np.ndarray, p: float) -> float:
    _, mags = _cell_gradient_raw(grid, u_vals)
    return float(np.dot(grid.cell_measures, mags**p)) ** (1.0 / p)
