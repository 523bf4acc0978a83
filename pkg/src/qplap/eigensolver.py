"""Principal eigenpair of the weighted q-Laplacian and its density derivative.

The eigenvalue is the infimum of the weighted Rayleigh quotient over nonzero
Dirichlet trial fields.  It is computed by inverse iteration: each outer step
solves the strictly convex problem

    minimize (1/q) * integral rho |grad u|^q  -  integral b |phi_k|^(q-2) phi_k u

over Dirichlet fields (a single symmetric positive definite sparse solve for
q = 2, damped Newton with backtracking for q > 2), then clips the minimizer
to its nonnegative part and renormalizes to unit q-norm.  The iteration stops
on relative stagnation of the Rayleigh quotient.  Regularization of the
degenerate Hessian weight |grad u|^(q-2) is applied only inside Newton steps,
never in reported energies or residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .errors import (
    AdmissibilityError,
    ConvergenceError,
    DegenerateDenominatorError,
    FieldMismatchError,
    ParameterError,
)
from .grid import CellField, Grid, NodalField, _cell_gradient_raw
from .assembly import _b_norm_q_raw, _check_q, _q_energy_raw, _scatter_flux

_TINY = 1e-300


@dataclass(frozen=True)
class EigSolverConfig:
    """Tolerances and iteration caps for the inverse-iteration eigensolver.

    ``tol_lambda`` is the relative stagnation tolerance on the eigenvalue,
    ``gradient_floor`` scales the mean gradient magnitude to floor the Newton
    Hessian weights (inner solves only).
    """

    tol_lambda: float = 1e-12
    max_outer: int = 800
    inner_tol: float = 1e-12
    inner_max: int = 60
    gradient_floor: float = 1e-10

    def __post_init__(self):
        if min(self.tol_lambda, self.inner_tol, self.gradient_floor) <= 0.0:
            raise ParameterError("all eigensolver tolerances must be positive")
        if self.max_outer < 1 or self.inner_max < 1:
            raise ParameterError("iteration caps must be at least 1")


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Converged principal eigenvalue with its nonnegative eigenfunction.

    ``phi1`` is Dirichlet-flagged, nonnegative, and normalized to unit
    discrete q-norm.  ``lambda1`` equals the Rayleigh quotient of ``phi1``.
    """

    lambda1: float
    phi1: NodalField
    iterations: int
    final_increment: float
    inner_iterations: int = 0
    lambda_history: tuple[float, ...] = ()
    converged: bool = True


def _assemble_scalar_stiffness(grid: Grid, a_cells: np.ndarray):
    """Interior stiffness matrix with scalar cell weights ``a_cells`` (CSC)."""
    data = (a_cells[:, None, None] * grid._stiff_base).ravel()[grid._asm_sel]
    n = grid.n_interior
    return coo_matrix((data, (grid._asm_rows, grid._asm_cols)), shape=(n, n)).tocsc()


def _assemble_matrix_stiffness(grid: Grid, a_mats: np.ndarray):
    """Interior stiffness matrix with per-cell dxd weight matrices (CSC)."""
    data = np.einsum(
        "c,cmd,cde,cne->cmn", grid.cell_measures, grid.grad_coeffs, a_mats, grid.grad_coeffs
    ).ravel()[grid._asm_sel]
    n = grid.n_interior
    return coo_matrix((data, (grid._asm_rows, grid._asm_cols)), shape=(n, n)).tocsc()


def _default_initial_guess(grid: Grid) -> np.ndarray:
    """Interpolant of the first Dirichlet eigenfunction with unit coefficients."""
    c = grid.node_coords
    if grid.dimension == 1:
        a, b = c[0, 0], c[-1, 0]
        return np.sin(np.pi * (c[:, 0] - a) / (b - a))
    lx = c[:, 0].max()
    ly = c[:, 1].max()
    return np.sin(np.pi * c[:, 0] / lx) * np.sin(np.pi * c[:, 1] / ly)


def _normalize_q(grid: Grid, u: np.ndarray, q: float) -> np.ndarray:
    nq = float(np.dot(grid.node_weights, np.abs(u) ** q))
    if nq <= 0.0:
        raise AdmissibilityError("iterate vanished; cannot normalize")
    return u / nq ** (1.0 / q)


def _newton_minimize(
    grid: Grid,
    rho_vals: np.ndarray,
    q: float,
    rhs: np.ndarray,
    u0: np.ndarray,
    cfg: EigSolverConfig,
) -> tuple[np.ndarray, int]:
    """Minimize (1/q) integral rho |grad u|^q - rhs.u by damped Newton.

    ``rhs`` and ``u0`` are full nodal arrays (zero on the boundary); the
    returned minimizer is a full nodal array.  The objective is strictly
    convex for q >= 2, so backtracking on the objective suffices.
    """
    interior = grid.interior_idx
    u = u0.copy()
    u[grid.boundary_mask] = 0.0
    scale = max(float(np.max(np.abs(rhs))), _TINY)

    def objective(vals: np.ndarray) -> float:
        _, mags = _cell_gradient_raw(grid, vals)
        return float(np.dot(grid.cell_measures, rho_vals * mags**q) / q - np.dot(rhs, vals))

    f_cur = objective(u)
    steps = 0
    for _ in range(cfg.inner_max):
        gu, nu = _cell_gradient_raw(grid, u)
        flux = (rho_vals * nu ** (q - 2.0))[:, None] * gu
        grad_full = _scatter_flux(grid, flux) - rhs
        grad_int = grad_full[interior]
        if np.max(np.abs(grad_int)) <= cfg.inner_tol * scale:
            break
        floor = cfg.gradient_floor * max(float(nu.mean()), _TINY)
        nreg = np.maximum(nu, floor)
        dim = grid.dimension
        eye = np.eye(dim)
        a_mats = (rho_vals * nreg ** (q - 2.0))[:, None, None] * eye + (
            (q - 2.0) * rho_vals * nreg ** (q - 4.0)
        )[:, None, None] * np.einsum("cd,ce->cde", gu, gu)
        K = _assemble_matrix_stiffness(grid, a_mats)
        try:
            delta = splu(K).solve(-grad_int)
        except RuntimeError as err:
            raise ConvergenceError(f"singular Newton system in inner solve: {err}") from err
        slope = float(np.dot(grad_int, delta))
        # Step or slope at round-off level: converged to machine precision.
        if np.max(np.abs(delta)) <= 1e-14 * max(1.0, float(np.max(np.abs(u)))) or slope >= 0.0:
            break
        t = 1.0
        trial = u.copy()
        accepted = False
        for _ in range(50):
            trial[interior] = u[interior] + t * delta
            f_new = objective(trial)
            if f_new <= f_cur + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        u = trial.copy()
        f_cur = f_new
        steps += 1
    return u, steps


def principal_eigenpair(
    grid: Grid,
    rho: CellField,
    b: NodalField,
    q: float,
    cfg: EigSolverConfig | None = None,
    phi0: NodalField | np.ndarray | None = None,
) -> EigenPair:
    """Compute the principal eigenpair of the weighted q-Laplacian.

    Requires a cellwise positive density and a coefficient ``b`` that is
    positive at some node.  ``phi0`` optionally warm-starts the iteration;
    the default start is the constant-coefficient sine interpolant.  Raises
    ConvergenceError (carrying the last iterate) when the outer iteration
    exhausts its budget, and DegenerateDenominatorError if an iterate leaves
    the cone where the b-weighted norm is positive.
    """
    q = _check_q(q)
    if cfg is None:
        cfg = EigSolverConfig()
    if not isinstance(rho, CellField) or rho.grid is not grid:
        raise FieldMismatchError("rho must be a CellField on this grid")
    if not isinstance(b, NodalField) or b.grid is not grid:
        raise FieldMismatchError("b must be a NodalField on this grid")
    rho_vals = rho.values
    b_vals = b.values
    if np.min(rho_vals) <= 0.0:
        raise AdmissibilityError("density must be positive on every cell")
    if np.max(b_vals) <= 0.0:
        raise AdmissibilityError("b must be positive somewhere")

    if phi0 is None:
        phi = _default_initial_guess(grid)
    elif isinstance(phi0, NodalField):
        if phi0.grid is not grid:
            raise FieldMismatchError("phi0 must live on this grid")
        phi = phi0.values.copy()
    else:
        phi = np.array(phi0, dtype=float).reshape(-1)
        if phi.shape != (grid.n_nodes,):
            raise FieldMismatchError("phi0 must have one value per node")
    phi = np.maximum(phi, 0.0)
    phi[grid.boundary_mask] = 0.0
    phi = _normalize_q(grid, phi, q)

    lu = None
    if q == 2.0:
        lu = splu(_assemble_scalar_stiffness(grid, rho_vals))

    def quotient(vals: np.ndarray) -> float:
        denom = _b_norm_q_raw(grid, b_vals, vals, q)
        if denom <= 0.0:
            raise DegenerateDenominatorError(
                "iterate left the cone where the b-weighted norm is positive"
            )
        return _q_energy_raw(grid, rho_vals, vals, q) / denom

    lam = quotient(phi)
    history = [lam]
    inner_total = 0
    streak = 0
    increment = np.inf
    iterations = 0

    for iterations in range(1, cfg.max_outer + 1):
        rhs = grid.node_weights * b_vals * np.abs(phi) ** (q - 2.0) * phi
        rhs[grid.boundary_mask] = 0.0
        if q == 2.0:
            u = np.zeros(grid.n_nodes)
            u[grid.interior_idx] = lu.solve(rhs[grid.interior_idx])
            inner_total += 1
        else:
            u0 = phi * max(lam, _TINY) ** (-1.0 / (q - 1.0))
            u, steps = _newton_minimize(grid, rho_vals, q, rhs, u0, cfg)
            inner_total += steps
        if np.max(u) <= 0.0 < np.max(-u):
            u = -u  # eigenfunctions are sign-invariant, keep the positive representative
        u = np.maximum(u, 0.0)
        if np.max(u) <= 0.0:
            raise AdmissibilityError("iterate left the nonnegative cone")
        phi = _normalize_q(grid, u, q)
        lam_new = quotient(phi)
        history.append(lam_new)
        increment = abs(lam_new - lam) / max(abs(lam_new), _TINY)
        lam = lam_new
        if increment < cfg.tol_lambda:
            streak += 1
            if streak >= 2:
                break
        else:
            streak = 0
    else:
        last = EigenPair(
            lambda1=lam,
            phi1=NodalField(grid, phi, dirichlet=True),
            iterations=iterations,
            final_increment=increment,
            inner_iterations=inner_total,
            lambda_history=tuple(history),
            converged=False,
        )
        raise ConvergenceError(
            f"eigensolver did not converge in {cfg.max_outer} outer iterations "
            f"(last increment {increment:.3e})",
            last=last,
        )

    return EigenPair(
        lambda1=lam,
        phi1=NodalField(grid, phi, dirichlet=True),
        iterations=iterations,
        final_increment=increment,
        inner_iterations=inner_total,
        lambda_history=tuple(history),
        converged=True,
    )


def eigenvalue_derivative(grid: Grid, pair: EigenPair, b: NodalField, q: float, h: CellField) -> float:
    """Derivative of the principal eigenvalue along a cell density direction.

    Evaluates (integral of |grad phi1|^q h) / (integral of b |phi1|^q) with
    cell quadrature for the numerator and lumped quadrature for the
    denominator.  With h equal to the density itself this returns lambda1
    exactly (Euler identity for a 1-homogeneous eigenvalue).
    """
    q = _check_q(q)
    if not isinstance(h, CellField) or h.grid is not grid:
        raise FieldMismatchError("h must be a CellField on this grid")
    if not isinstance(b, NodalField) or b.grid is not grid:
        raise FieldMismatchError("b must be a NodalField on this grid")
    phi_vals = pair.phi1.values
    if pair.phi1.grid is not grid:
        raise FieldMismatchError("eigenpair does not belong to this grid")
    _, mags = _cell_gradient_raw(grid, phi_vals)
    denom = _b_norm_q_raw(grid, b.values, phi_vals, q)
    if denom <= 0.0:
        raise DegenerateDenominatorError("b-weighted norm of phi1 must be positive")
    return float(np.dot(grid.cell_measures, mags**q * h.values)) / denom
