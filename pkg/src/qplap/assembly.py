"""Discrete energies, Rayleigh quotients, and weak-form residuals.

Gradient-energy integrals are exact cell quadrature (gradients are constant
per cell); zeroth-order integrals use lumped node weights.  The degenerate
factor |grad u|^(q-2) at cells with vanishing gradient is evaluated as 0 for
q > 2 and as 1 for q = 2; no regularization is applied here, so residuals
stay faithful to the weak form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDenominatorError,
    DegenerateInputError,
    FieldMismatchError,
    ParameterError,
)
from .grid import CellField, Grid, NodalField, _cell_gradient_raw


@dataclass(frozen=True)
class EnergyReport:
    """Energies of a trial field: weighted q-energy, p-energy, weighted q-norm.

    ``rayleigh`` is present only when the weighted norm is positive.
    """

    dirichlet_energy: float
    b_norm_q: float
    p_energy: float | None = None
    rayleigh: float | None = None


def _check_cell_field(grid: Grid, f: CellField, name: str) -> np.ndarray:
    if not isinstance(f, CellField) or f.grid is not grid:
        raise FieldMismatchError(f"{name} must be a CellField on this grid")
    return f.values


def _check_nodal_field(grid: Grid, f: NodalField, name: str, dirichlet: bool = False) -> np.ndarray:
    if not isinstance(f, NodalField) or f.grid is not grid:
        raise FieldMismatchError(f"{name} must be a NodalField on this grid")
    if dirichlet and not f.dirichlet:
        raise ParameterError(f"{name} must be Dirichlet-flagged")
    return f.values


def _check_q(q: float) -> float:
    q = float(q)
    if q < 2.0:
        raise ParameterError(f"q must be >= 2, got {q}")
    return q


def _q_energy_raw(grid: Grid, rho_vals: np.ndarray, u_vals: np.ndarray, q: float) -> float:
    _, mags = _cell_gradient_raw(grid, u_vals)
    return float(np.dot(grid.cell_measures, rho_vals * mags**q))


def _b_norm_q_raw(grid: Grid, b_vals: np.ndarray, u_vals: np.ndarray, q: float) -> float:
    return float(np.dot(grid.node_weights, b_vals * np.abs(u_vals) ** q))


def q_energy(grid: Grid, rho: CellField, u: NodalField, q: float) -> float:
    """Weighted gradient energy, the integral of rho |grad u|^q."""
    q = _check_q(q)
    rho_vals = _check_cell_field(grid, rho, "rho")
    u_vals = _check_nodal_field(grid, u, "u", dirichlet=True)
    return _q_energy_raw(grid, rho_vals, u_vals, q)


def p_energy(grid: Grid, u: NodalField, p: float) -> float:
    """Unweighted gradient energy, the integral of |grad u|^p."""
    p = float(p)
    if p < 2.0:
        raise ParameterError(f"p must be >= 2, got {p}")
    u_vals = _check_nodal_field(grid, u, "u", dirichlet=True)
    _, mags = _cell_gradient_raw(grid, u_vals)
    return float(np.dot(grid.cell_measures, mags**p))


def b_norm_q(grid: Grid, b: NodalField, u: NodalField, q: float) -> float:
    """Weighted norm term, the integral of b |u|^q (lumped quadrature)."""
    q = _check_q(q)
    b_vals = _check_nodal_field(grid, b, "b")
    u_vals = _check_nodal_field(grid, u, "u")
    return _b_norm_q_raw(grid, b_vals, u_vals, q)


def rayleigh_quotient(grid: Grid, rho: CellField, b: NodalField, u: NodalField, q: float) -> float:
    """Quotient of the weighted gradient energy by the b-weighted q-norm.

    Raises DegenerateDenominatorError when the denominator is not positive,
    which signals that ``u`` lies outside the admissible cone.
    """
    denom = b_norm_q(grid, b, u, q)
    if denom <= 0.0:
        raise DegenerateDenominatorError(
            f"b-weighted q-norm must be positive, got {denom}"
        )
    return q_energy(grid, rho, u, q) / denom


def energy_report(
    grid: Grid,
    rho: CellField,
    b: NodalField,
    u: NodalField,
    q: float,
    p: float | None = None,
) -> EnergyReport:
    """Bundle the energies of ``u`` in one report."""
    de = q_energy(grid, rho, u, q)
    bn = b_norm_q(grid, b, u, q)
    pe = p_energy(grid, u, p) if p is not None else None
    ray = de / bn if bn > 0.0 else None
    return EnergyReport(dirichlet_energy=de, b_norm_q=bn, p_energy=pe, rayleigh=ray)


def _scatter_flux(grid: Grid, flux: np.ndarray) -> np.ndarray:
    """Nodal vector of integrals of flux . grad(hat_i), one entry per node."""
    contrib = np.einsum("c,cmd,cd->cm", grid.cell_measures, grid.grad_coeffs, flux)
    out = np.zeros(grid.n_nodes)
    np.add.at(out, grid.cell_nodes, contrib)
    return out


def q_energy_derivative(grid: Grid, rho: CellField, u: NodalField, h: NodalField, q: float) -> float:
    """Directional derivative of the q-energy at ``u`` in direction ``h``.

    Analytic form q * sum over cells of rho |grad u|^(q-2) (grad u, grad h),
    matching central finite differences wherever |grad u| stays away from 0.
    """
    q = _check_q(q)
    rho_vals = _check_cell_field(grid, rho, "rho")
    u_vals = _check_nodal_field(grid, u, "u", dirichlet=True)
    h_vals = _check_nodal_field(grid, h, "h", dirichlet=True)
    gu, nu = _cell_gradient_raw(grid, u_vals)
    gh, _ = _cell_gradient_raw(grid, h_vals)
    dots = np.einsum("cd,cd->c", gu, gh)
    return float(q * np.dot(grid.cell_measures, rho_vals * nu ** (q - 2.0) * dots))


def spectral_residual(
    grid: Grid,
    rho: CellField,
    b: NodalField,
    lam: float,
    phi: NodalField,
    q: float,
) -> tuple[NodalField, float]:
    """Weak residual of the pure spectral equation for a candidate eigenpair.

    Tests the weighted q-Laplacian balance against every interior hat
    function, normalized by the q-energy of ``phi``.  Returns the residual
    field (zero on the boundary) and its interior max norm.
    """
    q = _check_q(q)
    rho_vals = _check_cell_field(grid, rho, "rho")
    b_vals = _check_nodal_field(grid, b, "b")
    phi_vals = _check_nodal_field(grid, phi, "phi", dirichlet=True)
    if np.max(np.abs(phi_vals)) == 0.0:
        raise DegenerateInputError("phi must be nonzero")
    gu, nu = _cell_gradient_raw(grid, phi_vals)
    flux = (rho_vals * nu ** (q - 2.0))[:, None] * gu
    res = _scatter_flux(grid, flux)
    res -= lam * grid.node_weights * b_vals * np.abs(phi_vals) ** (q - 2.0) * phi_vals
    res[grid.boundary_mask] = 0.0
    scale = _q_energy_raw(grid, rho_vals, phi_vals, q)
    res /= scale
    return NodalField(grid, res, dirichlet=True), float(np.max(np.abs(res)))


def pq_weak_residual(
    grid: Grid,
    rho_bar: CellField,
    b: NodalField,
    lam: float,
    u: NodalField,
    q: float,
    p: float,
) -> tuple[NodalField, float]:
    """Weak residual of the two-exponent problem tested on all interior hats.

    residual_i = integral of rho_bar |grad u|^(q-2) (grad u, grad hat_i)
               + integral of |grad u|^(p-2) (grad u, grad hat_i)
               - lam * integral of b |u|^(q-2) u hat_i,
    normalized by the total gradient energy (weighted q-energy plus
    p-energy) so tolerances are scale and grid comparable.  Returns the
    residual field (zero at boundary nodes) and its interior max norm.
    """
    q = _check_q(q)
    p = float(p)
    if p <= q:
        raise ParameterError(f"p must exceed q, got p={p}, q={q}")
    rho_vals = _check_cell_field(grid, rho_bar, "rho_bar")
    b_vals = _check_nodal_field(grid, b, "b")
    u_vals = _check_nodal_field(grid, u, "u", dirichlet=True)
    if np.max(np.abs(u_vals)) == 0.0:
        raise DegenerateInputError("weak solutions are nonzero; u must not vanish identically")

    gu, nu = _cell_gradient_raw(grid, u_vals)
    coef = rho_vals * nu ** (q - 2.0) + nu ** (p - 2.0)
    res = _scatter_flux(grid, coef[:, None] * gu)
    res -= lam * grid.node_weights * b_vals * np.abs(u_vals) ** (q - 2.0) * u_vals
    res[grid.boundary_mask] = 0.0
    scale = _q_energy_raw(grid, rho_vals, u_vals, q) + float(
        np.dot(grid.cell_measures, nu**p)
    )
    res /= scale
    return NodalField(grid, res, dirichlet=True), float(np.max(np.abs(res)))
