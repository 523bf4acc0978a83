"""Inverse spectral optimization for the weighted q-Laplacian.

Given a positive prior density and a target principal eigenvalue, the
library finds the closest admissible density attaining that eigenvalue and
constructs from it the unique nonnegative solution of the associated
two-exponent (weighted q-Laplacian plus p-Laplacian) boundary value problem.
"""

from .assembly import (
    EnergyReport,
    b_norm_q,
    energy_report,
    p_energy,
    pq_weak_residual,
    q_energy,
    q_energy_derivative,
    rayleigh_quotient,
    spectral_residual,
)
from .eigensolver import EigenPair, EigSolverConfig, eigenvalue_derivative, principal_eigenpair
from .errors import (
    AdmissibilityError,
    ConfigError,
    ConvergenceError,
    DegenerateDenominatorError,
    DegenerateInputError,
    ExpressionError,
    FieldMismatchError,
    NoSolutionError,
    ParameterError,
    PreconditionError,
    QplapError,
)
from .grid import (
    CellField,
    Grid,
    NodalField,
    cell_field_from_callable,
    cell_gradient,
    constant_cell_field,
    constant_nodal_field,
    integrate_nodal,
    interval_grid,
    interval_grid_from_nodes,
    nodal_field_from_callable,
    rectangle_grid,
)
from .inverse import (
    InverseConfig,
    InverseSolution,
    KKTReport,
    SolveStatus,
    alpha_norm,
    kkt_report,
    scale_to_feasible,
    solve_inverse,
)
from .oracles import (
    ProbeReport,
    concavity_probe,
    log_uniform_density,
    picone_probe,
    stability_sweep,
    upper_semicontinuity_probe,
)
from .pqsolve import (
    ExistenceVerdict,
    PQSolution,
    Verdict,
    construct_solution,
    existence_verdict,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "CellField",
    "ConfigError",
    "ConvergenceError",
    "DegenerateDenominatorError",
    "DegenerateInputError",
    "EigenPair",
    "EigSolverConfig",
    "EnergyReport",
    "ExistenceVerdict",
    "ExpressionError",
    "FieldMismatchError",
    "Grid",
    "InverseConfig",
    "InverseSolution",
    "KKTReport",
    "NoSolutionError",
    "NodalField",
    "PQSolution",
    "ParameterError",
    "PreconditionError",
    "ProbeReport",
    "QplapError",
    "SolveStatus",
    "Verdict",
    "alpha_norm",
    "b_norm_q",
    "cell_field_from_callable",
    "cell_gradient",
    "concavity_probe",
    "constant_cell_field",
    "constant_nodal_field",
    "construct_solution",
    "eigenvalue_derivative",
    "energy_report",
    "existence_verdict",
    "integrate_nodal",
    "interval_grid",
    "interval_grid_from_nodes",
    "kkt_report",
    "log_uniform_density",
    "nodal_field_from_callable",
    "p_energy",
    "picone_probe",
    "pq_weak_residual",
    "principal_eigenpair",
    "q_energy",
    "q_energy_derivative",
    "rayleigh_quotient",
    "rectangle_grid",
    "scale_to_feasible",
    "solve_inverse",
    "spectral_residual",
    "stability_sweep",
    "upper_semicontinuity_probe",
]
