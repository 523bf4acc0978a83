"""Command line front-end: configuration, execution, serialization.

Subcommands: ``eig`` (principal eigenpair), ``inverse`` (closest-density
solve), ``solve-pq`` (existence verdict plus certified solution of the
two-exponent problem), ``probe`` (property probe suites).  Configuration is
a JSON file; outputs are CSV and JSON (plus optional SVG plots), written
with 17 significant digits so reruns with the same config and seed are
byte-identical.  Exit codes: 0 success, 1 configuration error, 2
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .eigensolver import EigSolverConfig, principal_eigenpair
from .errors import ConfigError, ConvergenceError, ExpressionError, QplapError
from .expressions import evaluate_expression
from .grid import CellField, Grid, NodalField, interval_grid, rectangle_grid
from .inverse import InverseConfig, SolveStatus, solve_inverse
from .oracles import (
    ProbeReport,
    concavity_probe,
    log_uniform_density,
    picone_probe,
    stability_sweep,
    upper_semicontinuity_probe,
)
from .pqsolve import Verdict, construct_solution, existence_verdict

PROBE_NAMES = ("concavity", "semicontinuity", "picone", "stability-lambda", "stability-prior")


@dataclass
class RunConfig:
    dimension: int
    endpoints: tuple[float, float]        # 1D
    cells: int                            # 1D
    extents: tuple[float, float]          # 2D
    nodes: tuple[int, int]                # 2D
    q: float
    alpha: float
    b_spec: str
    rho_bar_spec: str
    lambda_target: float | None
    seed: int
    plots: bool
    output_dir: str
    eig: EigSolverConfig
    inverse: InverseConfig
    probe_samples: int

    @property
    def p(self) -> float:
        return self.q * self.alpha / (self.alpha - 1.0)


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"config error at {path}: {message}")


def _get(mapping: dict, key: str, kinds, path: str, default=None, required: bool = False):
    if key not in mapping:
        _expect(not required, f"{path}.{key}", "missing required entry")
        return default
    value = mapping[key]
    if kinds is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    _expect(isinstance(value, kinds), f"{path}.{key}", f"expected {kinds}, got {type(value).__name__}")
    return value


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a run configuration from a JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config error at line {err.lineno}, column {err.colno}: {err.msg}") from err
    _expect(isinstance(raw, dict), "$", "top level must be a JSON object")

    dom = _get(raw, "domain", dict, "$", required=True)
    dim = _get(dom, "dimension", int, "domain", required=True)
    _expect(dim in (1, 2), "domain.dimension", "must be 1 or 2")
    endpoints = (0.0, 1.0)
    cells = 0
    extents = (1.0, 1.0)
    nodes = (0, 0)
    if dim == 1:
        ep = _get(dom, "endpoints", list, "domain", default=[0.0, 1.0])
        _expect(len(ep) == 2 and all(isinstance(v, (int, float)) for v in ep), "domain.endpoints", "expected [a, b]")
        endpoints = (float(ep[0]), float(ep[1]))
        _expect(endpoints[1] > endpoints[0], "domain.endpoints", "need b > a")
        cells = _get(dom, "cells", int, "domain", required=True)
        _expect(cells >= 2, "domain.cells", "need at least 2 cells")
    else:
        ex = _get(dom, "extents", list, "domain", default=[1.0, 1.0])
        _expect(len(ex) == 2 and all(isinstance(v, (int, float)) and v > 0 for v in ex), "domain.extents", "expected positive [lx, ly]")
        extents = (float(ex[0]), float(ex[1]))
        nn = _get(dom, "nodes", list, "domain", required=True)
        _expect(len(nn) == 2 and all(isinstance(v, int) and v >= 3 for v in nn), "domain.nodes", "expected [nx, ny] with nx, ny >= 3")
        nodes = (int(nn[0]), int(nn[1]))

    q = _get(raw, "q", float, "$", default=2.0)
    _expect(q >= 2.0, "q", "must be >= 2")
    alpha = _get(raw, "alpha", float, "$", default=2.0)
    _expect(alpha > 1.0, "alpha", "must be > 1")
    b_spec = _get(raw, "b", str, "$", default="1")
    rho_bar_spec = _get(raw, "rho_bar", str, "$", default="1")
    lambda_target = _get(raw, "lambda_target", float, "$", default=None)
    if lambda_target is not None:
        _expect(lambda_target > 0.0, "lambda_target", "must be positive")
    seed = _get(raw, "seed", int, "$", default=0)
    _expect(seed >= 0, "seed", "must be a nonnegative integer")
    plots = _get(raw, "plots", bool, "$", default=False)
    output_dir = _get(raw, "output_dir", str, "$", default="out")

    eig_raw = _get(raw, "eig", dict, "$", default={})
    try:
        eig = EigSolverConfig(
            tol_lambda=_get(eig_raw, "tol_lambda", float, "eig", default=1e-13),
            max_outer=_get(eig_raw, "max_outer", int, "eig", default=1000),
            inner_tol=_get(eig_raw, "inner_tol", float, "eig", default=1e-12),
            inner_max=_get(eig_raw, "inner_max", int, "eig", default=60),
            gradient_floor=_get(eig_raw, "gradient_floor", float, "eig", default=1e-10),
        )
    except QplapError as err:
        raise ConfigError(f"config error at eig: {err}") from err

    inv_raw = _get(raw, "inverse", dict, "$", default={})
    bracket = _get(inv_raw, "mu_bracket", list, "inverse", default=[1e-6, 1.0])
    _expect(
        len(bracket) == 2 and all(isinstance(v, (int, float)) for v in bracket),
        "inverse.mu_bracket", "expected [lo, hi]",
    )
    try:
        inverse = InverseConfig(
            alpha=alpha,
            tol_constraint=_get(inv_raw, "tol_constraint", float, "inverse", default=1e-12),
            tol_fixed_point=_get(inv_raw, "tol_fixed_point", float, "inverse", default=1e-11),
            max_outer=_get(inv_raw, "max_outer", int, "inverse", default=200),
            mu_bracket=(float(bracket[0]), float(bracket[1])),
            fallback=_get(inv_raw, "fallback", bool, "inverse", default=True),
        )
    except QplapError as err:
        raise ConfigError(f"config error at inverse: {err}") from err

    probes_raw = _get(raw, "probes", dict, "$", default={})
    probe_samples = _get(probes_raw, "samples", int, "probes", default=10)
    _expect(probe_samples >= 1, "probes.samples", "must be at least 1")

    return RunConfig(
        dimension=dim, endpoints=endpoints, cells=cells, extents=extents, nodes=nodes,
        q=q, alpha=alpha, b_spec=b_spec, rho_bar_spec=rho_bar_spec,
        lambda_target=lambda_target, seed=seed, plots=plots, output_dir=output_dir,
        eig=eig, inverse=inverse, probe_samples=probe_samples,
    )


def build_grid(cfg: RunConfig) -> Grid:
    if cfg.dimension == 1:
        return interval_grid(cfg.endpoints[0], cfg.endpoints[1], cfg.cells)
    return rectangle_grid(cfg.extents[0], cfg.extents[1], cfg.nodes[0], cfg.nodes[1])


def build_fields(cfg: RunConfig, grid: Grid) -> tuple[CellField, NodalField]:
    """Evaluate the density prior (cell midpoints) and b (nodes) from specs."""
    mids = grid.cell_centroids
    nodes = grid.node_coords
    try:
        if cfg.dimension == 1:
            rho_vals = evaluate_expression(cfg.rho_bar_spec, mids[:, 0])
            b_vals = evaluate_expression(cfg.b_spec, nodes[:, 0])
        else:
            rho_vals = evaluate_expression(cfg.rho_bar_spec, mids[:, 0], mids[:, 1])
            b_vals = evaluate_expression(cfg.b_spec, nodes[:, 0], nodes[:, 1])
    except ExpressionError as err:
        raise ConfigError(f"config error in coefficient spec: {err}") from err
    if np.min(rho_vals) <= 0.0:
        raise ConfigError(
            "config error at rho_bar: density must evaluate positive on all cell midpoints "
            f"(min {np.min(rho_vals):g})"
        )
    return CellField(grid, rho_vals), NodalField(grid, b_vals)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    rows = len(columns[0]) if columns else 0
    for r in range(rows):
        lines.append(",".join(_fmt(col[r]) for col in columns))
    path.write_text("\n".join(lines) + "\n")


def _coord_columns(grid: Grid, coords: np.ndarray) -> tuple[list[str], list[np.ndarray]]:
    if grid.dimension == 1:
        return ["x"], [coords[:, 0]]
    return ["x", "y"], [coords[:, 0], coords[:, 1]]


def _out_dir(cfg: RunConfig, out: str | None) -> Path:
    path = Path(out) if out is not None else Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_eig(cfg: RunConfig, out: str | None = None) -> int:
    """Solve the eigenproblem for the configured density; write eig.json and phi1.csv."""
    grid = build_grid(cfg)
    rho_bar, b = build_fields(cfg, grid)
    out_path = _out_dir(cfg, out)
    converged = True
    try:
        pair = principal_eigenpair(grid, rho_bar, b, cfg.q, cfg.eig)
    except ConvergenceError as err:
        if err.last is None:
            raise
        pair = err.last
        converged = False
    _write_json(out_path / "eig.json", {
        "lambda1": pair.lambda1,
        "iterations": pair.iterations,
        "inner_iterations": pair.inner_iterations,
        "final_increment": pair.final_increment,
        "converged": converged,
        "q": cfg.q,
        "dimension": cfg.dimension,
        "n_nodes": grid.n_nodes,
        "n_cells": grid.n_cells,
        "seed": cfg.seed,
    })
    names, cols = _coord_columns(grid, grid.node_coords)
    _write_csv(out_path / "phi1.csv", names + ["phi1"], cols + [pair.phi1.values])
    return 0 if converged else 2


def _require_lambda(cfg: RunConfig) -> float:
    if cfg.lambda_target is None:
        raise ConfigError("config error at lambda_target: required for this subcommand")
    return cfg.lambda_target


def run_inverse(cfg: RunConfig, out: str | None = None) -> int:
    """Run the inverse solve and serialize its outputs."""
    grid = build_grid(cfg)
    rho_bar, b = build_fields(cfg, grid)
    lam = _require_lambda(cfg)
    out_path = _out_dir(cfg, out)
    sol = solve_inverse(grid, rho_bar, b, lam, cfg.q, cfg.inverse, cfg.eig)

    _write_json(out_path / "inverse.json", {
        "status": sol.status.value,
        "mu": sol.mu,
        "lambda_target": sol.lambda_target,
        "lambda_achieved": sol.lambda_achieved,
        "distance": sol.distance,
        "outer_iterations": sol.outer_iterations,
        "kkt": sol.kkt.as_dict() if sol.kkt is not None else None,
        "q": cfg.q,
        "alpha": cfg.alpha,
        "p": cfg.p,
        "seed": cfg.seed,
    })
    names, cols = _coord_columns(grid, grid.cell_centroids)
    _write_csv(
        out_path / "rho_hat.csv",
        [n + "_mid" for n in names] + ["rho_bar", "rho_hat"],
        cols + [rho_bar.values, sol.rho_hat.values],
    )
    _write_csv(
        out_path / "convergence.csv",
        ["iteration", "rho_increment", "lambda_gap"],
        [
            np.arange(1, len(sol.history) + 1, dtype=float),
            np.array([h[0] for h in sol.history]),
            np.array([h[1] for h in sol.history]),
        ],
    )

    pq = None
    if sol.status is SolveStatus.SOLVED:
        pq = construct_solution(sol, cfg.q, cfg.alpha)
        nnames, ncols = _coord_columns(grid, grid.node_coords)
        _write_csv(out_path / "u_hat.csv", nnames + ["u_hat"], ncols + [pq.u_hat.values])
    elif sol.status is SolveStatus.PRIOR_ALREADY_FEASIBLE:
        print(
            f"target eigenvalue {lam:g} does not exceed lambda1(prior) = "
            f"{sol.lambda_achieved:g}; the boundary value problem has no nonnegative "
            "solution and the prior is already optimal"
        )
    if cfg.plots:
        _write_summary_plot(out_path / "summary.svg", grid, rho_bar, sol, pq)
    return 2 if sol.status is SolveStatus.NOT_CONVERGED else 0


def run_pq(cfg: RunConfig, out: str | None = None) -> int:
    """Existence verdict plus, when a solution exists, its construction and certificate."""
    grid = build_grid(cfg)
    rho_bar, b = build_fields(cfg, grid)
    lam = _require_lambda(cfg)
    out_path = _out_dir(cfg, out)
    verdict = existence_verdict(grid, rho_bar, b, cfg.q, lam, cfg.eig)
    payload = {
        "verdict": verdict.verdict.value,
        "lambda": verdict.lambda_query,
        "lambda1_prior": verdict.lambda1_prior,
        "tolerance_band": verdict.tolerance_band,
        "q": cfg.q,
        "alpha": cfg.alpha,
        "p": cfg.p,
        "seed": cfg.seed,
    }
    if verdict.verdict is Verdict.NO_SOLUTION:
        _write_json(out_path / "pq.json", payload)
        print(
            f"no nonnegative solution: lambda = {lam:g} <= lambda1(prior) = "
            f"{verdict.lambda1_prior:g} (within the tolerance band)"
        )
        return 0
    sol = solve_inverse(grid, rho_bar, b, lam, cfg.q, cfg.inverse, cfg.eig)
    if sol.status is not SolveStatus.SOLVED:
        payload["status"] = sol.status.value
        _write_json(out_path / "pq.json", payload)
        return 2
    pq = construct_solution(sol, cfg.q, cfg.alpha)
    rayleigh_gap = abs(
        (pq.energies.dirichlet_energy + pq.energies.p_energy) / pq.energies.b_norm_q - lam
    )
    payload.update({
        "status": sol.status.value,
        "mu": sol.mu,
        "residual_max": pq.residual_max,
        "verified": pq.verified,
        "dirichlet_energy": pq.energies.dirichlet_energy,
        "p_energy": pq.energies.p_energy,
        "b_norm_q": pq.energies.b_norm_q,
        "rayleigh_identity_gap": rayleigh_gap,
    })
    _write_json(out_path / "pq.json", payload)
    names, cols = _coord_columns(grid, grid.node_coords)
    _write_csv(out_path / "u_hat.csv", names + ["u_hat"], cols + [pq.u_hat.values])
    return 0


def _probe_seeds(seed: int, count: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1)[0]) for c in children]


def _run_one_probe(name: str, cfg: RunConfig, grid: Grid, rho_bar: CellField,
                   b: NodalField, seed: int) -> ProbeReport:
    rng = np.random.default_rng(seed)
    if name == "concavity":
        return concavity_probe(
            grid, b, cfg.q, samples=cfg.probe_samples, eig_cfg=None, seed=seed
        )
    if name == "semicontinuity":
        # Fast-converging sequences keep the finite-tail limsup check sharp.
        deltas = [4.0 ** (-n) for n in range(1, 13)]
        perturb = rng.uniform(-0.5, 0.5, size=grid.n_cells)
        sequence = [CellField(grid, rho_bar.values * (1.0 + d)) for d in deltas]
        sequence += [CellField(grid, rho_bar.values * (1.0 + d * perturb)) for d in deltas]
        return upper_semicontinuity_probe(grid, b, cfg.q, rho_bar, sequence, eig_cfg=cfg.eig)
    if name == "picone":
        worst = -np.inf
        records = []
        for _ in range(cfg.probe_samples):
            rho = log_uniform_density(grid, rng)
            phi = _random_nonneg_field(grid, rng)
            u = _random_nonneg_field(grid, rng)
            l_int, r_int = picone_probe(grid, rho, phi, u, 1e-3, cfg.q)
            scale = abs(l_int) + abs(r_int) + 1.0
            violation = -l_int / scale
            worst = max(worst, violation)
            records.append({"L_integral": l_int, "R_integral": r_int, "violation": violation})
        return ProbeReport(
            name="picone", samples=cfg.probe_samples, worst_violation=worst,
            tolerance=1e-8, passed=worst <= 1e-8, seed=seed, records=tuple(records),
        )
    if name == "stability-lambda":
        lam = _require_lambda(cfg)
        seq = [lam * (1.0 + 2.0 ** (-n)) for n in range(1, 7)]
        report = stability_sweep(
            grid, rho_bar, b, cfg.q, cfg.alpha, lambda_sequence=seq,
            inv_cfg=cfg.inverse, eig_cfg=cfg.eig,
            tol_final=np.inf, name="stability-lambda",
        )
        # Gate on decrease plus a factor-five drop from the first difference.
        diffs = report.extra["rho_diffs"]
        tol_final = 0.2 * diffs[0] if diffs else np.inf
        worst = max(
            max((diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)), default=0.0),
            (diffs[-1] - tol_final) if diffs else 0.0,
            0.0,
        ) if report.failures == 0 else np.inf
        return ProbeReport(
            name="stability-lambda", samples=report.samples, worst_violation=worst,
            tolerance=0.0, passed=worst <= 0.0, seed=seed, failures=report.failures,
            records=report.records, extra=report.extra,
        )
    if name == "stability-prior":
        lam = _require_lambda(cfg)
        perturb = rng.uniform(-0.5, 0.5, size=grid.n_cells)
        priors = [
            CellField(grid, rho_bar.values * (1.0 + 4.0 ** (-n) * perturb))
            for n in range(1, 6)
        ]
        report = stability_sweep(
            grid, rho_bar, b, cfg.q, cfg.alpha, rho_bar_sequence=priors,
            lambda_target=lam, inv_cfg=cfg.inverse, eig_cfg=cfg.eig,
            tol_final=np.inf, name="stability-prior",
        )
        diffs = report.extra["rho_diffs"]
        tol_final = 0.5 * diffs[0] if diffs else np.inf
        worst = max(
            max((diffs[i + 1] - diffs[i] for i in range(len(diffs) - 1)), default=0.0),
            (diffs[-1] - tol_final) if diffs else 0.0,
            0.0,
        ) if report.failures == 0 else np.inf
        return ProbeReport(
            name="stability-prior", samples=report.samples, worst_violation=worst,
            tolerance=0.0, passed=worst <= 0.0, seed=seed, failures=report.failures,
            records=report.records, extra=report.extra,
        )
    raise ConfigError(
        f"unknown probe '{name}'; valid probes: {', '.join(PROBE_NAMES)}"
    )


def _random_nonneg_field(grid: Grid, rng: np.random.Generator) -> NodalField:
    """Smooth random nonnegative Dirichlet field (squared sine combination)."""
    c = grid.node_coords
    if grid.dimension == 1:
        a, bnd = c[0, 0], c[-1, 0]
        s = (c[:, 0] - a) / (bnd - a)
        vals = sum(
            rng.normal() * np.sin(k * np.pi * s) for k in range(1, 5)
        )
    else:
        lx, ly = c[:, 0].max(), c[:, 1].max()
        vals = sum(
            rng.normal() * np.sin(k * np.pi * c[:, 0] / lx) * np.sin(m * np.pi * c[:, 1] / ly)
            for k in range(1, 3)
            for m in range(1, 3)
        )
    return NodalField(grid, np.asarray(vals) ** 2, dirichlet=True)


def run_probes(cfg: RunConfig, probe_names: list[str], out: str | None = None) -> int:
    """Run the requested probes; one JSON per probe plus an aggregate."""
    if not probe_names:
        raise ConfigError(
            f"no probes requested; valid probes: {', '.join(PROBE_NAMES)}"
        )
    for name in probe_names:
        if name not in PROBE_NAMES:
            raise ConfigError(
                f"unknown probe '{name}'; valid probes: {', '.join(PROBE_NAMES)}"
            )
    grid = build_grid(cfg)
    rho_bar, b = build_fields(cfg, grid)
    out_path = _out_dir(cfg, out)
    seeds = _probe_seeds(cfg.seed, len(probe_names))
    reports = []
    for name, seed in zip(probe_names, seeds):
        report = _run_one_probe(name, cfg, grid, rho_bar, b, seed)
        reports.append(report)
        _write_json(out_path / f"{name}.json", report.to_dict())
        print(f"{'PASS' if report.passed else 'FAIL'} probe {name}: "
              f"worst violation {report.worst_violation:.3e} (tolerance {report.tolerance:.3e})")
    all_passed = all(r.passed for r in reports)
    _write_json(out_path / "probes.json", {
        "all_passed": all_passed,
        "seed": cfg.seed,
        "probes": {r.name: {"passed": r.passed, "worst_violation": r.worst_violation} for r in reports},
    })
    return 0 if all_passed else 2


def _write_summary_plot(path: Path, grid: Grid, rho_bar: CellField, sol, pq) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "qplap"
    import matplotlib.pyplot as plt

    if grid.dimension == 1:
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
        mids = grid.cell_centroids[:, 0]
        ax1.plot(mids, rho_bar.values, label="rho_bar", drawstyle="steps-mid")
        ax1.plot(mids, sol.rho_hat.values, label="rho_hat", drawstyle="steps-mid")
        ax1.set_ylabel("density")
        ax1.legend()
        if pq is not None:
            ax2.plot(grid.node_coords[:, 0], pq.u_hat.values, label="u_hat")
        ax2.plot(grid.node_coords[:, 0], sol.eigenpair_at_rho_hat.phi1.values, "--", label="phi1")
        ax2.set_xlabel("x")
        ax2.legend()
    else:
        import matplotlib.tri as mtri
        tri = mtri.Triangulation(
            grid.node_coords[:, 0], grid.node_coords[:, 1], grid.cell_nodes
        )
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        pc = ax1.tripcolor(tri, facecolors=sol.rho_hat.values)
        fig.colorbar(pc, ax=ax1)
        ax1.set_title("rho_hat")
        field = pq.u_hat.values if pq is not None else sol.eigenpair_at_rho_hat.phi1.values
        pc2 = ax2.tripcolor(tri, field, shading="gouraud")
        fig.colorbar(pc2, ax=ax2)
        ax2.set_title("u_hat" if pq is not None else "phi1")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qplap",
        description="Inverse spectral solves for the weighted q-Laplacian and "
        "construction of nonnegative solutions of the associated two-exponent problem.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("eig", "principal eigenpair of the configured density"),
        ("inverse", "closest-density inverse solve for the target eigenvalue"),
        ("solve-pq", "existence verdict and certified solution construction"),
        ("probe", "property probe suite"),
    ):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="path to a JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "probe":
            sp.add_argument(
                "--probes", nargs="*", default=list(PROBE_NAMES),
                help=f"probes to run (default: all of {', '.join(PROBE_NAMES)})",
            )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "eig":
            return run_eig(cfg, args.out)
        if args.command == "inverse":
            return run_inverse(cfg, args.out)
        if args.command == "solve-pq":
            return run_pq(cfg, args.out)
        return run_probes(cfg, list(args.probes), args.out)
    except ConfigError as err:
        print(str(err), file=sys.stderr)
        return 1
    except ConvergenceError as err:
        print(f"solver did not converge: {err}", file=sys.stderr)
        return 2
    except QplapError as err:
        print(str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
