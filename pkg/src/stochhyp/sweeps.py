"""Convergence studies: chaos-order refinement and mesh refinement.

Sweep points are independent solves, so they may be dispatched to a thread
pool; results are always collected in input order to keep output files
deterministic regardless of scheduling.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convection import ConvectionGrid, InterfaceCoefficient, run_convection
from .errors import ConfigurationError
from .gpc import gauss_rule
from .metrics import MomentField, error_quadrature_size, h_norm, l1_norm

__all__ = [
    "GpcSweepRow",
    "MeshSweepRow",
    "gpc_error_sweep",
    "mesh_error_sweep",
]


@dataclass(frozen=True)
class GpcSweepRow:
    """Errors of one chaos order against the high-order reference."""

    k: int
    l1_expectation: float
    l1_variance: float
    l1_coeff: float
    h_distance: float
    wall_time: float


@dataclass(frozen=True)
class MeshSweepRow:
    """Errors of one mesh width against the analytic solution."""

    dx: float
    dt: float
    l1_expectation: float
    l1_variance: float
    l1_total: float
    h_distance: float
    wall_time: float


def _map_ordered(func, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def gpc_error_sweep(
    solve,
    k_list,
    k_ref: int,
    cell_measure: float,
    threads: int = 1,
) -> list[GpcSweepRow]:
    """Error of solve(k) against solve(k_ref) for each k in k_list.

    `solve` returns a coefficient array with modes on the last axis; any
    leading cell layout works.  Lower-order fields are zero-padded to the
    reference mode count, and errors are reported on the expectation, the
    variance, the padded coefficients, and the mixed norm.
    """
    k_list = [int(k) for k in k_list]
    problems = []
    if not k_list:
        problems.append("the chaos-order list must not be empty")
    elif min(k_list) < 0:
        problems.append("chaos orders must be >= 0")
    elif k_ref < max(k_list):
        problems.append("the reference order must be >= every swept order")
    if threads < 1:
        problems.append("threads must be >= 1")
    if problems:
        raise ConfigurationError(problems)

    reference = np.asarray(solve(k_ref), dtype=float)
    ref_moments = MomentField.from_coeffs(reference)
    rule = gauss_rule(error_quadrature_size(k_ref))

    def one(k: int) -> GpcSweepRow:
        started = time.perf_counter()
        field = np.asarray(solve(k), dtype=float)
        elapsed = time.perf_counter() - started
        padded = np.zeros_like(reference)
        padded[..., : k + 1] = field
        diff = padded - reference
        moments = MomentField.from_coeffs(field)
        return GpcSweepRow(
            k=k,
            l1_expectation=l1_norm(
                moments.expectation - ref_moments.expectation, cell_measure
            ),
            l1_variance=l1_norm(moments.variance - ref_moments.variance, cell_measure),
            l1_coeff=l1_norm(diff, cell_measure),
            h_distance=h_norm(diff, cell_measure, rule),
            wall_time=elapsed,
        )

    return _map_ordered(one, k_list, threads)


def mesh_error_sweep(
    coef: InterfaceCoefficient,
    a: float,
    b: float,
    dx_list,
    dt_ratio: float,
    k: int,
    t_final: float,
    order: int = 1,
    profile: str = "cos_bump",
    kind: str = "arctan",
    threads: int = 1,
) -> list[MeshSweepRow]:
    """Error against the analytic solution on a family of meshes, dt = dt_ratio*dx."""
    dx_list = [float(dx) for dx in dx_list]
    problems = []
    if not dx_list:
        problems.append("the mesh-width list must not be empty")
    elif min(dx_list) <= 0.0:
        problems.append("mesh widths must be positive")
    if dt_ratio <= 0.0:
        problems.append("the time-step ratio must be positive")
    if threads < 1:
        problems.append("threads must be >= 1")
    if problems:
        raise ConfigurationError(problems)

    def one(dx: float) -> MeshSweepRow:
        grid = ConvectionGrid.from_spacing(a, b, dx, dt_ratio * dx)
        run = run_convection(
            coef, grid, k, t_final, order=order, profile=profile, kind=kind
        )
        report = run.report
        return MeshSweepRow(
            dx=grid.dx,
            dt=grid.dt,
            l1_expectation=report.l1_expectation,
            l1_variance=report.l1_variance,
            l1_total=report.l1,
            h_distance=report.h_norm,
            wall_time=run.diagnostics["wall_time"],
        )

    return _map_ordered(one, dx_list, threads)
