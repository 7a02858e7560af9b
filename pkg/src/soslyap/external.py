"""Adapter to external SDP solvers (via cvxpy) for cross-checking.

The embedded interior-point solver is the default everywhere; this module
exists to validate it.  `solve_external` solves an SdpInstance with an
external conic solver and returns objective/solution in the instance's own
layout; `solve_sdpa_file` round-trips through the SDPA sparse format so
that exported files can be checked end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sdp import (SdpError, export_sdpa, import_sdpa, import_solution,
                  write_solution)


class ExternalSolverError(RuntimeError):
    pass


@dataclass
class ExternalReport:
    status: str
    primal_obj: float = np.nan
    X: list = field(default_factory=list)
    u: np.ndarray = None
    y: np.ndarray = None


def _require_cvxpy():
    try:
        import cvxpy
    except ImportError as err:
        raise ExternalSolverError(
            "external solving needs the optional cvxpy dependency "
            "(pip install cvxpy)") from err
    return cvxpy


def solve_external(instance, solver=None):
    """Solve the instance with an external conic solver.

    Returns an ExternalReport with X blocks, free vector u and duals y in
    the instance's own layout."""
    cp = _require_cvxpy()
    solver = solver or cp.CLARABEL
    Xs = [cp.Variable((blk.size, blk.size), symmetric=True)
          for blk in instance.blocks]
    u = cp.Variable(instance.n_free) if instance.n_free else None
    lhs = sum(instance.A[k] @ cp.vec(Xs[k], order="C")
              for k in range(len(instance.blocks)))
    if u is not None:
        lhs = lhs + instance.B @ u
    constraints = [lhs == instance.b]
    for X in Xs:
        constraints.append(X >> 0)
    objective = sum(cp.trace(instance.C[k] @ Xs[k])
                    for k in range(len(instance.blocks)))
    if u is not None:
        objective = objective + instance.c_free @ u
    problem = cp.Problem(cp.Maximize(objective), constraints)
    try:
        problem.solve(solver=solver)
    except Exception as err:  # cvxpy raises solver-specific types
        raise ExternalSolverError("external solver failed: %s" % err) from err
    status = problem.status
    if status in ("infeasible", "unbounded"):
        return ExternalReport(status=status)
    if status not in ("optimal", "optimal_inaccurate"):
        raise ExternalSolverError("external solver returned status %r"
                                  % status)
    report = ExternalReport(
        status="optimal",
        primal_obj=float(problem.value),
        X=[np.asarray(X.value) for X in Xs],
        u=(np.asarray(u.value) if u is not None else np.zeros(0)),
        y=-np.asarray(constraints[0].dual_value))
    return report


def solve_sdpa_file(dat_path, solution_path, solver=None):
    """Solve an exported .dat-s file externally and write the solution in
    the format understood by sdp.import_solution.

    The exported format splits free variables into a nonnegative
    difference block, so the file is self-contained for any SDP solver."""
    instance = import_sdpa(dat_path)
    report = solve_external(instance, solver=solver)
    if report.status != "optimal":
        raise ExternalSolverError("external solve of %s ended with %s"
                                  % (dat_path, report.status))
    write_solution(solution_path, report.y, report.X)
    return report


def cross_check(instance, scratch_prefix, solver=None):
    """Full round trip: export the instance to .dat-s, solve the file
    externally, import the written solution, and evaluate the objective in
    the instance's own layout.  Returns (objective, X_blocks, u, y)."""
    from .sdp import split_imported_solution
    dat = str(scratch_prefix) + ".dat-s"
    sol = str(scratch_prefix) + ".sol"
    export_sdpa(instance, dat)
    solve_sdpa_file(dat, sol, solver=solver)
    y, Xall = import_solution(sol, instance)
    X_own, u = split_imported_solution(instance, Xall)
    obj = sum(np.tensordot(instance.C[k], X_own[k])
              for k in range(len(instance.blocks)))
    obj += float(instance.c_free @ u) if instance.n_free else 0.0
    return float(obj), X_own, u, y
