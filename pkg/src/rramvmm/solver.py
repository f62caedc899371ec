"""Nodal analysis of a selector-free crossbar during a row read.

Circuit conventions
-------------------
* Column ``c`` is driven by an ideal source at ``V_c``.
* The sensed row is held at 0 V by the TIA (virtual ground).
* Every other row is either floating (unknown voltage, zero net current) or
  grounded (held at 0 V, like a second TIA).
* Cell ``(r, c)`` is a linear conductance between row ``r`` and column ``c``.

With line resistance, each line becomes a chain of junction nodes. Column
drivers attach at the row-0 end of each column line and row terminations
(TIA or ground) at the column-0 end of each row line, each through one
extra segment.

Conductances are taken from ``xbar.conductance()`` (siemens); ``xbar`` only
needs ``rows``, ``cols``, ``conductance()`` and ``line_resistance``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ParameterError, SingularNetworkError

KCL_RTOL = 1e-9


@dataclass(frozen=True)
class ReadBoundaryConditions:
    driven_column_voltages: np.ndarray
    sensed_row: int
    nonsensed_row_policy: str = "floating"

    def __post_init__(self):
        object.__setattr__(
            self, "driven_column_voltages", np.asarray(self.driven_column_voltages, dtype=float)
        )
        if self.nonsensed_row_policy not in ("floating", "grounded"):
            raise ParameterError(f"unknown row policy {self.nonsensed_row_policy!r}")

    @property
    def floating(self):
        return self.nonsensed_row_policy == "floating"


@dataclass(frozen=True)
class NodalSolution:
    """Result of a read solve.

    ``row_node_voltages`` holds one voltage per row line (for meshes: the
    voltage at the row's termination-side junction). ``row_junctions`` and
    ``col_junctions`` are only set by the line-resistance solver.
    """

    row_node_voltages: np.ndarray
    sensed_row_current: float
    kcl_residual: float
    max_branch_current: float
    row_junctions: np.ndarray | None = None
    col_junctions: np.ndarray | None = None


def _check(xbar, bc):
    if not 0 <= bc.sensed_row < xbar.rows:
        raise IndexError(f"sensed row {bc.sensed_row} outside crossbar with {xbar.rows} rows")
    if bc.driven_column_voltages.shape != (xbar.cols,):
        raise ParameterError(
            f"expected {xbar.cols} column voltages, got shape {bc.driven_column_voltages.shape}"
        )


def _lu(a):
    try:
        lu = scipy.linalg.lu_factor(a, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SingularNetworkError(str(e)) from e
    if np.any(np.diag(lu[0]) == 0):
        raise SingularNetworkError("nodal conductance matrix is singular")
    return lu


def _floating_rows(xbar, bc):
    if not bc.floating:
        return np.array([], dtype=int)
    return np.array([r for r in range(xbar.rows) if r != bc.sensed_row], dtype=int)


def _finish(solution, floor=0.0):
    tol = max(KCL_RTOL * solution.max_branch_current, floor, np.finfo(float).tiny)
    if solution.kcl_residual > tol:
        raise SingularNetworkError(
            f"KCL residual {solution.kcl_residual:.3g} A exceeds tolerance "
            f"(max branch current {solution.max_branch_current:.3g} A)"
        )
    return solution


def solve_read(xbar, bc):
    """Solve a row read with ideal lines."""
    _check(xbar, bc)
    g = xbar.conductance()
    v_col = bc.driven_column_voltages
    v_row = np.zeros(xbar.rows)
    unknown = _floating_rows(xbar, bc)
    if unknown.size:
        # KCL at floating row r: sum_c g[r,c] (V_c - v_r) = 0
        gu = g[unknown]
        a = np.diag(gu.sum(axis=1))
        b = gu @ v_col
        v_row[unknown] = scipy.linalg.lu_solve(_lu(a), b)
    i_sensed = float(g[bc.sensed_row] @ v_col)
    branch = g * (v_col[None, :] - v_row[:, None])
    sol = NodalSolution(
        v_row,
        i_sensed,
        0.0,
        float(np.max(np.abs(branch))),
    )
    return _finish(_with_residual(xbar, bc, sol))


def _with_residual(xbar, bc, sol):
    res = kcl_residual_check(xbar, bc, sol)
    return NodalSolution(
        sol.row_node_voltages,
        sol.sensed_row_current,
        res,
        sol.max_branch_current,
        sol.row_junctions,
        sol.col_junctions,
    )


def kcl_residual_check(xbar, bc, solution):
    """Largest net current (A) into any unknown node of ``solution``."""
    g = xbar.conductance()
    if solution.row_junctions is not None:
        a, bmat, _ = _mesh_system(xbar, bc)
        x = np.concatenate([solution.row_junctions.ravel(), solution.col_junctions.ravel()])
        r = a @ x - bmat @ bc.driven_column_voltages
        return float(np.max(np.abs(r))) if r.size else 0.0
    unknown = _floating_rows(xbar, bc)
    if not unknown.size:
        return 0.0
    v_col = bc.driven_column_voltages
    v = solution.row_node_voltages[unknown]
    net = (g[unknown] * (v_col[None, :] - v[:, None])).sum(axis=1)
    return float(np.max(np.abs(net)))


def _mesh_system(xbar, bc):
    """Assemble ``A x = B V`` for the junction mesh.

    Unknowns are row junctions (r, c) at index ``r*C + c`` followed by column
    junctions at ``R*C + r*C + c``. Returns ``(A, B, gw)``.
    """
    rows, cols = xbar.rows, xbar.cols
    gw = 1.0 / xbar.line_resistance
    g = xbar.conductance()
    n = 2 * rows * cols
    a = np.zeros((n, n))
    bmat = np.zeros((n, cols))

    def rj(r, c):
        return r * cols + c

    def cj(r, c):
        return rows * cols + r * cols + c

    def link(i, j, y):
        a[i, i] += y
        a[j, j] += y
        a[i, j] -= y
        a[j, i] -= y

    for r in range(rows):
        for c in range(cols):
            link(rj(r, c), cj(r, c), g[r, c])
            if c + 1 < cols:
                link(rj(r, c), rj(r, c + 1), gw)
            if r + 1 < rows:
                link(cj(r, c), cj(r + 1, c), gw)
    for c in range(cols):
        a[cj(0, c), cj(0, c)] += gw
        bmat[cj(0, c), c] = gw
    for r in range(rows):
        if r == bc.sensed_row or not bc.floating:
            a[rj(r, 0), rj(r, 0)] += gw
    return a, bmat, gw


def solve_read_with_line_resistance(xbar, bc):
    """Solve a row read including wire resistance between junctions.

    With ``line_resistance == 0`` this is :func:`solve_read`.
    """
    _check(xbar, bc)
    if xbar.line_resistance < 0 or not np.isfinite(xbar.line_resistance):
        raise ParameterError("line_resistance must be finite and >= 0")
    if xbar.line_resistance == 0:
        return solve_read(xbar, bc)
    rows, cols = xbar.rows, xbar.cols
    a, bmat, gw = _mesh_system(xbar, bc)
    x = scipy.linalg.lu_solve(_lu(a), bmat @ bc.driven_column_voltages)
    vr = x[: rows * cols].reshape(rows, cols)
    vc = x[rows * cols :].reshape(rows, cols)
    g = xbar.conductance()
    v_col = bc.driven_column_voltages
    branches = [
        (g * (vc - vr)).ravel(),
        gw * (vr[:, :-1] - vr[:, 1:]).ravel(),
        gw * (vc[:-1, :] - vc[1:, :]).ravel(),
        gw * (v_col - vc[0]),
    ]
    sol = NodalSolution(
        vr[:, 0].copy(),
        float(gw * vr[bc.sensed_row, 0]),
        0.0,
        float(max(np.max(np.abs(b)) if b.size else 0.0 for b in branches)),
        vr,
        vc,
    )
    # residual cannot be resolved below the rounding floor of A @ x
    floor = 64 * np.finfo(float).eps * np.max(np.abs(a).sum(axis=1)) * np.max(np.abs(x))
    return _finish(_with_residual(xbar, bc, sol), floor)


def transfer_vector(xbar, sensed_row, policy="floating"):
    """Per-column transconductance (S) of a row read.

    The read network is linear, so for any column drive ``V`` the sensed
    current equals ``transfer_vector(...) @ V``. One factorization serves all
    drive patterns of a row.
    """
    bc = ReadBoundaryConditions(np.zeros(xbar.cols), sensed_row, policy)
    _check(xbar, bc)
    if xbar.line_resistance == 0:
        return xbar.conductance()[sensed_row].copy()
    a, bmat, gw = _mesh_system(xbar, bc)
    x = scipy.linalg.lu_solve(_lu(a), bmat)
    return gw * x[sensed_row * xbar.cols]
