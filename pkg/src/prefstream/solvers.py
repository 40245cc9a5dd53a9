"""Small dense solvers behind the pruning tests.

Three entry points:

- nnls: nonnegative least squares min ||b - M a||, a >= 0.
- convex_cone_ls: least squares over a convex combination of one column
  block plus a nonnegative combination of another.
- lin_feasible: existence of u with A u >= rhs.

All of them are deterministic, fail closed (anything but an Optimal /
Feasible / Infeasible verdict must be treated by callers as "do not
prune"), and share one iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

ITERATION_CAP = 4000
STATIONARITY_TOL = 1e-8
FEASIBILITY_TOL = 1e-9
PRUNE_SLACK = 1e-7


class SolveStatus(Enum):
    Optimal = "optimal"
    IterationCap = "iteration_cap"
    Degenerate = "degenerate"


class FeasStatus(Enum):
    Feasible = "feasible"
    Infeasible = "infeasible"
    IterationCap = "iteration_cap"


@dataclass
class SolveReport:
    status: SolveStatus
    coefficients: np.ndarray
    residual_norm: float
    iterations: int


@dataclass
class FeasReport:
    status: FeasStatus
    witness: np.ndarray | None = None


def _ls_solve(Mp: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Normal equations are fine at these sizes; fall back to lstsq when the
    # passive columns are close to dependent.
    G = Mp.T @ Mp
    rhs = Mp.T @ b
    try:
        z = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        z = np.linalg.lstsq(Mp, b, rcond=None)[0]
    if not np.all(np.isfinite(z)):
        z = np.linalg.lstsq(Mp, b, rcond=None)[0]
    return z


def nnls(
    columns: np.ndarray,
    target: np.ndarray,
    max_iter: int | None = None,
    stop_below: float | None = None,
) -> SolveReport:
    """Solve min_a ||target - columns @ a||_2 subject to a >= 0.

    Active-set method of Lawson and Hanson: grow a passive (unconstrained)
    column set by the most negative gradient coordinate, solve the
    unrestricted least squares on it, and back off along the segment to the
    previous iterate whenever a passive coefficient would turn negative.
    The objective strictly decreases across outer iterations, so with
    stop_below set the loop may return early once the residual proves the
    minimum is at or below that threshold; the coefficients are then feasible
    but not necessarily stationary, which is sound for prune decisions only.

    Parameters
    ----------
    columns : (d, k) ndarray
    target : (d,) ndarray
    max_iter : iteration cap shared across inner and outer steps.
    stop_below : optional early-exit threshold on the residual norm.

    References
    ----------
    C. Lawson, R. Hanson, "Solving Least Squares Problems", SIAM 1995, ch. 23.
    """
    M = np.asarray(columns, dtype=float)
    b = np.asarray(target, dtype=float)
    if M.ndim != 2 or b.ndim != 1 or M.shape[0] != b.shape[0]:
        raise ValueError("columns must be (d, k) and target (d,)")
    cap = ITERATION_CAP if max_iter is None else int(max_iter)
    d, k = M.shape
    x = np.zeros(k)
    if k == 0:
        return SolveReport(SolveStatus.Optimal, x, float(np.linalg.norm(b)), 0)

    passive = np.zeros(k, dtype=bool)
    resid = b.copy()
    rnorm = float(np.linalg.norm(resid))
    tol_w = STATIONARITY_TOL * max(1.0, float(np.abs(M.T @ b).max()))
    iters = 0
    stall = 0
    while True:
        if stop_below is not None and rnorm <= stop_below:
            return SolveReport(SolveStatus.Optimal, x, rnorm, iters)
        w = M.T @ resid
        w[passive] = -np.inf
        j = int(np.argmax(w))
        if not np.isfinite(w[j]) or w[j] <= tol_w:
            return SolveReport(SolveStatus.Optimal, x, rnorm, iters)
        passive[j] = True
        while True:
            iters += 1
            if iters > cap:
                return SolveReport(SolveStatus.IterationCap, x, rnorm, iters - 1)
            idx = np.flatnonzero(passive)
            z = _ls_solve(M[:, idx], b)
            if not np.all(np.isfinite(z)):
                return SolveReport(SolveStatus.Degenerate, x, rnorm, iters)
            if np.all(z > 0.0):
                x[:] = 0.0
                x[idx] = z
                break
            xp = x[idx]
            neg = z <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = xp[neg] / (xp[neg] - z[neg])
            alpha = float(np.min(steps)) if steps.size else 0.0
            xp = xp + alpha * (z - xp)
            xp[xp <= 1e-14] = 0.0
            x[:] = 0.0
            x[idx] = xp
            passive = x > 0.0
            if not passive.any():
                break
        idx = np.flatnonzero(passive)
        resid = b - M[:, idx] @ x[idx] if idx.size else b.copy()
        new_rnorm = float(np.linalg.norm(resid))
        if new_rnorm >= rnorm - 1e-14:
            stall += 1
            if stall >= 5:
                return SolveReport(SolveStatus.Degenerate, x, new_rnorm, iters)
        else:
            stall = 0
        rnorm = new_rnorm


def residual_below(columns: np.ndarray, target: np.ndarray, threshold: float) -> bool:
    """Decide min_a>=0 ||target - columns @ a|| <= threshold, fail-closed."""
    rep = nnls(columns, target, stop_below=threshold)
    return rep.status is SolveStatus.Optimal and rep.residual_norm <= threshold


def convex_cone_ls(
    convex_columns: np.ndarray,
    cone_columns: np.ndarray,
    target: np.ndarray,
    max_iter: int | None = None,
    stop_below: float | None = None,
) -> SolveReport:
    """Least squares over {V nu + D beta : nu >= 0, sum(nu) = 1, beta >= 0}.

    Same active-set scheme as nnls with the single equality sum(nu) = 1
    folded into each passive-set solve through its bordered KKT system.
    Interpolation steps stay on the equality hyperplane because both
    endpoints satisfy it, so the simplex constraint holds at every iterate.
    Coefficients are reported as nu followed by beta.
    """
    V = np.asarray(convex_columns, dtype=float)
    D = np.asarray(cone_columns, dtype=float)
    b = np.asarray(target, dtype=float)
    if V.ndim != 2 or V.shape[1] == 0:
        raise ValueError("convex block must contain at least one column")
    if D.size == 0:
        D = np.zeros((V.shape[0], 0))
    if D.ndim != 2 or V.shape[0] != D.shape[0] or b.ndim != 1 or b.shape[0] != V.shape[0]:
        raise ValueError("column blocks and target must share the ambient dimension")
    cap = ITERATION_CAP if max_iter is None else int(max_iter)
    d = V.shape[0]
    m, k = V.shape[1], D.shape[1]
    M = np.hstack([V, D])
    a = np.zeros(m + k)
    a[:m] = 1.0

    # Start from the single best convex column; the passive set always keeps
    # at least one convex coordinate because the nu mass sums to one.
    start = int(np.argmin(np.linalg.norm(V - b[:, None], axis=0)))
    x = np.zeros(m + k)
    x[start] = 1.0
    passive = np.zeros(m + k, dtype=bool)
    passive[start] = True
    resid = b - V[:, start]
    rnorm = float(np.linalg.norm(resid))
    tol_w = STATIONARITY_TOL * max(1.0, float(np.abs(M.T @ b).max()))
    iters = 0
    stall = 0
    # Multiplier of the simplex constraint at the starting vertex.
    lam = float(V[:, start] @ resid)

    def bordered_solve(idx: np.ndarray) -> tuple[np.ndarray, float] | None:
        Mp = M[:, idx]
        ap = a[idx]
        p = idx.size
        K = np.empty((p + 1, p + 1))
        K[:p, :p] = Mp.T @ Mp
        K[:p, p] = ap
        K[p, :p] = ap
        K[p, p] = 0.0
        rhs = np.empty(p + 1)
        rhs[:p] = Mp.T @ b
        rhs[p] = 1.0
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        if not np.all(np.isfinite(sol)):
            return None
        return sol[:p], float(sol[p])

    while True:
        if stop_below is not None and rnorm <= stop_below:
            return SolveReport(SolveStatus.Optimal, x, rnorm, iters)
        w = M.T @ resid
        viol = w - lam * a
        viol[passive] = -np.inf
        j = int(np.argmax(viol))
        if not np.isfinite(viol[j]) or viol[j] <= tol_w:
            return SolveReport(SolveStatus.Optimal, x, rnorm, iters)
        passive[j] = True
        while True:
            iters += 1
            if iters > cap:
                return SolveReport(SolveStatus.IterationCap, x, rnorm, iters - 1)
            idx = np.flatnonzero(passive)
            solved = bordered_solve(idx)
            if solved is None:
                return SolveReport(SolveStatus.Degenerate, x, rnorm, iters)
            z, lam = solved
            if np.all(z > 0.0):
                x[:] = 0.0
                x[idx] = z
                break
            xp = x[idx]
            neg = z <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = xp[neg] / (xp[neg] - z[neg])
            alpha = float(np.min(steps)) if steps.size else 0.0
            xp = xp + alpha * (z - xp)
            xp[xp <= 1e-14] = 0.0
            x[:] = 0.0
            x[idx] = xp
            passive = x > 0.0
            if not passive[:m].any():
                return SolveReport(SolveStatus.Degenerate, x, rnorm, iters)
        idx = np.flatnonzero(passive)
        resid = b - M[:, idx] @ x[idx]
        new_rnorm = float(np.linalg.norm(resid))
        if new_rnorm >= rnorm - 1e-14:
            stall += 1
            if stall >= 5:
                return SolveReport(SolveStatus.Degenerate, x, new_rnorm, iters)
        else:
            stall = 0
        rnorm = new_rnorm


def cone_residual_below(
    convex_columns: np.ndarray,
    cone_columns: np.ndarray,
    target: np.ndarray,
    threshold: float,
) -> bool:
    """Decide the convex_cone_ls optimum is <= threshold, fail-closed."""
    rep = convex_cone_ls(convex_columns, cone_columns, target, stop_below=threshold)
    return rep.status is SolveStatus.Optimal and rep.residual_norm <= threshold


def lin_feasible(
    rows: np.ndarray,
    rhs: np.ndarray | None = None,
    max_iter: int | None = None,
) -> FeasReport:
    """Decide whether some u satisfies rows @ u >= rhs (default rhs = 1).

    Strictness of the underlying open conditions is encoded by the caller
    through the right-hand side: demanding a margin of one unit is scale
    free because u is unconstrained.  Backed by the HiGHS linear solver with
    a zero objective; any verdict other than a clean feasible or infeasible
    is reported as IterationCap so that callers fail closed.
    """
    A = np.asarray(rows, dtype=float)
    if A.size == 0:
        d = A.shape[1] if A.ndim == 2 else 1
        return FeasReport(FeasStatus.Feasible, np.zeros(d))
    if A.ndim != 2:
        raise ValueError("rows must be a 2-d array")
    m, d = A.shape
    r = np.ones(m) if rhs is None else np.asarray(rhs, dtype=float)
    if r.shape != (m,):
        raise ValueError("rhs must have one entry per row")
    cap = ITERATION_CAP if max_iter is None else int(max_iter)
    res = linprog(
        c=np.zeros(d),
        A_ub=-A,
        b_ub=-r,
        bounds=[(None, None)] * d,
        method="highs",
        options={
            "maxiter": cap,
            "presolve": True,
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:
        return FeasReport(FeasStatus.Infeasible)
    if res.status != 0 or res.x is None:
        return FeasReport(FeasStatus.IterationCap)
    witness = np.asarray(res.x, dtype=float)
    slack = A @ witness - r
    if float(slack.min()) < -FEASIBILITY_TOL and np.all(r > 0):
        # With a positive right-hand side a slightly infeasible witness can
        # be repaired by scaling, since margins grow linearly in u.
        prods = A @ witness
        bad = prods < r
        if np.all(prods[bad] > 0):
            t = float(np.max(r[bad] / prods[bad])) * (1.0 + 1e-9)
            scaled = witness * t
            if float((A @ scaled - r).min()) >= -FEASIBILITY_TOL:
                witness = scaled
    return FeasReport(FeasStatus.Feasible, witness)
