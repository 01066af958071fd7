"""Exact reference solver by vertex enumeration, plus empirical gap probing.

Every vertex of {x : Ax <= b, x >= 0} makes n of the m+n inequality
constraints tight, so small instances are solved exactly by enumerating
all n-subsets, keeping the feasible solutions, and maximizing c.x.
Unboundedness is detected from edge rays.  Used as the independent
ground truth for the iterative solver and the termination machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .ipm import SolverOptions, solve
from .lp import LinearProgram, PrimalDualPoint, SolveStatus
from .termination import SupportPair, candidate_supports, geometric_quantities

__all__ = [
    "OracleResult",
    "DeltaProbeResult",
    "EnumerationBudgetError",
    "CertifiedBoundViolationError",
    "brute_force_solve",
    "delta_probe",
    "probe_interior_point",
    "MAX_ORACLE_N",
    "MAX_ORACLE_M",
]

MAX_ORACLE_N = 8
MAX_ORACLE_M = 16

_RAY_TOL = 1e-9


class EnumerationBudgetError(Exception):
    """Instance exceeds the vertex-enumeration budget (n <= 8, m <= 16)."""


class CertifiedBoundViolationError(RuntimeError):
    """A probe below the certified gap threshold misidentified the supports."""


@dataclass(frozen=True)
class OracleResult:
    """Exact solve outcome.

    ``unique`` certifies a strictly optimal, nondegenerate solution: no
    objective tie with a second vertex, exactly n tight constraints,
    strictly positive supports and strictly slack non-supports on both
    sides.  ``tight_count`` counts tight primal constraints at the optimum.
    """

    status: SolveStatus
    point: PrimalDualPoint | None
    supports: SupportPair | None
    unique: bool
    tight_count: int


@dataclass(frozen=True)
class DeltaProbeResult:
    min_failing_gap: float | None
    max_succeeding_gap: float
    certified_lb: float


@lru_cache(maxsize=None)
def _subsets(total: int, size: int) -> np.ndarray:
    return np.array(list(combinations(range(total), size)), dtype=int)


def _enumerate_vertices(lp: LinearProgram):
    """All feasible vertices with their tight constraint subsets.

    Constraints are indexed 0..n-1 for x_i >= 0 and n..n+m-1 for
    A_j x <= b_j.  Returns (vertices, subsets, normal matrices) where
    normals are oriented so feasibility reads g.x >= h.
    """
    m, n = lp.m, lp.n
    G = np.vstack([np.eye(n), -lp.A])
    h = np.concatenate([np.zeros(n), -lp.b])
    subsets = _subsets(m + n, n)
    mats = G[subsets]
    rhs = h[subsets]

    row_norms = np.linalg.norm(mats, axis=2)
    hadamard = np.prod(row_norms, axis=1)
    dets = np.linalg.det(mats)
    solvable = np.abs(dets) > 1e-10 * np.maximum(hadamard, 1e-300)

    verts = np.full((len(subsets), n), np.nan)
    if np.any(solvable):
        verts[solvable] = np.linalg.solve(mats[solvable], rhs[solvable][..., None])[..., 0]
    residual_ok = np.zeros(len(subsets), dtype=bool)
    residual_ok[solvable] = np.max(
        np.abs(np.einsum("kij,kj->ki", mats[solvable], verts[solvable]) - rhs[solvable]),
        axis=1,
    ) <= 1e-8 * (1.0 + np.max(np.abs(rhs[solvable]), axis=1))

    tol = 1e-9 * (1.0 + np.linalg.norm(lp.b))
    feasible = residual_ok.copy()
    idx = np.flatnonzero(residual_ok)
    if idx.size:
        V = verts[idx]
        ok = (V.min(axis=1) >= -tol) & ((lp.b - V @ lp.A.T).min(axis=1) >= -tol)
        feasible[idx] = ok
    keep = np.flatnonzero(feasible)
    return verts[keep], subsets[keep], mats[keep]


def _has_unbounded_ray(lp: LinearProgram, mats: np.ndarray) -> bool:
    """Scan edge directions of feasible vertices for an improving recession ray."""
    for M in mats:
        try:
            Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            continue
        for col in range(M.shape[0]):
            d = Minv[:, col]
            norm = np.linalg.norm(d)
            if norm == 0 or not np.all(np.isfinite(d)):
                continue
            d = d / norm
            if (
                np.all(lp.A @ d <= _RAY_TOL)
                and np.all(d >= -_RAY_TOL)
                and float(lp.c @ d) > _RAY_TOL
            ):
                return True
    return False


def brute_force_solve(lp: LinearProgram) -> OracleResult:
    """Exact status and optimal pair by full vertex enumeration.

    Raises EnumerationBudgetError beyond n=8 or m=16.  The dual optimum is
    reconstructed from y_V A_{V,U} = c_U on the winning supports.
    """
    if lp.n > MAX_ORACLE_N or lp.m > MAX_ORACLE_M:
        raise EnumerationBudgetError(
            f"instance {lp.m}x{lp.n} exceeds enumeration budget "
            f"{MAX_ORACLE_M}x{MAX_ORACLE_N}"
        )
    verts, subsets, mats = _enumerate_vertices(lp)
    if len(verts) == 0:
        return OracleResult(SolveStatus.INFEASIBLE, None, None, False, 0)
    if _has_unbounded_ray(lp, mats):
        return OracleResult(SolveStatus.UNBOUNDED, None, None, False, 0)

    values = verts @ lp.c
    best = int(np.argmax(values))
    x_star = verts[best]
    best_value = float(values[best])

    value_tol = 1e-9 * (1.0 + abs(best_value))
    point_tol = 1e-7 * (1.0 + np.linalg.norm(x_star))
    tied = np.flatnonzero(values >= best_value - value_tol)
    distinct_tie = any(
        np.linalg.norm(verts[t] - x_star) > point_tol for t in tied if t != best
    )

    slack = lp.b - lp.A @ x_star
    tau = 1e-9 * (1.0 + np.linalg.norm(lp.b) + np.linalg.norm(x_star))
    coord_tight = x_star <= tau
    row_tight = slack <= tau
    tight_count = int(np.sum(coord_tight) + np.sum(row_tight))

    # Values inside (tau, 10 tau) are neither clearly tight nor clearly
    # positive; such borderline geometry voids the uniqueness certificate.
    ambiguous = bool(
        np.any((x_star > tau) & (x_star <= 10 * tau))
        or np.any((slack > tau) & (slack <= 10 * tau))
    )

    U = tuple(int(i) for i in np.flatnonzero(~coord_tight))
    V = tuple(int(j) for j in np.flatnonzero(row_tight))
    supports = SupportPair(U=U, V=V)

    y_star = np.zeros(lp.m)
    dual_ok = True
    if len(U) == len(V) and len(U) > 0:
        block = lp.A[np.ix_(list(V), list(U))]
        try:
            y_star[list(V)] = np.linalg.solve(block.T, lp.c[list(U)])
        except np.linalg.LinAlgError:
            dual_ok = False
    elif len(U) != len(V):
        dual_ok = False

    tau_d = 1e-9 * (1.0 + np.linalg.norm(lp.c) + np.linalg.norm(y_star))
    dual_slack = y_star @ lp.A - lp.c
    if dual_ok:
        dual_ok = bool(np.min(y_star) >= -tau_d and np.min(dual_slack) >= -tau_d)

    not_U = np.setdiff1d(np.arange(lp.n), np.array(U, dtype=int))
    strict = (
        dual_ok
        and not distinct_tie
        and not ambiguous
        and tight_count == lp.n
        and (len(V) == 0 or float(np.min(y_star[list(V)])) > 10 * tau_d)
        and (not_U.size == 0 or float(np.min(dual_slack[not_U])) > 10 * tau_d)
    )
    point = PrimalDualPoint(x=x_star, y=y_star)
    return OracleResult(SolveStatus.OPTIMAL, point, supports, bool(strict), tight_count)


def _vertex_centroid(lp: LinearProgram) -> np.ndarray | None:
    verts, _, _ = _enumerate_vertices(lp)
    if len(verts) < 2:
        return None
    centroid = verts.mean(axis=0)
    if np.min(centroid) > 0 and np.min(lp.b - lp.A @ centroid) > 0:
        return centroid
    return None


def probe_interior_point(lp: LinearProgram, res=None) -> np.ndarray | None:
    """Strictly feasible point for gap-scale probing.

    Prefers the last strictly interior iterate of the given (or a fresh)
    solve; an early exact exit may predate any such iterate, in which case
    a full run without termination attempts, then the feasible-vertex
    centroid, are tried.
    """
    if res is None:
        res = solve(lp, SolverOptions())
    if res.interior_point is not None:
        return res.interior_point.x
    full = solve(lp, SolverOptions(attempt_termination=False))
    if full.interior_point is not None:
        return full.interior_point.x
    if lp.n <= MAX_ORACLE_N and lp.m <= MAX_ORACLE_M:
        return _vertex_centroid(lp)
    return None


def delta_probe(
    lp: LinearProgram,
    oracle: OracleResult,
    num_probes: int,
    rng_seed: int,
    interior: np.ndarray | None = None,
) -> DeltaProbeResult:
    """Bracket the support-identification threshold with feasible probes.

    Probes are convex combinations (1-t) x* + t x_int for t log-uniform in
    [1e-8, 1], where x_int is the solver's last strictly interior iterate
    (feasible by convexity).  Records the smallest optimality gap at which
    the support guess fails and the largest at which it succeeds, and
    raises CertifiedBoundViolationError if any failure occurs below the
    certified threshold.
    """
    if oracle.status is not SolveStatus.OPTIMAL or not oracle.unique:
        raise ValueError("delta_probe requires a unique optimal oracle result")
    certified = geometric_quantities(lp, oracle.point, oracle.supports).delta_lb
    if num_probes == 0:
        return DeltaProbeResult(None, 0.0, certified)

    x_star = oracle.point.x
    x_int = interior if interior is not None else probe_interior_point(lp)
    if x_int is None:
        x_int = x_star

    rng = np.random.default_rng(rng_seed)
    ts = 10.0 ** rng.uniform(-8.0, 0.0, size=num_probes)
    min_failing: float | None = None
    max_succeeding = 0.0
    for t in ts:
        probe = (1.0 - t) * x_star + t * x_int
        gap = float(lp.c @ x_star - lp.c @ probe)
        if candidate_supports(lp, probe) == oracle.supports:
            max_succeeding = max(max_succeeding, gap)
        elif min_failing is None or gap < min_failing:
            min_failing = gap
    if min_failing is not None and min_failing < certified - 1e-10:
        raise CertifiedBoundViolationError(
            f"support guess failed at gap {min_failing:.6e} below the "
            f"certified threshold {certified:.6e}"
        )
    return DeltaProbeResult(min_failing, max_succeeding, certified)
