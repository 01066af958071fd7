"""Primal-dual path-following solver with periodic exact-termination attempts.

Works on the pair  max c.x, Ax + s = b, x,s >= 0  /  min y.b, A'y - w = c,
y,w >= 0  with infeasible-start Mehrotra predictor-corrector steps.  Every
``termination_period`` iterations (default ceil(sqrt(n))) the current primal
iterate is used to guess the optimal supports; a verified rounding exits
early with the exact solution, a failed attempt is discarded silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, PrimalDualPoint, SolveStatus, validate
from .termination import (
    RoundingFailureError,
    SupportPair,
    candidate_supports,
    round_primal_dual,
    verify_candidate,
)

__all__ = ["SolverOptions", "SolveResult", "solve"]

_FRACTION_TO_BOUNDARY = 0.99
_UNBOUNDED_OBJECTIVE = 1e12
_INFEASIBLE_RESIDUAL = 1e-6
_MU_COLLAPSE = 1e-12
_DIVERGENCE_LIMIT = 1e13


@dataclass(frozen=True)
class SolverOptions:
    gap_tolerance: float = 1e-10
    max_iterations: int = 500
    termination_period: int | None = None  # default ceil(sqrt(n)) at solve time
    attempt_termination: bool = True

    def __post_init__(self):
        if self.gap_tolerance <= 0:
            raise ValueError("gap_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.termination_period is not None and self.termination_period < 1:
            raise ValueError("termination_period must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve.

    ``gap_history`` records the absolute duality gap |y.b - c.x| per
    iteration; its final entry never exceeds its first when the status is
    Optimal.  ``terminated_exactly`` is set when a support-rounding attempt
    produced the verified exact pair, in which case ``supports`` holds the
    identified (U, V).  ``interior_point`` is the last iterate that was
    strictly primal feasible, kept for gap-scale probing.
    """

    status: SolveStatus
    point: PrimalDualPoint | None
    gap_history: list[float] = field(default_factory=list)
    iterations: int = 0
    terminated_exactly: bool = False
    supports: SupportPair | None = None
    interior_point: PrimalDualPoint | None = None


def _try_terminate(lp: LinearProgram, x: np.ndarray):
    sp = candidate_supports(lp, x)
    try:
        pt = round_primal_dual(lp, sp)
    except RoundingFailureError:
        return None
    if verify_candidate(lp, pt):
        return sp, pt
    return None


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest t >= 0 keeping v + t dv nonnegative (inf when unconstrained)."""
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def solve(lp: LinearProgram, opts: SolverOptions | None = None) -> SolveResult:
    """Drive the duality gap below ``opts.gap_tolerance`` or classify the program.

    Returns Optimal with a feasible pair of gap <= tolerance, exiting early
    with the exact rounded solution whenever a periodic termination attempt
    verifies.  Unbounded/Infeasible are best-effort classifications from
    divergence heuristics; IterationLimit and NumericalFailure report the
    respective breakdowns.  Deterministic for fixed inputs.
    """
    opts = opts or SolverOptions()
    violations = validate(lp)
    if violations:
        raise ValueError(f"invalid program: {violations}")

    A, b, c = lp.A, lp.b, lp.c
    m, n = lp.m, lp.n
    period = opts.termination_period or math.ceil(math.sqrt(n))

    x = np.ones(n)
    s = np.maximum(b - A @ x, 1.0)
    y = np.ones(m)
    w = np.maximum(A.T @ y - c, 1.0)

    tol_p = 1e-9 * (1.0 + np.linalg.norm(b))
    tol_d = 1e-9 * (1.0 + np.linalg.norm(c))
    gap_history: list[float] = []
    interior: PrimalDualPoint | None = None

    def result(status, point, iterations, exact=False, supports=None):
        return SolveResult(
            status=status,
            point=point,
            gap_history=gap_history,
            iterations=iterations,
            terminated_exactly=exact,
            supports=supports,
            interior_point=interior,
        )

    for k in range(opts.max_iterations + 1):
        slack = b - A @ x
        gap = float(y @ b - c @ x)
        gap_history.append(abs(gap))
        if np.min(x) > 0 and np.min(slack) > 0:
            interior = PrimalDualPoint(x=x.copy(), y=y.copy())

        primal_ok = np.min(x) >= -tol_p and np.min(slack) >= -tol_p
        dual_ok = np.min(y) >= -tol_d and np.min(A.T @ y - c) >= -tol_d
        converged = primal_ok and dual_ok and abs(gap) <= opts.gap_tolerance

        if opts.attempt_termination and (converged or (k > 0 and k % period == 0)):
            hit = _try_terminate(lp, x)
            if hit is not None:
                sp, pt = hit
                gap_history.append(abs(float(pt.y @ b - c @ pt.x)))
                return result(SolveStatus.OPTIMAL, pt, k, exact=True, supports=sp)
        if converged:
            return result(SolveStatus.OPTIMAL, PrimalDualPoint(x=x, y=y), k)
        if k == opts.max_iterations:
            break

        rp = b - A @ x - s
        rd = c - A.T @ y + w
        rel_p = np.linalg.norm(rp) / (1.0 + np.linalg.norm(b) + np.linalg.norm(A @ x))
        rel_d = np.linalg.norm(rd) / (1.0 + np.linalg.norm(c) + np.linalg.norm(A.T @ y))
        mu = float(x @ w + y @ s) / (n + m)

        if float(c @ x) > _UNBOUNDED_OBJECTIVE and rel_p < _INFEASIBLE_RESIDUAL:
            return result(SolveStatus.UNBOUNDED, None, k)
        if mu < _MU_COLLAPSE and max(rel_p, rel_d) > _INFEASIBLE_RESIDUAL:
            return result(SolveStatus.INFEASIBLE, None, k)
        largest = max(float(np.max(np.abs(v))) for v in (x, s, y, w))
        if largest > _DIVERGENCE_LIMIT or not math.isfinite(rel_p + rel_d + mu):
            if rel_p > _INFEASIBLE_RESIDUAL:
                return result(SolveStatus.INFEASIBLE, None, k)
            if rel_d > _INFEASIBLE_RESIDUAL:
                return result(SolveStatus.UNBOUNDED, None, k)
            return result(SolveStatus.NUMERICAL_FAILURE, None, k)

        # KKT system in (dx, dy); ds, dw recovered from the diagonal blocks.
        K = np.zeros((n + m, n + m))
        K[:n, :n] = np.diag(w / x)
        K[:n, n:] = A.T
        K[n:, :n] = A
        K[n:, n:] = -np.diag(s / y)

        def newton_step(rxw, rys):
            rhs = np.concatenate([rd + rxw / x, rp - rys / y])
            sol = np.linalg.solve(K, rhs)
            dx, dy = sol[:n], sol[n:]
            dw = (rxw - w * dx) / x
            ds = (rys - s * dy) / y
            return dx, ds, dy, dw

        try:
            with np.errstate(all="ignore"):
                dx_a, ds_a, dy_a, dw_a = newton_step(-x * w, -y * s)
                ap_a = min(1.0, _max_step(x, dx_a), _max_step(s, ds_a))
                ad_a = min(1.0, _max_step(y, dy_a), _max_step(w, dw_a))
                mu_aff = (
                    float((x + ap_a * dx_a) @ (w + ad_a * dw_a))
                    + float((y + ad_a * dy_a) @ (s + ap_a * ds_a))
                ) / (n + m)
                sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
                dx, ds, dy, dw = newton_step(
                    sigma * mu - x * w - dx_a * dw_a,
                    sigma * mu - y * s - dy_a * ds_a,
                )
        except np.linalg.LinAlgError:
            return result(SolveStatus.NUMERICAL_FAILURE, None, k)
        if not all(np.all(np.isfinite(d)) for d in (dx, ds, dy, dw)):
            return result(SolveStatus.NUMERICAL_FAILURE, None, k)

        alpha_p = min(1.0, _FRACTION_TO_BOUNDARY * min(_max_step(x, dx), _max_step(s, ds)))
        alpha_d = min(1.0, _FRACTION_TO_BOUNDARY * min(_max_step(y, dy), _max_step(w, dw)))
        x = x + alpha_p * dx
        s = s + alpha_p * ds
        y = y + alpha_d * dy
        w = w + alpha_d * dw
        if not all(np.all(np.isfinite(v)) for v in (x, s, y, w)):
            return result(SolveStatus.NUMERICAL_FAILURE, None, k)

    return result(SolveStatus.ITERATION_LIMIT, None, opts.max_iterations)
