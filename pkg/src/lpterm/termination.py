"""Support identification, exact rounding, and the geometry of the optimal face.

A feasible-and-bounded program with unique optimal solutions x*, y* has
support sets U = {i : x*_i > 0} and V = {j : y*_j > 0}.  Knowing (U, V)
reconstructs the exact optimum from two square systems, so a solver can
jump from a near-optimal iterate to the exact solution by guessing the
supports from the smallest coordinate/slack values.  The quantities
alpha/beta/gamma measure how robust that guess is, and combine into a
certified optimality-gap threshold ``delta_lb`` below which the guess is
guaranteed correct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SingularMatrixError, distance_to_span, solve_square
from .lp import (
    LinearProgram,
    PrimalDualPoint,
    dual_feasibility_tolerance,
    is_dual_feasible,
    is_primal_feasible,
    matrix_norms,
    primal_feasibility_tolerance,
)

__all__ = [
    "SupportPair",
    "GeomQuantities",
    "RoundingFailureError",
    "InequalityCheck",
    "ClosenessReport",
    "candidate_supports",
    "round_primal_dual",
    "verify_candidate",
    "geometric_quantities",
    "check_closeness_lemmas",
    "DELTA_LB_REPORT_CAP",
]

# Cap used when rendering an infinite certified threshold in reports.
DELTA_LB_REPORT_CAP = 1e300

# Coordinates above this are treated as strictly positive when matching
# supports against a verified optimal pair.
_SUPPORT_POSITIVITY_TOL = 1e-9


class RoundingFailureError(Exception):
    """The support guess does not yield a solvable square reconstruction."""


@dataclass(frozen=True)
class SupportPair:
    """Sorted 0-based index sets: U over columns (primal), V over rows (dual)."""

    U: tuple[int, ...]
    V: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "U", tuple(sorted(int(i) for i in self.U)))
        object.__setattr__(self, "V", tuple(sorted(int(j) for j in self.V)))


@dataclass(frozen=True)
class GeomQuantities:
    """Positivity/slack margins of a verified optimal pair.

    alpha_P/alpha_D: smallest supported primal/dual coordinate.
    beta_P/beta_D:   smallest slack among the non-tight constraints.
    gamma:           min distance from a supported column A_{V,k} to the
                     span of the other supported columns.
    lambda_:         min of the four alpha/beta values (finite ones only).
    delta_lb:        lambda_^2 gamma / (2 max(1, sqrt(n)||A||) (1 + ||A||)),
                     a certified lower bound on the gap threshold below
                     which candidate_supports recovers (U, V).

    Minima over empty index sets are +inf.
    """

    alpha_P: float
    alpha_D: float
    beta_P: float
    beta_D: float
    gamma: float
    lambda_: float
    delta_lb: float


def candidate_supports(lp: LinearProgram, x: np.ndarray) -> SupportPair:
    """Guess (U, V) from the n smallest values in {x_i} U {b_j - A_j.x}.

    U collects the coordinates NOT among the n smallest; V collects the rows
    whose slack is.  Ties are broken deterministically: slack values win over
    coordinate values of equal magnitude, then lower index wins.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (lp.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({lp.n},)")
    m, n = lp.m, lp.n
    slack = lp.b - lp.A @ x
    values = np.concatenate([slack, x])
    kinds = np.concatenate([np.zeros(m, dtype=int), np.ones(n, dtype=int)])
    indices = np.concatenate([np.arange(m), np.arange(n)])
    order = np.lexsort((indices, kinds, values))
    chosen = order[:n]
    V = tuple(int(indices[t]) for t in chosen if kinds[t] == 0)
    dropped_coords = {int(indices[t]) for t in chosen if kinds[t] == 1}
    U = tuple(i for i in range(n) if i not in dropped_coords)
    return SupportPair(U=U, V=V)


def round_primal_dual(lp: LinearProgram, sp: SupportPair) -> PrimalDualPoint:
    """Reconstruct the exact pair implied by the support guess (U, V).

    x_U solves A_{V,U} x_U = b_V (zero elsewhere) and y_V solves
    y_V A_{V,U} = c_U (zero elsewhere).  Raises RoundingFailureError when
    |U| != |V| or the square system is degenerate.
    """
    U = np.array(sp.U, dtype=int)
    V = np.array(sp.V, dtype=int)
    if len(U) != len(V):
        raise RoundingFailureError(f"|U|={len(U)} and |V|={len(V)} differ")
    x = np.zeros(lp.n)
    y = np.zeros(lp.m)
    if len(U) > 0:
        block = lp.A[np.ix_(V, U)]
        try:
            x[U] = solve_square(block, lp.b[V])
            y[V] = solve_square(block.T, lp.c[U])
        except SingularMatrixError as exc:
            raise RoundingFailureError(f"degenerate support guess: {exc}") from exc
    return PrimalDualPoint(x=x, y=y)


def verify_candidate(lp: LinearProgram, pt: PrimalDualPoint) -> bool:
    """True iff pt is primal feasible, dual feasible, and has ~zero gap.

    Feasibility uses the componentwise 1e-9 (1 + ||rhs||) tolerance; the gap
    test is |y.b - c.x| <= 1e-8 (1 + |c.x|).  A pair passing this check is
    optimal by strong duality.
    """
    if pt.x.shape != (lp.n,) or pt.y.shape != (lp.m,):
        return False
    if not (np.all(np.isfinite(pt.x)) and np.all(np.isfinite(pt.y))):
        return False
    if not is_primal_feasible(lp, pt.x):
        return False
    if not is_dual_feasible(lp, pt.y):
        return False
    cx = float(lp.c @ pt.x)
    gap = float(pt.y @ lp.b - cx)
    return abs(gap) <= 1e-8 * (1.0 + abs(cx))


def _min_or_inf(values: np.ndarray) -> float:
    return float(np.min(values)) if values.size else math.inf


def geometric_quantities(
    lp: LinearProgram, pt: PrimalDualPoint, sp: SupportPair
) -> GeomQuantities:
    """Margins of the verified optimal pair pt with supports sp.

    Requires pt to pass verify_candidate and sp to match the strictly
    positive coordinates of x and y (within 1e-9).
    """
    if not verify_candidate(lp, pt):
        raise ValueError("point does not verify as an optimal pair")
    pos_x = {int(i) for i in np.flatnonzero(pt.x > _SUPPORT_POSITIVITY_TOL)}
    pos_y = {int(j) for j in np.flatnonzero(pt.y > _SUPPORT_POSITIVITY_TOL)}
    if pos_x != set(sp.U) or pos_y != set(sp.V):
        raise ValueError(
            f"supports U={sp.U}, V={sp.V} inconsistent with positive coordinates "
            f"{sorted(pos_x)}, {sorted(pos_y)}"
        )

    U = np.array(sp.U, dtype=int)
    V = np.array(sp.V, dtype=int)
    not_U = np.setdiff1d(np.arange(lp.n), U)
    not_V = np.setdiff1d(np.arange(lp.m), V)

    alpha_P = _min_or_inf(pt.x[U])
    alpha_D = _min_or_inf(pt.y[V])
    beta_P = _min_or_inf((lp.b - lp.A @ pt.x)[not_V])
    beta_D = _min_or_inf((pt.y @ lp.A - lp.c)[not_U])

    if U.size:
        dists = []
        for pos, k in enumerate(U):
            others = np.delete(U, pos)
            dists.append(distance_to_span(lp.A[V, k], lp.A[np.ix_(V, others)]))
        gamma = float(min(dists))
    else:
        gamma = math.inf

    finite = [v for v in (alpha_P, alpha_D, beta_P, beta_D) if math.isfinite(v)]
    lambda_ = min(finite) if finite else math.inf

    if math.isinf(lambda_) or math.isinf(gamma):
        delta_lb = math.inf
    else:
        spec = matrix_norms(lp.A).spectral
        delta_lb = (
            lambda_**2 * gamma / (2.0 * max(1.0, math.sqrt(lp.n) * spec) * (1.0 + spec))
        )
    return GeomQuantities(
        alpha_P=alpha_P,
        alpha_D=alpha_D,
        beta_P=beta_P,
        beta_D=beta_D,
        gamma=gamma,
        lambda_=lambda_,
        delta_lb=delta_lb,
    )


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class ClosenessReport:
    """Literal evaluation of the four near-optimal-point inequalities."""

    tech_av: InequalityCheck
    tech_gamma: InequalityCheck
    tech_ubar: InequalityCheck
    close: InequalityCheck

    @property
    def all_hold(self) -> bool:
        return (
            self.tech_av.holds
            and self.tech_gamma.holds
            and self.tech_ubar.holds
            and self.close.holds
        )


def _check_ge(lhs: float, rhs: float) -> InequalityCheck:
    tol = 1e-8 * (1.0 + abs(rhs) if math.isfinite(rhs) else 1.0)
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs - tol))


def _check_le(lhs: float, rhs: float) -> InequalityCheck:
    if math.isinf(rhs):
        return InequalityCheck(lhs=lhs, rhs=rhs, holds=True)
    tol = 1e-8 * (1.0 + abs(rhs))
    return InequalityCheck(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + tol))


def check_closeness_lemmas(
    lp: LinearProgram,
    pt_opt: PrimalDualPoint,
    sp: SupportPair,
    x_feas: np.ndarray,
    quantities: GeomQuantities | None = None,
) -> ClosenessReport:
    """Evaluate both sides of the four inequalities tying a feasible point to x*.

    With gap = c.(x* - x) and margins from ``geometric_quantities``:

      tech_av:    gap                    >= alpha_D ||A_{V,:} (x* - x)||
      tech_gamma: ||A_{V,U} (x*_U-x_U)|| >= gamma ||x*_U - x_U||_inf
      tech_ubar:  ||x_Ubar||             <= gap / beta_D
      close:      ||x* - x||_inf         <= gap (1 + ||A||) / (lambda min(gamma, 1))

    Each check carries lhs, rhs and a pass flag at tolerance 1e-8 (1 + |rhs|).
    ``quantities`` may be supplied to avoid recomputing them per probe.
    """
    x_feas = np.asarray(x_feas, dtype=float)
    if x_feas.shape != (lp.n,):
        raise ValueError(f"x_feas has shape {x_feas.shape}, expected ({lp.n},)")
    if not is_primal_feasible(lp, x_feas):
        raise ValueError("x_feas is not primal feasible")
    gq = quantities if quantities is not None else geometric_quantities(lp, pt_opt, sp)

    U = np.array(sp.U, dtype=int)
    V = np.array(sp.V, dtype=int)
    not_U = np.setdiff1d(np.arange(lp.n), U)
    diff = pt_opt.x - x_feas
    gap = float(lp.c @ diff)

    av_norm = float(np.linalg.norm(lp.A[V, :] @ diff)) if V.size else 0.0
    tech_av = _check_ge(gap, gq.alpha_D * av_norm if V.size else 0.0)

    if U.size:
        block_norm = float(np.linalg.norm(lp.A[np.ix_(V, U)] @ diff[U]))
        inf_norm = float(np.max(np.abs(diff[U])))
        tech_gamma = _check_ge(block_norm, gq.gamma * inf_norm)
    else:
        tech_gamma = _check_ge(0.0, 0.0)

    ubar_norm = float(np.linalg.norm(x_feas[not_U])) if not_U.size else 0.0
    tech_ubar = _check_le(ubar_norm, gap / gq.beta_D if math.isfinite(gq.beta_D) else math.inf)

    spec = matrix_norms(lp.A).spectral
    denom = gq.lambda_ * min(gq.gamma, 1.0)
    close_rhs = gap * (1.0 + spec) / denom if math.isfinite(denom) and denom > 0 else math.inf
    close = _check_le(float(np.max(np.abs(diff))), close_rhs)

    return ClosenessReport(tech_av=tech_av, tech_gamma=tech_gamma, tech_ubar=tech_ubar, close=close)
