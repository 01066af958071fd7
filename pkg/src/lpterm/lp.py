"""Core data model for inequality-form linear programs.

The primal program is ``max c.x  s.t.  A x <= b, x >= 0`` with dual
``min y.b  s.t.  y A >= c, y >= 0``, where ``A`` is m-by-n and m >= n
is assumed throughout the toolkit.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LinearProgram",
    "PrimalDualPoint",
    "SolveStatus",
    "ResidualReport",
    "MatrixNorms",
    "SpectralNormError",
    "validate",
    "residuals",
    "matrix_norms",
    "primal_feasibility_tolerance",
    "dual_feasibility_tolerance",
    "is_primal_feasible",
    "is_dual_feasible",
    "lp_to_dict",
    "lp_from_dict",
    "load_lp",
    "save_lp",
]


class SpectralNormError(RuntimeError):
    """Raised when the iterative spectral-norm computation fails to converge."""


def _frozen(values, shape_name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{shape_name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LinearProgram:
    """Immutable (A, b, c) triple.  m and n are derived from A's shape."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = _frozen(self.A, "A", 2)
        b = _frozen(self.b, "b", 1)
        c = _frozen(self.c, "c", 1)
        m, n = A.shape
        if m < 1 or n < 1:
            raise ValueError(f"A must be at least 1x1, got {m}x{n}")
        if b.shape != (m,):
            raise ValueError(f"b has length {b.shape[0]}, expected {m}")
        if c.shape != (n,):
            raise ValueError(f"c has length {c.shape[0]}, expected {n}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class PrimalDualPoint:
    """A primal iterate x (length n) paired with a dual iterate y (length m)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, "x", 1))
        object.__setattr__(self, "y", _frozen(self.y, "y", 1))


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class ResidualReport:
    """Componentwise feasibility slacks and the duality gap of a point pair.

    ``duality_gap = y.b - c.x`` is nonnegative (up to tolerance) whenever
    x is primal feasible and y is dual feasible (weak duality).
    """

    primal_slack: np.ndarray
    primal_nonneg_violation: float
    dual_slack: np.ndarray
    dual_nonneg_violation: float
    duality_gap: float


def validate(lp: LinearProgram) -> list[str]:
    """Return a list of invariant violations; empty means well-formed.

    Checks the standing shape assumption m >= n and entry finiteness.
    Violations are data, not exceptions.
    """
    violations: list[str] = []
    if lp.m < lp.n:
        violations.append("m < n")
    for name, arr in (("A", lp.A), ("b", lp.b), ("c", lp.c)):
        bad = np.argwhere(~np.isfinite(np.atleast_2d(arr)))
        if bad.size:
            if arr.ndim == 2:
                i, j = bad[0]
                violations.append(f"non-finite entry at {name}[{i},{j}]")
            else:
                violations.append(f"non-finite entry at {name}[{bad[0][1]}]")
    return violations


def residuals(lp: LinearProgram, pt: PrimalDualPoint) -> ResidualReport:
    """Exact componentwise residual arithmetic for a primal/dual pair."""
    if pt.x.shape != (lp.n,) or pt.y.shape != (lp.m,):
        raise ValueError(
            f"point dimensions ({pt.x.shape[0]}, {pt.y.shape[0]}) do not match "
            f"program ({lp.n}, {lp.m})"
        )
    primal_slack = lp.b - lp.A @ pt.x
    dual_slack = pt.y @ lp.A - lp.c
    return ResidualReport(
        primal_slack=primal_slack,
        primal_nonneg_violation=float(max(0.0, -np.min(pt.x))),
        dual_slack=dual_slack,
        dual_nonneg_violation=float(max(0.0, -np.min(pt.y))),
        duality_gap=float(pt.y @ lp.b - lp.c @ pt.x),
    )


def primal_feasibility_tolerance(lp: LinearProgram) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(lp.b)))


def dual_feasibility_tolerance(lp: LinearProgram) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(lp.c)))


def is_primal_feasible(lp: LinearProgram, x: np.ndarray, tol: float | None = None) -> bool:
    """A point is deemed feasible when its worst slack is above -tol."""
    x = np.asarray(x, dtype=float)
    if tol is None:
        tol = primal_feasibility_tolerance(lp)
    return bool(np.min(x) >= -tol and np.min(lp.b - lp.A @ x) >= -tol)


def is_dual_feasible(lp: LinearProgram, y: np.ndarray, tol: float | None = None) -> bool:
    y = np.asarray(y, dtype=float)
    if tol is None:
        tol = dual_feasibility_tolerance(lp)
    return bool(np.min(y) >= -tol and np.min(y @ lp.A - lp.c) >= -tol)


@dataclass(frozen=True)
class MatrixNorms:
    spectral: float
    frobenius: float
    row_sum_inf: float


_POWER_ITERATION_CAP = 10_000
_POWER_ITERATION_TOL = 1e-10


def matrix_norms(A: np.ndarray) -> MatrixNorms:
    """Operator 2-norm, Frobenius norm and max-row-sum norm of a dense matrix.

    The 2-norm is the square root of the top eigenvalue of A^T A, computed
    by power iteration to relative tolerance 1e-10 (residual criterion).
    Satisfies spectral <= frobenius and row_sum_inf <= sqrt(n) * spectral.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    frobenius = float(np.linalg.norm(A, "fro"))
    row_sum_inf = float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0
    if frobenius == 0.0:
        return MatrixNorms(spectral=0.0, frobenius=0.0, row_sum_inf=0.0)

    B = A.T @ A
    n = B.shape[0]
    # Deterministic start, generically not orthogonal to the top eigenvector.
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(_POWER_ITERATION_CAP):
        Bv = B @ v
        norm_Bv = np.linalg.norm(Bv)
        if norm_Bv == 0.0:
            # v landed in the null space; restart against the first axis.
            v = np.zeros(n)
            v[0] = 1.0
            continue
        v = Bv / norm_Bv
        lam = float(v @ (B @ v))
        residual = np.linalg.norm(B @ v - lam * v)
        if residual <= _POWER_ITERATION_TOL * max(lam, 1e-300):
            return MatrixNorms(
                spectral=float(np.sqrt(max(lam, 0.0))),
                frobenius=frobenius,
                row_sum_inf=row_sum_inf,
            )
    raise SpectralNormError(
        f"power iteration did not converge within {_POWER_ITERATION_CAP} iterations"
    )


def lp_to_dict(lp: LinearProgram) -> dict:
    """JSON-ready dict with exact field names m, n, A (row-major), b, c."""
    return {
        "m": lp.m,
        "n": lp.n,
        "A": [[float(v) for v in row] for row in lp.A],
        "b": [float(v) for v in lp.b],
        "c": [float(v) for v in lp.c],
    }


def lp_from_dict(data: dict) -> LinearProgram:
    lp = LinearProgram(A=np.array(data["A"], dtype=float),
                       b=np.array(data["b"], dtype=float),
                       c=np.array(data["c"], dtype=float))
    if "m" in data and int(data["m"]) != lp.m:
        raise ValueError(f"declared m={data['m']} does not match A with {lp.m} rows")
    if "n" in data and int(data["n"]) != lp.n:
        raise ValueError(f"declared n={data['n']} does not match A with {lp.n} columns")
    return lp


def load_lp(path: str | Path) -> LinearProgram:
    with open(path, encoding="utf-8") as fh:
        return lp_from_dict(json.load(fh))


def save_lp(lp: LinearProgram, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(lp_to_dict(lp), fh, indent=2)
        fh.write("\n")
