"""Dense kernels for the termination phase: square solves and point-to-span distance."""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["SingularMatrixError", "solve_square", "distance_to_span"]

# A pivot below this multiple of ||M||_F marks the system as degenerate.
_PIVOT_RTOL = 1e-12


class SingularMatrixError(Exception):
    """Square system is singular (or numerically too close to it)."""


def _lu_factor(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Partial-pivot LU, multipliers stored in place. Raises on tiny pivots."""
    lu = M.copy()
    k = lu.shape[0]
    threshold = _PIVOT_RTOL * np.linalg.norm(M, "fro")
    perm: list[int] = []
    for col in range(k):
        pivot_row = col + int(np.argmax(np.abs(lu[col:, col])))
        if np.abs(lu[pivot_row, col]) <= threshold:
            raise SingularMatrixError(
                f"pivot {lu[pivot_row, col]:.3e} below threshold {threshold:.3e} "
                f"at elimination step {col}"
            )
        if pivot_row != col:
            lu[[col, pivot_row]] = lu[[pivot_row, col]]
        perm.append(pivot_row)
        mult = lu[col + 1 :, col] / lu[col, col]
        lu[col + 1 :, col] = mult
        lu[col + 1 :, col + 1 :] -= np.outer(mult, lu[col, col + 1 :])
    return lu, perm


def _lu_solve(lu: np.ndarray, perm: list[int], rhs: np.ndarray) -> np.ndarray:
    k = lu.shape[0]
    x = rhs.copy()
    for col, pivot_row in enumerate(perm):
        if pivot_row != col:
            x[[col, pivot_row]] = x[[pivot_row, col]]
        x[col + 1 :] -= lu[col + 1 :, col] * x[col]
    for col in range(k - 1, -1, -1):
        x[col] = (x[col] - lu[col, col + 1 :] @ x[col + 1 :]) / lu[col, col]
    return x


def solve_square(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Solve M x = v for square M by partial-pivot elimination.

    Guarantees ||M x - v|| <= 1e-8 (1 + ||v||); one step of iterative
    refinement is applied if the raw solve misses that bound.  Raises
    SingularMatrixError on tiny pivots or irreparable residuals.
    """
    M = np.asarray(M, dtype=float)
    v = np.asarray(v, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got shape {M.shape}")
    if v.shape != (M.shape[0],):
        raise ValueError(f"v has shape {v.shape}, expected ({M.shape[0]},)")
    if M.shape[0] == 0:
        return np.zeros(0)
    lu, perm = _lu_factor(M)
    x = _lu_solve(lu, perm, v)
    bound = 1e-8 * (1.0 + np.linalg.norm(v))
    residual = v - M @ x
    if np.linalg.norm(residual) > bound:
        x = x + _lu_solve(lu, perm, residual)
        if np.linalg.norm(v - M @ x) > bound:
            raise SingularMatrixError("residual exceeds bound after refinement")
    return x


def distance_to_span(u: np.ndarray, B: np.ndarray) -> float:
    """Euclidean distance from u to the column span of B.

    Uses a column-pivoted Householder QR so that rank-deficient B still
    yields the distance to span(B) itself.  An empty B (r = 0 columns)
    gives ||u||.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"u must be a vector, got shape {u.shape}")
    k = u.shape[0]
    B = np.asarray(B, dtype=float)
    if B.size == 0:
        return float(np.linalg.norm(u))
    if B.ndim != 2 or B.shape[0] != k:
        raise ValueError(f"B has shape {B.shape}, expected ({k}, r)")
    if B.shape[1] >= k:
        raise ValueError(f"B must have fewer than {k} columns, got {B.shape[1]}")
    Q, R, _ = scipy.linalg.qr(B, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > _PIVOT_RTOL * max(np.linalg.norm(B, "fro"), 1e-300)))
    if rank == 0:
        return float(np.linalg.norm(u))
    Qr = Q[:, :rank]
    return float(np.linalg.norm(u - Qr @ (Qr.T @ u)))
