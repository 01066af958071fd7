"""Gaussian perturbation of instances and direct checkers for Gaussian bounds.

Perturbation noise comes from a counter-based generator (splitmix-style
bit mixing of (master_seed, trial_index, entry_index), inverse-CDF
transform to normals), so every entry of every trial is reproducible
independently of evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtri

from .lp import LinearProgram

__all__ = [
    "PerturbationSpec",
    "RatioBoundCheck",
    "TailBoundCheck",
    "LogExpectationCheck",
    "NormExpectationCheck",
    "normalize_base",
    "perturb",
    "counter_uniform",
    "derive_seed",
    "gaussian_ratio_bound_check",
    "gaussian_tail_bound_check",
    "tail_to_log_expectation_check",
    "norm_expectation_check",
    "run_ratio_sweep",
    "run_tail_sweep",
]

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z + _GOLDEN).astype(_U64)
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def counter_uniform(master_seed: int, trial_index: int, entry_indices: np.ndarray) -> np.ndarray:
    """Uniform(0,1) variates keyed by (master_seed, trial_index, entry_index).

    Pure function of its keys; safe to evaluate in any order or in parallel.
    """
    entries = np.asarray(entry_indices, dtype=_U64)
    h = _mix64(np.full(entries.shape, _U64(master_seed % (1 << 64))))
    h = _mix64(h ^ _U64(trial_index % (1 << 64)))
    h = _mix64(h ^ entries)
    return ((h >> _U64(11)).astype(np.float64) + 0.5) * 2.0**-53


def derive_seed(master_seed: int, *indices: int) -> int:
    """Fold indices into a derived 64-bit seed with the counter mix."""
    h = _mix64(np.array([master_seed % (1 << 64)], dtype=_U64))
    for idx in indices:
        h = _mix64(h ^ _U64(idx % (1 << 64)))
    return int(h[0])


@dataclass(frozen=True)
class PerturbationSpec:
    """Noise level and master seed for a family of perturbed instances."""

    sigma: float
    master_seed: int

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")


def normalize_base(lp: LinearProgram) -> LinearProgram:
    """Scale (A, b, c) jointly so that ||A||_F, ||b||, ||c|| <= 1.

    Divides all three by max(1, ||A||_F, ||b||, ||c||); the optimal face is
    unchanged because the primal feasible set and objective direction scale
    together.
    """
    scale = max(
        1.0,
        float(np.linalg.norm(lp.A, "fro")),
        float(np.linalg.norm(lp.b)),
        float(np.linalg.norm(lp.c)),
    )
    return LinearProgram(A=lp.A / scale, b=lp.b / scale, c=lp.c / scale)


def perturb(base: LinearProgram, spec: PerturbationSpec, trial_index: int) -> LinearProgram:
    """Shift every entry of (A, b, c) independently by N(0, sigma^2) noise.

    Entries are numbered row-major through A, then b, then c; each draws
    its variate from the counter generator keyed by
    (master_seed, trial_index, entry_index), so fixed keys give
    bit-identical output.  The base is expected to be pre-normalized
    (see ``normalize_base``); sigma uses that absolute scale.
    """
    m, n = base.m, base.n
    if spec.sigma > 1.0 / math.sqrt(m * n):
        warnings.warn(
            f"sigma={spec.sigma:g} exceeds 1/sqrt(m*n)={1.0 / math.sqrt(m * n):g}; "
            "outside the small-noise regime targeted by the expectation bounds",
            RuntimeWarning,
            stacklevel=2,
        )
    total = m * n + m + n
    u = counter_uniform(spec.master_seed, trial_index, np.arange(total, dtype=np.uint64))
    noise = spec.sigma * ndtri(u)
    return LinearProgram(
        A=base.A + noise[: m * n].reshape(m, n),
        b=base.b + noise[m * n : m * n + m],
        c=base.c + noise[m * n + m :],
    )


@dataclass(frozen=True)
class RatioBoundCheck:
    ratio: float
    bound: float
    holds: bool
    log_ratio: float
    log_bound: float


def gaussian_ratio_bound_check(
    x: np.ndarray, y: np.ndarray, center: np.ndarray, sigma: float
) -> RatioBoundCheck:
    """Check mu(y)/mu(x) >= exp(-eps (||x|| + 2) / sigma^2) with eps = ||x - y||.

    mu is the Gaussian density of variance sigma^2 centered at ``center``
    (norm at most 1); the hypothesis requires eps <= 1.  Both sides are
    compared in log space with 1e-12 slack.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    center = np.asarray(center, dtype=float)
    if np.linalg.norm(center) > 1.0 + 1e-12:
        raise ValueError("hypothesis violated: ||center|| must be <= 1")
    eps = float(np.linalg.norm(x - y))
    if eps > 1.0 + 1e-12:
        raise ValueError("hypothesis violated: ||x - y|| must be <= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    log_ratio = (
        float(np.linalg.norm(x - center) ** 2 - np.linalg.norm(y - center) ** 2)
        / (2.0 * sigma**2)
    )
    log_bound = -eps * (float(np.linalg.norm(x)) + 2.0) / sigma**2
    return RatioBoundCheck(
        ratio=float(np.exp(log_ratio)),
        bound=float(np.exp(log_bound)),
        holds=bool(log_ratio >= log_bound - 1e-12),
        log_ratio=log_ratio,
        log_bound=log_bound,
    )


@dataclass(frozen=True)
class TailBoundCheck:
    conditional_prob: float
    bound: float
    holds: bool


def gaussian_tail_bound_check(
    t: float, eps: float, tau: float, sigma: float, mean: float
) -> TailBoundCheck:
    """Check P[x <= t + eps | x >= t] <= (eps tau / sigma^2) e^{eps (tau+3)/sigma^2}.

    x ~ N(mean, sigma^2) with |mean| <= 1 and sigma^2 <= 1; requires
    eps >= 0, tau >= 1, t <= tau.  The conditional probability is evaluated
    through log tail probabilities for full accuracy far in the tail.
    """
    if abs(mean) > 1.0 + 1e-12:
        raise ValueError("hypothesis violated: |mean| must be <= 1")
    if not (0 < sigma and sigma**2 <= 1.0 + 1e-12):
        raise ValueError("hypothesis violated: sigma^2 must be in (0, 1]")
    if eps < 0:
        raise ValueError("hypothesis violated: eps must be >= 0")
    if tau < 1.0:
        raise ValueError("hypothesis violated: tau must be >= 1")
    if t > tau + 1e-12:
        raise ValueError("hypothesis violated: t must be <= tau")
    z_lo = (t - mean) / sigma
    z_hi = (t + eps - mean) / sigma
    # P[x <= t+eps | x >= t] = 1 - P[x >= t+eps] / P[x >= t]
    log_tail_ratio = float(log_ndtr(-z_hi) - log_ndtr(-z_lo))
    prob = float(-np.expm1(log_tail_ratio))
    if eps == 0.0:
        bound = 0.0
    else:
        log_bound = math.log(eps * tau / sigma**2) + eps * (tau + 3.0) / sigma**2
        bound = math.exp(log_bound) if log_bound < 700 else math.inf
    return TailBoundCheck(
        conditional_prob=prob,
        bound=bound,
        holds=bool(prob <= bound + 1e-12),
    )


@dataclass(frozen=True)
class LogExpectationCheck:
    empirical_mean: float
    bound: float
    holds: bool
    stderr: float


def tail_to_log_expectation_check(
    samples, alpha: float, k: float
) -> LogExpectationCheck:
    """Check E[max(1, log(1/x))] <= (1 + log alpha) / k on a sample.

    Valid for nonnegative x with P[x <= eps] <= alpha eps^k and
    log(alpha)/k >= 1 (the caller is responsible for the tail condition of
    the sampled distribution).  The comparison allows a three-standard-error
    cushion on the empirical mean.
    """
    if math.log(alpha) / k < 1.0:
        raise ValueError("hypothesis violated: log(alpha)/k must be >= 1")
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0 or np.min(samples) <= 0:
        raise ValueError("samples must be positive scalars")
    stats = np.maximum(1.0, np.log(1.0 / samples))
    mean = float(np.mean(stats))
    stderr = float(np.std(stats, ddof=1) / np.sqrt(stats.size)) if stats.size > 1 else math.inf
    bound = (1.0 + math.log(alpha)) / k
    return LogExpectationCheck(
        empirical_mean=mean,
        bound=bound,
        holds=bool(mean - 3.0 * stderr <= bound),
        stderr=stderr,
    )


@dataclass(frozen=True)
class NormExpectationCheck:
    empirical: float
    bound: float
    holds: bool
    stderr: float


def norm_expectation_check(
    n: int, m: int, sigma: float, base: np.ndarray, num_trials: int, seed: int
) -> NormExpectationCheck:
    """Monte Carlo check of E[log(||A|| + 3)] <= log((sqrt(n) + sqrt(m)) sigma + 4).

    A = base + sigma G with G a standard Gaussian m-by-n matrix and
    ||base|| <= 1; requires sigma^2 <= 1.  Holds when the empirical mean
    minus three standard errors sits below the bound.
    """
    if sigma**2 > 1.0 + 1e-12:
        raise ValueError("sigma^2 must be <= 1")
    base = np.asarray(base, dtype=float)
    if base.shape != (m, n):
        raise ValueError(f"base has shape {base.shape}, expected ({m}, {n})")
    rng = np.random.default_rng(seed)
    stats = np.empty(num_trials)
    for i in range(num_trials):
        A = base + sigma * rng.standard_normal((m, n))
        stats[i] = math.log(np.linalg.norm(A, 2) + 3.0)
    mean = float(np.mean(stats))
    stderr = float(np.std(stats, ddof=1) / np.sqrt(num_trials)) if num_trials > 1 else math.inf
    bound = math.log((math.sqrt(n) + math.sqrt(m)) * sigma + 4.0)
    return NormExpectationCheck(
        empirical=mean,
        bound=bound,
        holds=bool(mean - 3.0 * stderr <= bound),
        stderr=stderr,
    )


def run_ratio_sweep(num_samples: int, seed: int) -> tuple[int, int]:
    """Random in-hypothesis density-ratio checks; returns (passed, failed)."""
    rng = np.random.default_rng(seed)
    passed = failed = 0
    for _ in range(num_samples):
        dim = int(rng.integers(1, 6))
        center = rng.standard_normal(dim)
        norm = np.linalg.norm(center)
        if norm > 0:
            center *= rng.uniform(0.0, 1.0) / norm
        sigma = rng.uniform(0.05, 1.0)
        x = center + sigma * rng.standard_normal(dim)
        direction = rng.standard_normal(dim)
        direction /= max(np.linalg.norm(direction), 1e-300)
        y = x + rng.uniform(0.0, 1.0) * direction
        if gaussian_ratio_bound_check(x, y, center, sigma).holds:
            passed += 1
        else:
            failed += 1
    return passed, failed


def run_tail_sweep(num_samples: int, seed: int) -> tuple[int, int]:
    """Random in-hypothesis conditional-tail checks; returns (passed, failed)."""
    rng = np.random.default_rng(seed)
    passed = failed = 0
    for _ in range(num_samples):
        mean = rng.uniform(-1.0, 1.0)
        sigma = math.sqrt(rng.uniform(0.01, 1.0))
        tau = 1.0 + abs(rng.standard_normal())
        t = tau - abs(rng.standard_normal()) * 2.0
        eps = rng.uniform(0.0, 0.5)
        if gaussian_tail_bound_check(t, eps, tau, sigma, mean).holds:
            passed += 1
        else:
            failed += 1
    return passed, failed
