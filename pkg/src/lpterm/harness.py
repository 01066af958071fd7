"""Monte Carlo experiment engine: perturb -> solve -> terminate -> measure.

Each trial perturbs the base instance, solves it (exactly, via vertex
enumeration, when within budget; otherwise with the iterative solver),
computes the support geometry, and emits one TrialRecord.  Reports compare
empirical tail frequencies of small alpha/beta/gamma against their closed
form bounds, and summarize max(1, log(1/delta_lb)) per noise level.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ipm import SolverOptions, solve
from .lp import LinearProgram, SolveStatus, lp_from_dict, matrix_norms
from .oracle import MAX_ORACLE_M, MAX_ORACLE_N, brute_force_solve, delta_probe
from .smoothing import PerturbationSpec, derive_seed, normalize_base, perturb
from .termination import candidate_supports, geometric_quantities

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "TailBoundRow",
    "LogDeltaRow",
    "DEFAULT_EPS_GRID",
    "run_experiment",
    "tail_bound_report",
    "log_delta_summary",
    "write_csv",
    "load_experiment_config",
    "standard_base_instance",
]

DEFAULT_EPS_GRID = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)

# Euler's number appears in the small-gamma tail bound eps*n*e/sigma^2.
_E = math.e


@dataclass(frozen=True)
class ExperimentConfig:
    base_instance: LinearProgram
    sigma_list: tuple[float, ...]
    trials_per_sigma: int
    master_seed: int
    probe_count: int = 0
    solver_options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        object.__setattr__(self, "sigma_list", tuple(float(s) for s in self.sigma_list))
        if self.trials_per_sigma < 0:
            raise ValueError("trials_per_sigma must be >= 0")
        if any(s <= 0 for s in self.sigma_list):
            raise ValueError("sigmas must be positive")


@dataclass(frozen=True)
class TrialRecord:
    """One perturbed trial.  Geometric fields are populated only for
    Optimal trials with a certified-unique optimum; otherwise they are nan.
    Non-optimal trials carry delta_lb = inf and the statistic
    log_inv_delta_lb = 1 (the gap threshold is vacuously infinite there)."""

    sigma: float
    trial_index: int
    status: SolveStatus
    m: int
    n: int
    norm_A: float
    norm_xstar: float
    norm_ystar: float
    alpha_P: float
    alpha_D: float
    beta_P: float
    beta_D: float
    gamma: float
    lambda_: float
    delta_lb: float
    log_inv_delta_lb: float
    iterations: int
    terminated_exactly: bool
    gap_at_termination: float


_CSV_NAME_OVERRIDES = {"lambda_": "lambda"}


@dataclass(frozen=True)
class TailBoundRow:
    eps: float
    empirical_prob: float
    stderr: float
    paper_bound: float
    within_bound: bool
    vacuous: bool


@dataclass(frozen=True)
class LogDeltaRow:
    sigma: float
    mean_log_inv_delta_lb: float
    stderr: float
    log_m_over_sigma: float
    corollary_rhs: float


def _blank_record(sigma, trial_index, status, m, n) -> TrialRecord:
    optimal = status is SolveStatus.OPTIMAL
    return TrialRecord(
        sigma=sigma,
        trial_index=trial_index,
        status=status,
        m=m,
        n=n,
        norm_A=math.nan,
        norm_xstar=math.nan,
        norm_ystar=math.nan,
        alpha_P=math.nan,
        alpha_D=math.nan,
        beta_P=math.nan,
        beta_D=math.nan,
        gamma=math.nan,
        lambda_=math.nan,
        delta_lb=math.nan if optimal else math.inf,
        log_inv_delta_lb=math.nan if optimal else 1.0,
        iterations=0,
        terminated_exactly=False,
        gap_at_termination=math.nan,
    )


def _run_trial(cfg: ExperimentConfig, sigma: float, sigma_index: int, trial_index: int) -> TrialRecord:
    spec = PerturbationSpec(sigma=sigma, master_seed=derive_seed(cfg.master_seed, sigma_index))
    lp = perturb(cfg.base_instance, spec, trial_index)
    m, n = lp.m, lp.n

    if n > MAX_ORACLE_N or m > MAX_ORACLE_M:
        return _run_trial_ipm_only(cfg, lp, sigma, trial_index)

    orc = brute_force_solve(lp)
    rec = _blank_record(sigma, trial_index, orc.status, m, n)
    if orc.status is not SolveStatus.OPTIMAL:
        return rec

    iterations = 0
    terminated = False
    gap_term = math.nan
    interior = None
    try:
        res = solve(lp, cfg.solver_options)
        iterations = res.iterations
        terminated = res.terminated_exactly
        if res.gap_history:
            gap_term = res.gap_history[-1]
        if res.interior_point is not None:
            interior = res.interior_point.x
    except Exception:
        pass

    rec = dataclasses.replace(
        rec, iterations=iterations, terminated_exactly=terminated, gap_at_termination=gap_term
    )
    if not orc.unique:
        return rec

    gq = geometric_quantities(lp, orc.point, orc.supports)
    delta_lb = gq.delta_lb
    log_inv = max(1.0, math.log(1.0 / delta_lb)) if delta_lb > 0 else math.inf
    rec = dataclasses.replace(
        rec,
        norm_A=matrix_norms(lp.A).spectral,
        norm_xstar=float(np.linalg.norm(orc.point.x)),
        norm_ystar=float(np.linalg.norm(orc.point.y)),
        alpha_P=gq.alpha_P,
        alpha_D=gq.alpha_D,
        beta_P=gq.beta_P,
        beta_D=gq.beta_D,
        gamma=gq.gamma,
        lambda_=gq.lambda_,
        delta_lb=delta_lb,
        log_inv_delta_lb=log_inv,
    )
    if cfg.probe_count > 0:
        delta_probe(
            lp,
            orc,
            cfg.probe_count,
            derive_seed(cfg.master_seed, sigma_index, trial_index),
            interior=interior,
        )
    return rec


def _run_trial_ipm_only(cfg, lp, sigma, trial_index) -> TrialRecord:
    try:
        res = solve(lp, cfg.solver_options)
    except Exception:
        return _blank_record(sigma, trial_index, SolveStatus.NUMERICAL_FAILURE, lp.m, lp.n)
    rec = _blank_record(sigma, trial_index, res.status, lp.m, lp.n)
    rec = dataclasses.replace(
        rec,
        iterations=res.iterations,
        terminated_exactly=res.terminated_exactly,
        gap_at_termination=res.gap_history[-1] if res.gap_history else math.nan,
    )
    if res.status is not SolveStatus.OPTIMAL or not res.terminated_exactly:
        return rec
    try:
        gq = geometric_quantities(lp, res.point, res.supports)
    except ValueError:
        return rec
    delta_lb = gq.delta_lb
    return dataclasses.replace(
        rec,
        norm_A=matrix_norms(lp.A).spectral,
        norm_xstar=float(np.linalg.norm(res.point.x)),
        norm_ystar=float(np.linalg.norm(res.point.y)),
        alpha_P=gq.alpha_P,
        alpha_D=gq.alpha_D,
        beta_P=gq.beta_P,
        beta_D=gq.beta_D,
        gamma=gq.gamma,
        lambda_=gq.lambda_,
        delta_lb=delta_lb,
        log_inv_delta_lb=max(1.0, math.log(1.0 / delta_lb)) if delta_lb > 0 else math.inf,
    )


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """All (sigma, trial) records in deterministic (sigma index, trial) order.

    Per-trial failures become NumericalFailure records rather than raising.
    """
    records: list[TrialRecord] = []
    for si, sigma in enumerate(cfg.sigma_list):
        for ti in range(cfg.trials_per_sigma):
            try:
                records.append(_run_trial(cfg, sigma, si, ti))
            except Exception:
                records.append(
                    _blank_record(
                        sigma, ti, SolveStatus.NUMERICAL_FAILURE,
                        cfg.base_instance.m, cfg.base_instance.n,
                    )
                )
    return records


def _event_threshold(quantity: str, rec: TrialRecord, eps: float) -> tuple[float, float]:
    """(observed value, event threshold) for one record, per the lemma's LHS."""
    if quantity == "alpha":
        return rec.alpha_P, eps / ((rec.norm_A + 2.0) ** 2 * (rec.norm_xstar + 1.0))
    if quantity == "beta":
        return rec.beta_P, eps / max(1.0, rec.norm_A * rec.norm_xstar)
    if quantity == "gamma":
        return rec.gamma, eps / (
            (1.0 + rec.norm_xstar**2 + rec.norm_ystar**2) * (rec.norm_A + 3.0)
        )
    raise ValueError(f"unknown quantity {quantity!r}")


def _paper_bound(quantity: str, eps: float, m: int, n: int, sigma: float) -> float:
    if quantity == "alpha":
        return 8.0 * eps * n * (m + 1) / sigma**2
    if quantity == "beta":
        return 4.0 * eps * m / sigma**2
    if quantity == "gamma":
        return eps * n * _E / sigma**2
    raise ValueError(f"unknown quantity {quantity!r}")


def tail_bound_report(
    records: list[TrialRecord], quantity: str, eps_grid=DEFAULT_EPS_GRID
) -> list[TailBoundRow]:
    """Empirical frequency of the small-{alpha,beta,gamma} event vs its bound.

    The numerator counts Optimal records whose quantity falls below the
    eps-scaled threshold (evaluated with that record's norms); the
    denominator is all records, matching the conditioning on the
    feasible-and-bounded event.  Rows with bound > 1 are marked vacuous.
    """
    if not records:
        raise ValueError("empty record set")
    sigmas = {r.sigma for r in records}
    if len(sigmas) != 1:
        raise ValueError(f"records span multiple sigmas: {sorted(sigmas)}")
    sigma = records[0].sigma
    m, n = records[0].m, records[0].n
    N = len(records)
    rows = []
    for eps in eps_grid:
        count = 0
        for rec in records:
            if rec.status is not SolveStatus.OPTIMAL:
                continue
            value, threshold = _event_threshold(quantity, rec, eps)
            if math.isnan(value) or math.isnan(threshold):
                continue
            if value <= threshold:
                count += 1
        p = count / N
        se = math.sqrt(p * (1.0 - p) / N)
        bound = _paper_bound(quantity, eps, m, n, sigma)
        vacuous = bound > 1.0
        within = True if vacuous else (p - 3.0 * se <= bound + 1e-12)
        rows.append(
            TailBoundRow(
                eps=eps,
                empirical_prob=p,
                stderr=se,
                paper_bound=bound,
                within_bound=bool(within),
                vacuous=vacuous,
            )
        )
    return rows


def log_delta_summary(records_by_sigma: dict[float, list[TrialRecord]]) -> list[LogDeltaRow]:
    """Per-sigma mean of max(1, log(1/delta_lb)) with reference columns.

    Non-optimal trials contribute the statistic's floor value 1; records
    with nan statistic (non-certified optima) are excluded.  The reference
    columns are log(m/sigma) and the explicit expectation bound
    3 (log(21 (m+1)^{13/6} / sigma^2) + 1) + 7 log(||A||+3)
    + 4 log(1 + ||x*|| + ||y*||), averaged with per-record norms.
    """
    if len(records_by_sigma) < 2:
        raise ValueError("need records for at least two sigma values")
    rows = []
    for sigma in sorted(records_by_sigma):
        recs = records_by_sigma[sigma]
        if not recs:
            raise ValueError(f"no records for sigma={sigma}")
        m = recs[0].m
        vals = np.array(
            [r.log_inv_delta_lb for r in recs if math.isfinite(r.log_inv_delta_lb)]
        )
        mean = float(np.mean(vals)) if vals.size else math.nan
        stderr = (
            float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else math.inf
        )
        norm_terms = [
            7.0 * math.log(r.norm_A + 3.0)
            + 4.0 * math.log(1.0 + r.norm_xstar + r.norm_ystar)
            for r in recs
            if math.isfinite(r.norm_A)
        ]
        base_term = 3.0 * (math.log(21.0 * (m + 1) ** (13.0 / 6.0) / sigma**2) + 1.0)
        corollary = base_term + (float(np.mean(norm_terms)) if norm_terms else math.nan)
        rows.append(
            LogDeltaRow(
                sigma=sigma,
                mean_log_inv_delta_lb=mean,
                stderr=stderr,
                log_m_over_sigma=math.log(m / sigma),
                corollary_rhs=corollary,
            )
        )
    return rows


def _format_cell(value) -> str:
    if isinstance(value, SolveStatus):
        return value.value
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(rows, path: str | Path, row_type=TrialRecord) -> None:
    """Write dataclass rows with a fixed header; floats get 17 significant digits.

    An empty row list still produces the header (schema from ``row_type``).
    The line terminator is pinned to "\\n" so identical inputs give
    byte-identical files on every platform.
    """
    if rows:
        row_type = type(rows[0])
    names = [f.name for f in dataclasses.fields(row_type)]
    header = [_CSV_NAME_OVERRIDES.get(name, name) for name in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(getattr(row, name)) for name in names])


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Read a JSON config mirroring the ExperimentConfig field names."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    opts_data = data.get("solver_options") or {}
    period = opts_data.get("termination_period")
    options = SolverOptions(
        gap_tolerance=float(opts_data.get("gap_tolerance", 1e-10)),
        max_iterations=int(opts_data.get("max_iterations", 500)),
        termination_period=int(period) if period is not None else None,
        attempt_termination=bool(opts_data.get("attempt_termination", True)),
    )
    return ExperimentConfig(
        base_instance=lp_from_dict(data["base_instance"]),
        sigma_list=tuple(float(s) for s in data["sigma_list"]),
        trials_per_sigma=int(data["trials_per_sigma"]),
        master_seed=int(data["master_seed"]),
        probe_count=int(data.get("probe_count", 0)),
        solver_options=options,
    )


def standard_base_instance(seed: int = 42, m: int = 6, n: int = 3) -> LinearProgram:
    """First normalized N(0,1) instance from the seed that the oracle
    certifies feasible, bounded, and unique; the canonical experiment base."""
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        lp = normalize_base(
            LinearProgram(
                A=rng.standard_normal((m, n)),
                b=rng.standard_normal(m),
                c=rng.standard_normal(n),
            )
        )
        orc = brute_force_solve(lp)
        if orc.status is SolveStatus.OPTIMAL and orc.unique:
            return lp
    raise RuntimeError("no certified base instance found within 1000 draws")
