"""Batch command-line front end.

Subcommands: solve, round, analyze, perturb, experiment, check-lemmas.
Exit codes: 0 success, 1 violation or failed verification, 2 usage/I-O error.
Indices printed for support sets are 1-based.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    DEFAULT_EPS_GRID,
    LogDeltaRow,
    load_experiment_config,
    log_delta_summary,
    run_experiment,
    tail_bound_report,
    write_csv,
)
from .ipm import SolverOptions, solve
from .lp import SolveStatus, load_lp, lp_to_dict, save_lp, validate
from .oracle import MAX_ORACLE_M, MAX_ORACLE_N, brute_force_solve
from .smoothing import (
    PerturbationSpec,
    normalize_base,
    perturb,
    run_ratio_sweep,
    run_tail_sweep,
    tail_to_log_expectation_check,
)
from .termination import (
    RoundingFailureError,
    candidate_supports,
    geometric_quantities,
    round_primal_dual,
    verify_candidate,
)

__all__ = ["main"]


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _fmt_vec(v) -> str:
    return "(" + ", ".join(_fmt(float(t)) for t in v) + ")"


def _fmt_set(indices) -> str:
    return "{" + ", ".join(str(i + 1) for i in indices) + "}"


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip() != ""])
    except ValueError as exc:
        raise SystemExit(f"could not parse vector {text!r}: {exc}") from exc


def _load_checked(path: str):
    lp = load_lp(path)
    violations = validate(lp)
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return None
    return lp


def _cmd_solve(args) -> int:
    lp = _load_checked(args.instance)
    if lp is None:
        return 1
    res = solve(lp, SolverOptions(max_iterations=args.max_iterations))
    print(f"status: {res.status.value}")
    print(f"iterations: {res.iterations}")
    print(f"terminated_exactly: {res.terminated_exactly}")
    if res.point is not None:
        print(f"x*: {_fmt_vec(res.point.x)}")
        print(f"y*: {_fmt_vec(res.point.y)}")
        print(f"objective: {_fmt(float(lp.c @ res.point.x))}")
    if res.gap_history:
        print(f"gap: {_fmt(res.gap_history[-1])}")
    return 0


def _cmd_round(args) -> int:
    lp = _load_checked(args.instance)
    if lp is None:
        return 1
    x = _parse_vector(args.x)
    if x.shape != (lp.n,):
        print(f"x has {x.shape[0]} entries, expected {lp.n}", file=sys.stderr)
        return 2
    sp = candidate_supports(lp, x)
    print(f"U: {_fmt_set(sp.U)}")
    print(f"V: {_fmt_set(sp.V)}")
    try:
        pt = round_primal_dual(lp, sp)
    except RoundingFailureError as exc:
        print(f"rounding failed: {exc}")
        return 1
    print(f"x_hat: {_fmt_vec(pt.x)}")
    print(f"y_hat: {_fmt_vec(pt.y)}")
    verified = verify_candidate(lp, pt)
    print(f"verified: {verified}")
    return 0 if verified else 1


def _optimal_pair(lp):
    """Exact pair via enumeration when affordable, else via the solver."""
    if lp.n <= MAX_ORACLE_N and lp.m <= MAX_ORACLE_M:
        orc = brute_force_solve(lp)
        if orc.status is not SolveStatus.OPTIMAL:
            return None, orc.status
        return (orc.point, orc.supports), SolveStatus.OPTIMAL
    res = solve(lp, SolverOptions())
    if res.status is not SolveStatus.OPTIMAL or not res.terminated_exactly:
        return None, res.status
    return (res.point, res.supports), SolveStatus.OPTIMAL


def _cmd_analyze(args) -> int:
    lp = _load_checked(args.instance)
    if lp is None:
        return 1
    pair, status = _optimal_pair(lp)
    if pair is None:
        print(f"status: {status.value} (no optimal pair to analyze)")
        return 1
    point, supports = pair
    gq = geometric_quantities(lp, point, supports)
    print(f"U: {_fmt_set(supports.U)}")
    print(f"V: {_fmt_set(supports.V)}")
    for name, value in [
        ("alpha_P", gq.alpha_P),
        ("alpha_D", gq.alpha_D),
        ("beta_P", gq.beta_P),
        ("beta_D", gq.beta_D),
        ("gamma", gq.gamma),
        ("lambda", gq.lambda_),
        ("delta_lb", gq.delta_lb),
    ]:
        print(f"{name}: {_fmt(value)}")
    return 0


def _cmd_perturb(args) -> int:
    lp = _load_checked(args.instance)
    if lp is None:
        return 1
    if args.normalize:
        lp = normalize_base(lp)
    else:
        norms = (np.linalg.norm(lp.A, "fro"), np.linalg.norm(lp.b), np.linalg.norm(lp.c))
        if max(norms) > 1.0 + 1e-12:
            print(
                "warning: base is not normalized (use --normalize); "
                f"norms are {tuple(float(f'{v:.6g}') for v in norms)}",
                file=sys.stderr,
            )
    out = perturb(lp, PerturbationSpec(sigma=args.sigma, master_seed=args.seed), args.trial)
    if args.out:
        save_lp(out, args.out)
        print(f"wrote {args.out}")
    else:
        json.dump(lp_to_dict(out), sys.stdout, indent=2)
        print()
    return 0


def _cmd_experiment(args) -> int:
    cfg = load_experiment_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg)
    write_csv(records, out_dir / "records.csv")
    print(f"wrote {out_dir / 'records.csv'} ({len(records)} records)")
    by_sigma = {s: [r for r in records if r.sigma == s] for s in cfg.sigma_list}
    for quantity in ("alpha", "beta", "gamma"):
        for sigma, recs in by_sigma.items():
            rows = tail_bound_report(recs, quantity, DEFAULT_EPS_GRID)
            name = f"{quantity}_report_sigma_{sigma:g}.csv"
            write_csv(rows, out_dir / name)
            print(f"wrote {out_dir / name}")
    if len(cfg.sigma_list) >= 2:
        summary = log_delta_summary(by_sigma)
        write_csv(summary, out_dir / "log_delta_summary.csv", row_type=LogDeltaRow)
        print(f"wrote {out_dir / 'log_delta_summary.csv'}")
    return 0


def _cmd_check_lemmas(args) -> int:
    ratio_pass, ratio_fail = run_ratio_sweep(args.samples, args.seed)
    print(f"density-ratio bound: {ratio_pass} passed, {ratio_fail} failed")
    tail_pass, tail_fail = run_tail_sweep(args.samples, args.seed + 1)
    print(f"conditional-tail bound: {tail_pass} passed, {tail_fail} failed")
    rng = np.random.default_rng(args.seed + 2)
    check = tail_to_log_expectation_check(
        rng.uniform(0.0, 1.0, size=max(args.samples, 2)) + 1e-300, np.e, 1.0
    )
    print(
        "log-expectation bound: mean "
        f"{_fmt(check.empirical_mean)} vs bound {_fmt(check.bound)} -> "
        f"{'ok' if check.holds else 'FAILED'}"
    )
    failed = ratio_fail + tail_fail + (0 if check.holds else 1)
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpterm",
        description="Interior-point LP solving with exact support rounding, "
        "plus Gaussian-perturbation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance and print the optimal pair")
    p.add_argument("instance")
    p.add_argument("--max-iterations", type=int, default=500)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("round", help="guess supports from a point and round")
    p.add_argument("instance")
    p.add_argument("--x", required=True, help="comma-separated point, e.g. 0.98,0.49")
    p.set_defaults(func=_cmd_round)

    p = sub.add_parser("analyze", help="print the support geometry incl. delta_lb")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("perturb", help="write a Gaussian-perturbed copy of an instance")
    p.add_argument("instance")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--normalize", action="store_true", help="normalize the base first")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory for CSVs")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("check-lemmas", help="run the Gaussian bound sweeps")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check_lemmas)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        if isinstance(code, str):
            print(code, file=sys.stderr)
            return 2
        return int(code or 0)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
