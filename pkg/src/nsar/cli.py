"""Command-line front end.

Subcommands: simulate (config-driven Monte Carlo to CSV), schedule (print a
pull schedule), bound (hardness measures and the error bound for one
instance), classify (gap-shape regime and exponent recommendation), and
replicate (the full benchmark grid with report and figures).

Exit codes: 0 success, 2 usage or config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .core import make_instance
from .complexity import (
    complexity_scores,
    gaps,
    h_measures,
    prop1_bound,
    regime_classify,
    schedule,
    table1_constants,
)
from .harness import (
    DEFAULT_SEED,
    ConfigError,
    load_config_file,
    persist,
    run_experiment,
)

__all__ = ["main", "entrypoint"]


class UsageError(Exception):
    """Bad flags, bad config, or an invalid instance; exits with code 2."""


def _parse_means(text: str):
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse means {text!r}: {exc}") from exc
    if not values:
        raise UsageError("means list is empty")
    return values


def _instance_from_args(args):
    try:
        return make_instance(_parse_means(args.means), m=args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_schedule(args) -> int:
    try:
        sched = schedule(args.t, args.k, args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    pulls = sched.per_round_pulls()
    active = sched.active_counts()
    print(f"budget T={sched.t}, K={sched.k}, p={sched.p:g}, C_p={sched.cp:.6f}")
    print(f"{'r':>4} {'active':>7} {'n_r':>8} {'pulls/arm':>10} {'consumed':>9}")
    for r in range(1, sched.k):
        consumed = int(active[r - 1] * pulls[r - 1])
        print(f"{r:>4} {active[r - 1]:>7} {sched.n[r - 1]:>8} {pulls[r - 1]:>10} {consumed:>9}")
    print(f"total consumed: {sched.total_consumed()} of budget {sched.t}")
    return 0


def cmd_bound(args) -> int:
    instance = _instance_from_args(args)
    try:
        profile = gaps(instance)
        rep = h_measures(profile, args.p)
        bound = prop1_bound(args.t, instance.k, args.p, profile)
        scores = complexity_scores(profile, args.p, args.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"K={instance.k}, M={instance.m}, T={args.t}, p={args.p:g}")
    print(f"gaps (ascending): {', '.join(f'{d:.6g}' for d in profile.delta_sorted)}")
    print(f"H1={rep.h1:.6g}  H2={rep.h2:.6g}  H(p)={rep.hp:.6g}")
    print(f"C_p={rep.cp:.6g}  logbar(K)={rep.logbar_k:.6g}")
    print(f"error bound: {bound:.6g}" + ("  (vacuous, exceeds 1)" if bound > 1.0 else ""))
    if args.p == 1.0:
        print("note: nsar with p=1 is sar; their scores coincide")
    if instance.m == 1:
        consts = table1_constants(profile, args.p)
        print("single-best-arm decay constants (rate ~ beta*exp(-T/alpha)):")
        for name in ("sr", "sh", "nse"):
            c = consts[name]
            print(f"  {name:<4} alpha={c['alpha']:.6g}  beta={c['beta']:.6g}")
    print(f"order-level complexity scores at delta={args.delta:g} ({scores['note']}):")
    for name in ("sar", "at_lucb", "nsar"):
        print(f"  {name:<8} {scores[name]:.6g}")
    return 0


def cmd_classify(args) -> int:
    instance = _instance_from_args(args)
    result = regime_classify(gaps(instance))
    print(f"{result.regime}, recommend {result.recommendation}")
    print(f"reason: {result.reason}")
    return 0


def cmd_simulate(args) -> int:
    try:
        configs = load_config_file(args.config)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    if args.seed is not None:
        from dataclasses import replace

        configs = [replace(cfg, master_seed=args.seed) for cfg in configs]
    results = []
    for cfg in configs:
        est = run_experiment(cfg, workers=args.workers)
        results.append((cfg, est))
        print(
            f"{cfg.algorithm.label():<14} setup={cfg.setup if cfg.setup is not None else 'custom'} "
            f"M={cfg.m} T~{est.budget_mean:g} p_hat={est.p_hat:.5f} "
            f"[{est.ci_low:.5f}, {est.ci_high:.5f}] ({est.wall_ms} ms)"
        )
    persist(results, args.out, args.jsonl)
    print(f"wrote {len(results)} rows to {args.out}")
    return 0


def cmd_replicate(args) -> int:
    from .replication import replicate

    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    claims = replicate(
        args.out_dir,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
        rerun_trials=args.rerun_trials,
        figures=not args.no_figures,
    )
    for claim in claims:
        print(f"[{claim.verdict}] ({claim.claim_id}) {claim.description}")
    print(f"outputs written under {args.out_dir}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsar",
        description="fixed-budget top-M arm identification toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    default_workers = os.cpu_count() or 1

    p_sim = sub.add_parser("simulate", help="run experiments from a JSON config")
    p_sim.add_argument("config", help="path to the experiment config (JSON)")
    p_sim.add_argument("--out", default="results.csv", help="output CSV path")
    p_sim.add_argument("--jsonl", default=None, help="optional JSON-lines mirror path")
    p_sim.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p_sim.add_argument("--workers", type=int, default=default_workers)
    p_sim.set_defaults(func=cmd_simulate)

    p_sch = sub.add_parser("schedule", help="print the per-round pull schedule")
    p_sch.add_argument("--t", type=int, required=True, help="total budget")
    p_sch.add_argument("--k", type=int, required=True, help="number of arms")
    p_sch.add_argument("--p", type=float, default=1.0, help="nonlinearity exponent in (0,2]")
    p_sch.set_defaults(func=cmd_schedule)

    p_bnd = sub.add_parser("bound", help="hardness measures and the error bound")
    p_bnd.add_argument("--means", required=True, help="comma-separated arm means")
    p_bnd.add_argument("--m", type=int, required=True, help="target count")
    p_bnd.add_argument("--t", type=int, required=True, help="total budget")
    p_bnd.add_argument("--p", type=float, default=1.0)
    p_bnd.add_argument("--delta", type=float, default=0.1, help="confidence for the score table")
    p_bnd.set_defaults(func=cmd_bound)

    p_cls = sub.add_parser("classify", help="gap-shape regime and exponent recommendation")
    p_cls.add_argument("--means", required=True, help="comma-separated arm means")
    p_cls.add_argument("--m", type=int, required=True)
    p_cls.set_defaults(func=cmd_classify)

    p_rep = sub.add_parser("replicate", help="run the full benchmark grid")
    p_rep.add_argument("--out-dir", default="replication", help="output directory")
    p_rep.add_argument("--trials", type=int, default=4000)
    p_rep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_rep.add_argument("--workers", type=int, default=default_workers)
    p_rep.add_argument(
        "--rerun-trials",
        type=int,
        default=20000,
        help="trial count for retrying unsettled comparisons (no retry if <= --trials)",
    )
    p_rep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_rep.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
