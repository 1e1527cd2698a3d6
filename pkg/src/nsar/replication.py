"""Full benchmark grid: six setups, two target sizes, seven identifiers.

Runs the Monte Carlo comparison at scale, evaluates the expected orderings
between the identifiers, and writes a results CSV, a plain-text report, and
bar-chart figures. Orderings are only declared settled when the 95% Wilson
intervals of the two estimates do not overlap; unsettled comparisons are
retried once at a larger trial count before a verdict.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .harness import (
    AlgorithmSpec,
    ErrorEstimate,
    ExperimentConfig,
    persist,
    run_experiment,
)

__all__ = [
    "GRID_EXPONENTS",
    "Claim",
    "grid_algorithms",
    "run_grid",
    "evaluate_claims",
    "write_report",
    "replicate",
]

GRID_EXPONENTS = (0.7, 0.85, 1.1, 1.2, 1.3)

RESULTS_CSV = "results.csv"
RESULTS_JSONL = "results.jsonl"
RERUNS_CSV = "reruns.csv"
REPORT_TXT = "report.txt"


def grid_algorithms() -> list[AlgorithmSpec]:
    specs = [AlgorithmSpec("nsar", p) for p in GRID_EXPONENTS]
    specs.append(AlgorithmSpec("sar"))
    specs.append(AlgorithmSpec("uni"))
    return specs


@dataclass
class Claim:
    claim_id: str
    description: str
    verdict: str = "INCONCLUSIVE"
    lines: list[str] = field(default_factory=list)


Cell = tuple[ExperimentConfig, ErrorEstimate]
PanelKey = tuple[int, int]  # (setup, m)


def run_grid(
    trials: int,
    seed: int,
    workers: int = 1,
    k: int = 50,
    m_values: tuple[int, ...] = (2, 4),
    setups: tuple[int, ...] = (1, 2, 3, 4, 5, 6),
) -> list[Cell]:
    """Run the full (setup, m, algorithm) grid; one estimate per cell."""
    cells: list[Cell] = []
    for setup in setups:
        for m in m_values:
            for spec in grid_algorithms():
                cfg = ExperimentConfig(
                    setup=setup, k=k, m=m, algorithm=spec, trials=trials, master_seed=seed
                )
                cells.append((cfg, run_experiment(cfg, workers=workers)))
    return cells


def _index(cells: list[Cell]) -> dict[PanelKey, dict[str, Cell]]:
    table: dict[PanelKey, dict[str, Cell]] = {}
    for cfg, est in cells:
        table.setdefault((cfg.setup, cfg.m), {})[cfg.algorithm.token()] = (cfg, est)
    return table


def _separated_below(a: ErrorEstimate, b: ErrorEstimate) -> str:
    """Is a's error frequency below b's with non-overlapping intervals?"""
    if a.ci_high < b.ci_low:
        return "win"
    if a.ci_low > b.ci_high:
        return "loss"
    return "open"


def _fmt(est: ErrorEstimate) -> str:
    return f"{est.p_hat:.4f} [{est.ci_low:.4f}, {est.ci_high:.4f}] (n={est.trials})"


@dataclass
class _Comparison:
    """Hypothesis that `low` has strictly smaller error than `high` in a panel."""

    panel: PanelKey
    low: str
    high: str

    def state(self, table) -> str:
        a = table[self.panel][self.low][1]
        b = table[self.panel][self.high][1]
        return _separated_below(a, b)

    def cells(self) -> list[tuple[PanelKey, str]]:
        return [(self.panel, self.low), (self.panel, self.high)]

    def describe(self, table) -> str:
        setup, m = self.panel
        a_cfg, a = table[self.panel][self.low]
        b_cfg, b = table[self.panel][self.high]
        mark = {"win": "<", "loss": ">", "open": "~"}[self.state(table)]
        return (
            f"setup {setup} M={m}: {a_cfg.algorithm.label()} {_fmt(a)} "
            f"{mark} {b_cfg.algorithm.label()} {_fmt(b)}"
        )


def _claim_specs(m_values, setups) -> list[tuple[str, str, list]]:
    """The four expected orderings, parameterized by the panel grid."""
    high_ps = [f"nsar:{p!r}" for p in (1.1, 1.2, 1.3)]
    low_ps = [f"nsar:{p!r}" for p in (0.7, 0.85)]
    others = [s.token() for s in grid_algorithms() if s.name != "uni"]

    claims = []
    if setups:
        comps_a = [
            _Comparison((s, m), tok, "uni")
            for s in setups
            for m in m_values
            for tok in others
        ]
        claims.append(("a", "uni has the highest error frequency in every panel", [("all", comps_a)]))
    if 1 in setups:
        comps_b = [_Comparison((1, m), tok, "sar") for m in m_values for tok in low_ps]
        claims.append(("b", "in setup 1, nsar at p=0.7 and p=0.85 each beat sar", [("all", comps_b)]))
    c_setups = [s for s in (2, 3, 6) if s in setups]
    if c_setups:
        groups = [
            (f"setup {s} M={m}", [_Comparison((s, m), tok, "sar") for tok in high_ps])
            for s in c_setups
            for m in m_values
        ]
        claims.append(("c", "in setups 2, 3, and 6, at least two of p in {1.1, 1.2, 1.3} beat sar", groups))
    d_setups = [s for s in (4, 5) if s in setups]
    if d_setups:
        groups = [
            (f"setup {s} M={m}", [_Comparison((s, m), tok, "sar") for tok in high_ps])
            for s in d_setups
            for m in m_values
        ]
        claims.append(("d", "in setups 4 and 5, at least two of p in {1.1, 1.2, 1.3} beat sar", groups))
    return claims


def _group_verdict(comps: list[_Comparison], table, need: int) -> str:
    states = [c.state(table) for c in comps]
    if sum(s == "win" for s in states) >= need:
        return "PASS"
    if sum(s == "loss" for s in states) > len(states) - need:
        return "FAIL"
    return "INCONCLUSIVE"


def evaluate_claims(
    cells: list[Cell],
    workers: int = 1,
    rerun_trials: int = 20000,
) -> tuple[list[Claim], list[Cell]]:
    """Judge the expected orderings, rerunning unsettled cells once if allowed.

    A comparison counts only when the Wilson intervals separate. Cells behind
    comparisons that are still needed and not yet settled are rerun at
    rerun_trials (when that exceeds their original trial count) before any
    FAIL or INCONCLUSIVE verdict is final. Returns the claims and whatever
    rerun cells were produced.
    """
    table = _index(cells)
    m_values = tuple(sorted({m for _, m in table}))
    setups = tuple(sorted({s for s, _ in table}))
    specs = _claim_specs(m_values, setups)

    def group_need(claim_id: str) -> int:
        return 2 if claim_id in ("c", "d") else None  # None = all comparisons

    # first pass: find comparisons that still matter and are not settled wins
    pending: set[tuple[PanelKey, str]] = set()
    base_trials = cells[0][0].trials if cells else 0
    allow_rerun = rerun_trials is not None and rerun_trials > base_trials
    if allow_rerun:
        for claim_id, _desc, groups in specs:
            need = group_need(claim_id)
            for _label, comps in groups:
                needed = need if need is not None else len(comps)
                if _group_verdict(comps, table, needed) == "PASS":
                    continue
                for comp in comps:
                    if comp.state(table) != "win":
                        pending.update(comp.cells())

    reruns: list[Cell] = []
    for panel, token in sorted(pending):
        cfg, _ = table[panel][token]
        rerun_cfg = replace(cfg, trials=rerun_trials)
        est = run_experiment(rerun_cfg, workers=workers)
        table[panel][token] = (rerun_cfg, est)
        reruns.append((rerun_cfg, est))

    claims: list[Claim] = []
    for claim_id, desc, groups in specs:
        need = group_need(claim_id)
        verdicts = []
        lines = []
        for label, comps in groups:
            needed = need if need is not None else len(comps)
            verdict = _group_verdict(comps, table, needed)
            verdicts.append(verdict)
            if label != "all":
                wins = sum(c.state(table) == "win" for c in comps)
                lines.append(f"  {label}: {wins}/{len(comps)} settled wins -> {verdict}")
            lines.extend("    " + c.describe(table) for c in comps)
        if all(v == "PASS" for v in verdicts):
            overall = "PASS"
        elif any(v == "FAIL" for v in verdicts):
            overall = "FAIL"
        else:
            overall = "INCONCLUSIVE"
        claims.append(Claim(claim_id=claim_id, description=desc, verdict=overall, lines=lines))
    return claims, reruns


def write_report(path, claims: list[Claim], cells: list[Cell], meta: dict) -> None:
    """Plain-text replication report: configuration, panel table, claim verdicts."""
    lines = []
    lines.append("top-m identification benchmark report")
    lines.append("=" * 38)
    for key, value in meta.items():
        lines.append(f"{key}: {value}")
    lines.append("")
    lines.append("the anytime at-lucb baseline is not implemented; orderings are judged")
    lines.append("over the seven identifiers listed above.")
    lines.append("")
    lines.append("panels (error frequency with 95% Wilson interval):")
    current_panel = None
    for cfg, est in cells:
        panel = (cfg.setup, cfg.m)
        if panel != current_panel:
            lines.append(f"  setup {cfg.setup}, M={cfg.m}, T={int(est.budget_mean)}:")
            current_panel = panel
        lines.append(f"    {cfg.algorithm.label():<14} {_fmt(est)}")
    lines.append("")
    lines.append("claims:")
    for claim in claims:
        lines.append(f"[{claim.verdict}] ({claim.claim_id}) {claim.description}")
        lines.extend(claim.lines)
    lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def replicate(
    out_dir,
    trials: int = 4000,
    seed: int = 7,
    workers: int = 1,
    rerun_trials: int = 20000,
    figures: bool = True,
    k: int = 50,
    m_values: tuple[int, ...] = (2, 4),
    setups: tuple[int, ...] = (1, 2, 3, 4, 5, 6),
) -> list[Claim]:
    """Run the grid, judge the orderings, and write CSV, report, and figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    cells = run_grid(trials, seed, workers=workers, k=k, m_values=m_values, setups=setups)
    persist(cells, out / RESULTS_CSV, out / RESULTS_JSONL)
    claims, reruns = evaluate_claims(cells, workers=workers, rerun_trials=rerun_trials)
    if reruns:
        persist(reruns, out / RERUNS_CSV)
    meta = {
        "generated_unix": int(started),
        "arms": k,
        "target_sizes": list(m_values),
        "setups": list(setups),
        "trials_per_cell": trials,
        "rerun_trials": rerun_trials,
        "master_seed": seed,
        "budget_rule": "ceil of summed inverse squared gaps",
        "algorithms": ", ".join(s.label() for s in grid_algorithms()),
        "rerun_cells": len(reruns),
    }
    write_report(out / REPORT_TXT, claims, cells, meta)
    if figures:
        from .figures import render_replication_figures

        render_replication_figures(cells, out)
    return claims
