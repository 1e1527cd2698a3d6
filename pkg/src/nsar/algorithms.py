"""Fixed-budget top-m identifiers: nonlinear accepts/rejects and baselines.

nsar_run deactivates one arm per round, accepting or rejecting it, with the
pull schedule scaling like (remaining arms)^p. sar_run is the p = 1 special
case. uni_run splits the budget evenly and keeps the empirically best m.
All runs return a Recommendation with the accepted arms in acceptance order,
an optional per-round audit trail, and the pull ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PullLedger, RewardStream
from .complexity import BudgetTooSmall, schedule

__all__ = [
    "DegenerateM",
    "RoundRecord",
    "Recommendation",
    "empirical_gaps",
    "nsar_run",
    "sar_run",
    "uni_run",
]


class DegenerateM(ValueError):
    """empirical_gaps needs 1 <= m <= L-1; the caller owns the m=0 and m=L cases."""


def empirical_gaps(sorted_means: np.ndarray, m: int) -> np.ndarray:
    """Empirical boundary gaps over means already sorted descending.

    Position l (0-based) gets sorted_means[l] - sorted_means[m] for l < m,
    and sorted_means[m-1] - sorted_means[l] otherwise.
    """
    sm = np.asarray(sorted_means, dtype=np.float64)
    L = sm.shape[0]
    if not (1 <= m <= L - 1):
        raise DegenerateM(f"need 1 <= m <= L-1, got m={m}, L={L}")
    g = np.empty(L, dtype=np.float64)
    g[:m] = sm[:m] - sm[m]
    g[m:] = sm[m - 1] - sm[m:]
    return g


@dataclass
class RoundRecord:
    """Snapshot of one elimination round at decision time."""

    r: int
    active: np.ndarray
    n_r: int
    means: np.ndarray  # aligned with `active`
    sigma: np.ndarray  # arm ids, empirical means descending
    gaps: np.ndarray | None  # in sigma order; None on a degenerate round
    deactivated: int
    decision: str  # "accepted" | "rejected"
    m_before: int
    m_after: int
    tie_break: bool = False
    degenerate: str | None = None  # "m-zero" | "m-full" when the fallback rule fired


@dataclass
class Recommendation:
    """Output of one identifier run: accepted arms plus provenance."""

    accepted: list[int]
    audit: list[RoundRecord] = field(default_factory=list)
    ledger: PullLedger = None


def _argmax_last(g: np.ndarray) -> int:
    """Index of the maximum, taking the last position among exact ties."""
    return g.shape[0] - 1 - int(np.argmax(g[::-1]))


def nsar_run(stream: RewardStream, t: int, p: float, audit: bool = True) -> Recommendation:
    """Run the nonlinear accepts/rejects identifier for budget t and exponent p.

    Each of the K-1 rounds tops every active arm up to the scheduled count,
    sorts the empirical means, and deactivates the arm with the largest
    empirical boundary gap (ties resolved toward the lowest empirical mean,
    then the largest sort position); the arm is accepted exactly when its
    empirical mean strictly exceeds the (m_r+1)-th largest. The survivor is
    accepted iff one acceptance slot is still open.

    With audit=False the per-round trail is skipped, which matters when
    millions of trials run back to back.
    """
    inst = stream.instance
    k = inst.k
    m_target = inst.m
    sched = schedule(t, k, p)
    n = sched.n

    sums = np.zeros(k, dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    active = np.arange(k, dtype=np.int64)
    accepted: list[int] = []
    records: list[RoundRecord] = []
    m_r = m_target
    n_prev = 0

    for r in range(1, k):
        n_r = int(n[r - 1])
        c = n_r - n_prev
        if c > 0:
            sums[active] += stream.pull_round_sums(active, c)
            counts[active] += c
        means_active = sums[active] / counts[active]
        order = np.lexsort((active, -means_active))
        sm = means_active[order]
        L = active.shape[0]

        degenerate = None
        g = None
        if m_r == 0:
            pos = L - 1
            accept = False
            degenerate = "m-zero"
        elif m_r == L:
            pos = 0
            accept = True
            degenerate = "m-full"
        else:
            g = empirical_gaps(sm, m_r)
            pos = _argmax_last(g)
            accept = bool(sm[pos] > sm[m_r])
        deact = int(active[order[pos]])
        m_after = m_r - 1 if accept else m_r
        if accept:
            accepted.append(deact)
        if audit:
            records.append(
                RoundRecord(
                    r=r,
                    active=active.copy(),
                    n_r=n_r,
                    means=means_active.copy(),
                    sigma=active[order].copy(),
                    gaps=None if g is None else g.copy(),
                    deactivated=deact,
                    decision="accepted" if accept else "rejected",
                    m_before=m_r,
                    m_after=m_after,
                    tie_break=bool(g is not None and np.count_nonzero(g == g[pos]) > 1),
                    degenerate=degenerate,
                )
            )
        active = active[active != deact]
        m_r = m_after
        n_prev = n_r

    # Exactly one arm survives; it takes the last slot iff one is still open.
    # Equivalent to "accepted m-1 arms before the final round" whenever the
    # final round could not itself accept, and stays consistent when the
    # forced-accept fallback fired earlier.
    if m_r == 1:
        accepted.append(int(active[0]))
    if len(accepted) != m_target:
        raise AssertionError(
            f"run ended with {len(accepted)} accepted arms, expected {m_target}"
        )
    return Recommendation(accepted=accepted, audit=records, ledger=stream.ledger.snapshot())


def sar_run(stream: RewardStream, t: int, audit: bool = True) -> Recommendation:
    """Successive accepts/rejects baseline: nsar_run with p = 1."""
    return nsar_run(stream, t, 1.0, audit=audit)


def uni_run(stream: RewardStream, t: int, audit: bool = True) -> Recommendation:
    """Uniform-allocation baseline.

    Every arm gets floor(t/K) pulls and the first t mod K arms one extra, so
    exactly t pulls are consumed; the m arms with the largest empirical means
    win, ties to the lower index. The audit trail is always empty, there are
    no rounds to record.
    """
    inst = stream.instance
    k = inst.k
    if t < k:
        raise BudgetTooSmall(f"uniform allocation needs t >= K, got t={t}, K={k}")
    base = t // k
    rem = t - base * k
    arms = np.arange(k, dtype=np.int64)
    sums = np.zeros(k, dtype=np.float64)
    counts = np.full(k, base, dtype=np.int64)
    if base > 0:
        sums += stream.pull_round_sums(arms, base)
    if rem > 0:
        sums[:rem] += stream.pull_round_sums(arms[:rem], 1)
        counts[:rem] += 1
    means = sums / counts
    order = np.lexsort((arms, -means))
    accepted = [int(a) for a in order[: inst.m]]
    return Recommendation(accepted=accepted, audit=[], ledger=stream.ledger.snapshot())
