"""Gap profiles, hardness measures, budget schedules, and error bounds.

All quantities are numeric evaluations for concrete instances. The central
objects are the per-arm distance to the top-m boundary (the "gap"), the
hardness measures built from gaps, the normalizing constant C_p of the
nonlinear pull schedule, and the exponential misidentification bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BadDimensions, BanditInstance, rank_order

__all__ = [
    "BadExponent",
    "BudgetTooSmall",
    "NotSingleArm",
    "GapProfile",
    "ComplexityReport",
    "BudgetSchedule",
    "RegimeResult",
    "gaps",
    "h_measures",
    "c_p",
    "logbar",
    "schedule",
    "prop1_bound",
    "table1_constants",
    "complexity_scores",
    "regime_classify",
]


class BadExponent(ValueError):
    """Nonlinearity exponent outside (0, 2]."""


class BudgetTooSmall(ValueError):
    """Budget does not admit the requested run (t <= K for schedules, t < K for uniform)."""


class NotSingleArm(ValueError):
    """Operation defined only for m = 1 profiles."""


def _check_exponent(p: float) -> float:
    p = float(p)
    if not (0.0 < p <= 2.0):
        raise BadExponent(f"exponent must lie in (0, 2], got {p}")
    return p


@dataclass(frozen=True)
class GapProfile:
    """Per-arm boundary gaps and their ascending sort.

    delta[i] is arm i's distance to the top-m boundary: arms ranked in the
    top m measure against the (m+1)-th largest mean, all others against the
    m-th largest. Every entry is strictly positive for a valid instance.
    """

    delta: np.ndarray
    delta_sorted: np.ndarray
    m: int

    def __post_init__(self):
        for name in ("delta", "delta_sorted"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return int(self.delta.shape[0])

    @classmethod
    def from_deltas(cls, delta, m: int) -> "GapProfile":
        """Build a profile directly from gap values (for synthetic studies)."""
        delta = np.asarray(delta, dtype=np.float64)
        if delta.ndim != 1 or delta.shape[0] < 2:
            raise BadDimensions(f"need at least 2 gaps, got shape {delta.shape}")
        if not (1 <= m < delta.shape[0]):
            raise BadDimensions(f"need 1 <= m < K, got m={m}, K={delta.shape[0]}")
        if np.any(delta <= 0.0) or not np.all(np.isfinite(delta)):
            raise ValueError("gaps must be strictly positive and finite")
        return cls(delta=delta, delta_sorted=np.sort(delta), m=m)


def gaps(instance: BanditInstance) -> GapProfile:
    """Gap profile of an instance, computed from each arm's rank among the means.

    Ties among means are ranked lower-index-first, which reduces to the
    plain sorted-means formula whenever the means are already sorted.
    """
    means = instance.means
    m = instance.m
    order = rank_order(means)
    mu_m = means[order[m - 1]]
    mu_m1 = means[order[m]]
    in_top = np.zeros(instance.k, dtype=bool)
    in_top[order[:m]] = True
    delta = np.where(in_top, means - mu_m1, mu_m - means)
    return GapProfile(delta=delta, delta_sorted=np.sort(delta), m=m)


@dataclass(frozen=True)
class ComplexityReport:
    """Hardness measures of one gap profile at one exponent.

    h1 sums inverse squared gaps over all arms; h2 and hp take the max of
    (sorted-position weight) / (sorted gap)^2 with the smallest-gap position
    excluded. hp at p = 1 equals h2 exactly, and cp at p = 1 equals logbar_k.
    """

    h1: float
    h2: float
    hp: float
    p: float
    cp: float
    logbar_k: float


def c_p(k: int, p: float) -> float:
    """Schedule normalizer: 2^(-p) + sum of r^(-p) for r in 2..k."""
    if k < 2:
        raise BadDimensions(f"need k >= 2, got {k}")
    p = float(p)
    if p <= 0.0:
        raise BadExponent(f"exponent must be positive, got {p}")
    r = np.arange(2, k + 1, dtype=np.float64)
    return float(2.0 ** (-p) + np.sum(r ** (-p)))


def logbar(k: int) -> float:
    """0.5 + sum of 1/i for i in 2..k."""
    if k < 2:
        raise BadDimensions(f"need k >= 2, got {k}")
    i = np.arange(2, k + 1, dtype=np.float64)
    return float(0.5 + np.sum(1.0 / i))


def h_measures(profile: GapProfile, p: float) -> ComplexityReport:
    """Evaluate h1, h2, and hp on a profile, plus the matching cp and logbar."""
    p = _check_exponent(p)
    k = profile.k
    ds = profile.delta_sorted
    inv_sq = ds[1:] ** -2.0
    pos = np.arange(2, k + 1, dtype=np.float64)
    h2 = float(np.max(pos * inv_sq))
    hp = float(np.max(pos**p * inv_sq))
    h1 = float(np.sum(profile.delta ** -2.0))
    return ComplexityReport(h1=h1, h2=h2, hp=hp, p=p, cp=c_p(k, p), logbar_k=logbar(k))


@dataclass(frozen=True)
class BudgetSchedule:
    """Cumulative per-arm pull counts n_r for the K-1 elimination rounds.

    n[r-1] holds n_r = ceil((t - k) / (cp * (k - r + 1)^p)); the implicit
    n_0 is 0. A full run pulls each active arm up to n_r by round r, so the
    total consumed is n_{K-1} + sum of all n_r, which never exceeds t.
    """

    t: int
    k: int
    p: float
    cp: float
    n: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64)
        n.setflags(write=False)
        object.__setattr__(self, "n", n)

    def per_round_pulls(self) -> np.ndarray:
        """Pulls per active arm in each round: n_r - n_{r-1}."""
        return np.diff(self.n, prepend=0)

    def active_counts(self) -> np.ndarray:
        """Active-set sizes K+1-r for r in 1..K-1."""
        return self.k + 1 - np.arange(1, self.k, dtype=np.int64)

    def total_consumed(self) -> int:
        """Pulls used by a complete run: n_{K-1} + sum of n_r."""
        return int(self.n[-1] + self.n.sum())


def schedule(t: int, k: int, p: float) -> BudgetSchedule:
    """Build the pull schedule for budget t, k arms, exponent p."""
    if k < 2:
        raise BadDimensions(f"need k >= 2, got {k}")
    if t <= k:
        raise BudgetTooSmall(f"budget {t} must exceed the number of arms {k}")
    p = _check_exponent(p)
    cp = c_p(k, p)
    r = np.arange(1, k, dtype=np.float64)
    n = np.ceil((t - k) / (cp * (k - r + 1.0) ** p)).astype(np.int64)
    return BudgetSchedule(t=int(t), k=int(k), p=p, cp=cp, n=n)


def prop1_bound(t: int, k: int, p: float, profile: GapProfile) -> float:
    """Exponential misidentification bound 2 k^2 exp(-(t-k) / (8 cp hp)).

    Returns the raw value, which can exceed 1 for small budgets; callers
    that want a probability should clamp for display.
    """
    if k != profile.k:
        raise BadDimensions(f"k={k} does not match profile with {profile.k} arms")
    if t <= k:
        raise BudgetTooSmall(f"budget {t} must exceed the number of arms {k}")
    rep = h_measures(profile, p)
    return float(2.0 * k * k * math.exp(-(t - k) / (8.0 * rep.cp * rep.hp)))


def table1_constants(profile: GapProfile, p: float) -> dict[str, dict[str, float]]:
    """Decay constants (alpha, beta) for the classic single-best-arm methods.

    The misidentification rate of each method decays like beta * exp(-t / alpha).
    Covers successive rejects (sr), sequential halving (sh), and nonlinear
    sequential elimination (nse) at the given exponent. Only defined for m = 1.
    """
    if profile.m != 1:
        raise NotSingleArm(f"single-arm constants need m=1, got m={profile.m}")
    rep = h_measures(profile, p)
    k = profile.k
    sr_alpha = rep.h2 * rep.logbar_k
    nse_alpha = rep.hp * rep.cp
    log2k = math.log2(k)
    return {
        "sr": {"alpha": sr_alpha, "beta": 0.5 * k * (k - 1) * math.exp(k / sr_alpha)},
        "sh": {"alpha": 8.0 * rep.h2 * log2k, "beta": 3.0 * log2k},
        "nse": {"alpha": nse_alpha, "beta": (k - 1) * math.exp(k / nse_alpha)},
    }


def complexity_scores(profile: GapProfile, p: float, delta: float) -> dict:
    """Order-level sampling-complexity comparators at confidence delta.

    The values carry no hidden constants and are comparable only in order of
    magnitude between methods, never as literal pull counts.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"confidence delta must lie in (0, 1), got {delta}")
    rep = h_measures(profile, p)
    k = profile.k
    log_k_delta = math.log(k / delta)
    return {
        "sar": rep.h2 * rep.logbar_k * log_k_delta,
        "at_lucb": rep.h1 * math.log(rep.h1 / delta),
        "nsar": rep.hp * rep.cp * log_k_delta,
        "note": "order-level comparators; constant factors are not modeled",
    }


@dataclass(frozen=True)
class RegimeResult:
    regime: str
    p_low: float | None
    p_high: float | None
    reason: str

    @property
    def recommendation(self) -> str:
        if self.regime == "regime-1":
            return "p in (0,1)"
        if self.regime == "regime-2":
            return "p in (1,2]"
        return "no recommendation"


def regime_classify(profile: GapProfile) -> RegimeResult:
    """Classify the gap shape into the two regimes that favor p<1 or p>1.

    regime-2 (checked first): at most max(3, 0.1K) gaps are comparable to the
    smallest (within a factor 2) and every remaining gap is at least 5x the
    smallest; a small competitive group against a much harder bulk favors
    p in (1,2]. regime-1: at least 90% of the gaps sit within 10% of the
    median gap; a near-uniform bulk favors p in (0,1). Anything else is
    unclassified. Cutoffs are calibration choices, not derived quantities.
    """
    ds = profile.delta_sorted
    k = ds.shape[0]
    d1 = float(ds[0])
    near = ds <= 2.0 * d1
    n_near = int(np.count_nonzero(near))
    far = ds[~near]
    if 0 < n_near <= max(3.0, 0.1 * k) and far.size > 0 and float(far.min()) >= 5.0 * d1:
        return RegimeResult(
            regime="regime-2",
            p_low=1.0,
            p_high=2.0,
            reason=f"{n_near} gap(s) near the minimum {d1:.4g}, rest >= {float(far.min()):.4g}",
        )
    med = float(np.median(ds))
    frac_uniform = float(np.mean(np.abs(ds - med) <= 0.1 * med))
    if frac_uniform >= 0.9:
        return RegimeResult(
            regime="regime-1",
            p_low=0.0,
            p_high=1.0,
            reason=f"{frac_uniform:.0%} of gaps within 10% of the median {med:.4g}",
        )
    return RegimeResult(
        regime="unclassified",
        p_low=None,
        p_high=None,
        reason="gap shape matches neither a uniform bulk nor a small competitive group",
    )
