"""Bandit instances, seeded reward streams, and pull accounting.

Arms are indexed 0..K-1 throughout. Reward sequences are counter-based:
arm i's j-th reward depends only on (master_seed, i, j), so the order in
which different arms are sampled never changes what any arm returns. That
property is what makes algorithm traces comparable across runs and lets
Monte Carlo trials aggregate identically under any parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MeanOutOfRange",
    "AmbiguousTopM",
    "BadDimensions",
    "BadShapeParams",
    "BadArmIndex",
    "BanditInstance",
    "PullLedger",
    "RewardStream",
    "make_instance",
    "sample_beta_means",
    "true_top_m",
    "rank_order",
]

REWARD_KINDS = ("bernoulli", "point-mass")


class MeanOutOfRange(ValueError):
    """An arm mean falls outside [0, 1]."""


class AmbiguousTopM(ValueError):
    """The M-th and (M+1)-th largest means are equal, so the target set is not unique."""


class BadDimensions(ValueError):
    """Arm count or target count violates K >= 2, 1 <= M < K."""


class BadShapeParams(ValueError):
    """Beta shape parameters must be strictly positive."""


class BadArmIndex(IndexError):
    """Arm index outside 0..K-1."""


# SplitMix64 finalizer constants; the stream quality is checked by the
# Hoeffding and Bernoulli-sanity tests rather than assumed.
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = np.float64(1.0 / (1 << 53))
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output finalizer, vectorized over uint64 arrays (wrapping).

    Operates in place on its (freshly allocated) argument to avoid temporaries.
    """
    z = np.asarray(z).copy() if not isinstance(z, np.ndarray) else z
    np.bitwise_xor(z, z >> _S30, out=z)
    np.multiply(z, _MUL1, out=z)
    np.bitwise_xor(z, z >> _S27, out=z)
    np.multiply(z, _MUL2, out=z)
    np.bitwise_xor(z, z >> _S31, out=z)
    return z


def _bit_thresholds(means: np.ndarray) -> np.ndarray:
    """53-bit acceptance thresholds: bits < ceil(mean * 2^53) iff bits/2^53 < mean.

    Exact because a 53-bit integer times 2^-53 is a lossless float64.
    """
    return np.ceil(means * float(1 << 53)).astype(np.uint64)


def mix64_int(z: int) -> int:
    """SplitMix64 finalizer on a plain Python int, reduced mod 2**64."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class BanditInstance:
    """K arms with fixed means in [0, 1] and a designated target count m < K.

    The instance is immutable and freely shareable between trials. Arms keep
    the index order they were given; nothing is re-sorted.
    """

    means: np.ndarray
    kind: str
    m: int

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    @property
    def k(self) -> int:
        return int(self.means.shape[0])


def make_instance(means, kind: str = "bernoulli", m: int = 1) -> BanditInstance:
    """Validate and build a bandit instance.

    Requires K >= 2, 1 <= m < K, every mean in [0, 1], and a strict gap
    between the m-th and (m+1)-th largest means (ties strictly inside the
    top block or strictly below it are fine).
    """
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 1 or means.shape[0] < 2:
        raise BadDimensions(f"need at least 2 arms, got shape {means.shape}")
    k = means.shape[0]
    if not (1 <= m < k):
        raise BadDimensions(f"need 1 <= m < K, got m={m}, K={k}")
    if kind not in REWARD_KINDS:
        raise ValueError(f"unknown reward kind {kind!r}, expected one of {REWARD_KINDS}")
    if not np.all(np.isfinite(means)) or np.any(means < 0.0) or np.any(means > 1.0):
        raise MeanOutOfRange("arm means must lie in [0, 1]")
    order = rank_order(means)
    if means[order[m - 1]] == means[order[m]]:
        raise AmbiguousTopM(
            f"means ranked {m} and {m + 1} are both {means[order[m]]}; top-{m} set is not unique"
        )
    return BanditInstance(means=means, kind=kind, m=m)


def rank_order(means: np.ndarray) -> np.ndarray:
    """Arm indices sorted by mean descending, ties broken by lower index first."""
    means = np.asarray(means, dtype=np.float64)
    return np.lexsort((np.arange(means.shape[0]), -means))


def true_top_m(instance: BanditInstance) -> frozenset[int]:
    """The unique set of m arms with the largest means."""
    order = rank_order(instance.means)
    return frozenset(int(a) for a in order[: instance.m])


def _beta_attempt_seed(seed: int, attempt: int) -> int:
    return mix64_int(mix64_int(seed) ^ (attempt + 1) * 0x9E3779B97F4A7C15)


def sample_beta_means(
    k: int, alpha: float, beta: float, seed: int, m: int | None = None
) -> np.ndarray:
    """Draw k means from Beta(alpha, beta), deterministic in seed.

    When m is given, the whole vector is redrawn (from a seed derived off the
    attempt number) until the top-m boundary is strictly separated, so the
    resulting instance always has a unique target set.
    """
    if k < 2:
        raise BadDimensions(f"need k >= 2, got {k}")
    if alpha <= 0 or beta <= 0:
        raise BadShapeParams(f"shape parameters must be positive, got ({alpha}, {beta})")
    attempt = 0
    while True:
        rng = np.random.default_rng(_beta_attempt_seed(seed, attempt))
        means = rng.beta(alpha, beta, size=k)
        if m is None:
            return means
        order = rank_order(means)
        if means[order[m - 1]] != means[order[m]]:
            return means
        attempt += 1


@dataclass
class PullLedger:
    """Per-arm pull counts; total is their exact sum by construction."""

    counts: np.ndarray

    @classmethod
    def empty(cls, k: int) -> "PullLedger":
        return cls(counts=np.zeros(k, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def snapshot(self) -> "PullLedger":
        return PullLedger(counts=self.counts.copy())


@dataclass
class RewardStream:
    """Seeded reward source for one trial.

    Each arm owns an independent counter-based substream derived from
    (master_seed, arm index), so pulling arms in any interleaving yields
    identical per-arm sequences. A stream must not be shared between
    concurrently running trials; it is cheap to construct per trial.
    """

    instance: BanditInstance
    master_seed: int
    _arm_seeds: np.ndarray = field(init=False, repr=False)
    _counters: np.ndarray = field(init=False, repr=False)
    ledger: PullLedger = field(init=False)

    def __post_init__(self):
        k = self.instance.k
        idx = np.arange(1, k + 1, dtype=np.uint64)
        seed = np.uint64(self.master_seed & _MASK64)
        self._arm_seeds = _mix64(seed + idx * _GOLD)
        self._counters = np.zeros(k, dtype=np.uint64)
        self.ledger = PullLedger.empty(k)

    def _bits53_block(self, arms: np.ndarray, count: int) -> np.ndarray:
        """(len(arms), count) 53-bit draws from the arms' substreams."""
        offs = np.arange(1, count + 1, dtype=np.uint64)
        ctr = self._counters[arms]
        if ctr.shape[0] > 1 and np.all(ctr == ctr[0]):
            # equal counters let the inner mix be shared across arms
            inner = _mix64((ctr[0] + offs) * _GOLD)[None, :]
        else:
            inner = _mix64((ctr[:, None] + offs[None, :]) * _GOLD)
        bits = _mix64(self._arm_seeds[arms, None] ^ inner)
        np.right_shift(bits, _S11, out=bits)
        return bits

    def _uniform_block(self, arms: np.ndarray, count: int) -> np.ndarray:
        """(len(arms), count) uniforms in [0, 1) from the arms' substreams."""
        return self._bits53_block(arms, count).astype(np.float64) * _INV53

    def pull_round(self, arms, count: int) -> np.ndarray:
        """Pull each listed arm `count` times; rewards as a (len(arms), count) array."""
        arms = np.asarray(arms, dtype=np.int64)
        if count < 0:
            raise ValueError("count must be nonnegative")
        if arms.size and (arms.min() < 0 or arms.max() >= self.instance.k):
            raise BadArmIndex(f"arm indices out of range 0..{self.instance.k - 1}")
        if count == 0 or arms.size == 0:
            return np.zeros((arms.size, count), dtype=np.float64)
        means = self.instance.means[arms]
        if self.instance.kind == "bernoulli":
            hits = self._bits53_block(arms, count) < _bit_thresholds(means)[:, None]
            rewards = hits.astype(np.float64)
        else:
            rewards = np.broadcast_to(means[:, None], (arms.size, count)).copy()
        self._counters[arms] += np.uint64(count)
        self.ledger.counts[arms] += count
        return rewards

    def pull_round_sums(self, arms: np.ndarray, count: int) -> np.ndarray:
        """Like pull_round but returns only per-arm reward sums (hot path)."""
        if count == 0 or arms.size == 0:
            return np.zeros(arms.size, dtype=np.float64)
        means = self.instance.means[arms]
        if self.instance.kind == "bernoulli":
            hits = self._bits53_block(arms, count) < _bit_thresholds(means)[:, None]
            sums = np.count_nonzero(hits, axis=1).astype(np.float64)
        else:
            sums = means * float(count)
        self._counters[arms] += np.uint64(count)
        self.ledger.counts[arms] += count
        return sums

    def pull_block(self, arm: int, count: int) -> np.ndarray:
        """Pull one arm `count` times."""
        if not (0 <= arm < self.instance.k):
            raise BadArmIndex(f"arm {arm} out of range 0..{self.instance.k - 1}")
        return self.pull_round(np.array([arm], dtype=np.int64), count)[0]

    def pull(self, arm: int) -> float:
        """Pull one arm once."""
        return float(self.pull_block(arm, 1)[0])
