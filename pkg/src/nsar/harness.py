"""Seeded Monte Carlo experiment runner with a deterministic parallelism contract.

A trial's randomness is a pure function of the experiment configuration and
the trial index, and aggregation is integer counting, so an estimate is
bit-identical no matter how trials are chunked across worker processes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import multiprocessing
import time
from dataclasses import dataclass

import numpy as np

from .core import BadDimensions, BanditInstance, RewardStream, make_instance, sample_beta_means, true_top_m
from .complexity import gaps
from .algorithms import nsar_run, uni_run

__all__ = [
    "BadSetupId",
    "BadCounts",
    "ConfigError",
    "TrialError",
    "AlgorithmSpec",
    "ExperimentConfig",
    "ErrorEstimate",
    "HoeffdingResult",
    "generate_setup",
    "resolve_budget",
    "run_experiment",
    "estimate_error",
    "hoeffding_check",
    "persist",
    "load_config_file",
    "CSV_COLUMNS",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 7

SETUP_IDS = (1, 2, 3, 4, 5, 6)

CSV_COLUMNS = [
    "setup_id",
    "K",
    "M",
    "algorithm",
    "p",
    "T",
    "trials",
    "errors",
    "p_hat",
    "ci_low",
    "ci_high",
    "master_seed",
    "wall_ms",
]


class BadSetupId(ValueError):
    """Setup id outside 1..6."""


class BadCounts(ValueError):
    """Error count must satisfy 0 <= errors <= trials with trials >= 1."""


class ConfigError(ValueError):
    """Experiment config file is malformed."""


class TrialError(RuntimeError):
    """A trial failed; carries the trial index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"trial {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class AlgorithmSpec:
    """One identifier under test: nsar with an exponent, or sar, or uni."""

    name: str
    p: float | None = None

    def __post_init__(self):
        if self.name not in ("nsar", "sar", "uni"):
            raise ConfigError(f"unknown algorithm {self.name!r}")
        if self.name == "nsar" and self.p is None:
            raise ConfigError("nsar requires an exponent p")
        if self.name != "nsar" and self.p is not None:
            raise ConfigError(f"{self.name} takes no exponent")

    def token(self) -> str:
        return f"nsar:{self.p!r}" if self.name == "nsar" else self.name

    def label(self) -> str:
        return f"nsar(p={self.p:g})" if self.name == "nsar" else self.name


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one Monte Carlo estimate.

    Exactly one of setup (1..6) or means is given. budget is either an
    explicit pull count or "ceil-h1", which resolves to the ceiling of the
    instance's summed inverse squared gaps. beta_mode controls whether the
    random-mean setups (4 and 5) fix one instance for all trials or redraw
    per trial; in either mode a draw whose resolved budget would exceed
    beta_budget_cap is redrawn, since inverse squared boundary gaps have no
    finite mean and uncapped budgets occasionally reach the millions.
    """

    m: int
    algorithm: AlgorithmSpec
    trials: int
    setup: int | None = None
    means: tuple[float, ...] | None = None
    k: int = 50
    budget: int | str = "ceil-h1"
    master_seed: int = DEFAULT_SEED
    beta_mode: str = "fixed"
    beta_budget_cap: int | None = 50_000

    def __post_init__(self):
        if (self.setup is None) == (self.means is None):
            raise ConfigError("exactly one of setup or means must be given")
        if self.setup is not None and self.setup not in SETUP_IDS:
            raise BadSetupId(f"setup must be in 1..6, got {self.setup}")
        if self.means is not None:
            object.__setattr__(self, "means", tuple(float(x) for x in self.means))
            object.__setattr__(self, "k", len(self.means))
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if isinstance(self.budget, str) and self.budget != "ceil-h1":
            raise ConfigError(f'budget must be an integer or "ceil-h1", got {self.budget!r}')
        if self.beta_mode not in ("fixed", "per-trial"):
            raise ConfigError(f'beta_mode must be "fixed" or "per-trial", got {self.beta_mode!r}')
        if self.beta_budget_cap is not None and self.beta_budget_cap < 4 * self.k:
            raise ConfigError(
                f"beta_budget_cap must be at least 4K={4 * self.k} (or null), got {self.beta_budget_cap}"
            )

    def instance_token(self) -> str:
        if self.setup is not None:
            return f"setup{self.setup}"
        digest = hashlib.blake2b(repr(self.means).encode(), digest_size=8).hexdigest()
        return f"custom-{digest}"

    def digest(self) -> str:
        payload = {
            "setup": self.setup,
            "means": self.means,
            "k": self.k,
            "m": self.m,
            "algorithm": self.algorithm.token(),
            "trials": self.trials,
            "budget": self.budget,
            "master_seed": self.master_seed,
            "beta_mode": self.beta_mode,
            "beta_budget_cap": self.beta_budget_cap,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=16).hexdigest()


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo misidentification frequency with a 95% Wilson interval."""

    errors: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    config_digest: str
    wall_ms: int
    budget_mean: float


@dataclass(frozen=True)
class HoeffdingResult:
    empirical_freq: float
    bound: float
    slack: float

    @property
    def ok(self) -> bool:
        return self.empirical_freq <= self.bound + self.slack


def _h64(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints and strings."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def generate_setup(setup_id: int, k: int, m: int, seed: int = 0) -> BanditInstance:
    """Build one of the six benchmark mean layouts.

    1: top block at 0.7, everything else at 0.5. 2: adds a block at 0.66.
    3: adds blocks at 0.66 and 0.62. 4 and 5: means drawn from Beta(2,2)
    and Beta(5,5) respectively (seeded; redrawn on a tied boundary).
    6: top block at 0.7, a single challenger at 0.68, rest at 0.5.
    """
    if setup_id not in SETUP_IDS:
        raise BadSetupId(f"setup must be in 1..6, got {setup_id}")
    if not (1 <= m < k):
        raise BadDimensions(f"need 1 <= m < K, got m={m}, K={k}")
    if setup_id == 1:
        means = np.full(k, 0.5)
        means[:m] = 0.7
    elif setup_id == 2:
        if 2 * m > k:
            raise BadDimensions(f"setup 2 needs 2m <= K, got m={m}, K={k}")
        means = np.full(k, 0.5)
        means[:m] = 0.7
        means[m : 2 * m] = 0.66
    elif setup_id == 3:
        if 3 * m > k:
            raise BadDimensions(f"setup 3 needs 3m <= K, got m={m}, K={k}")
        means = np.full(k, 0.5)
        means[:m] = 0.7
        means[m : 2 * m] = 0.66
        means[2 * m : 3 * m] = 0.62
    elif setup_id == 6:
        means = np.full(k, 0.5)
        means[:m] = 0.7
        means[m] = 0.68
    else:
        shape = 2.0 if setup_id == 4 else 5.0
        means = sample_beta_means(k, shape, shape, seed, m=m)
    return make_instance(means, kind="bernoulli", m=m)


def resolve_budget(instance: BanditInstance, budget) -> int:
    """Resolve an explicit or "ceil-h1" budget for one instance."""
    if isinstance(budget, str):
        h1 = float(np.sum(gaps(instance).delta ** -2.0))
        # round() guards the ceiling against float noise on exact values,
        # e.g. a gap of 0.2 makes h1 land a few ulp above 1250
        return int(math.ceil(round(h1, 6)))
    return int(budget)


def _run_algorithm(spec: AlgorithmSpec, stream: RewardStream, t: int):
    if spec.name == "uni":
        return uni_run(stream, t, audit=False)
    p = 1.0 if spec.name == "sar" else spec.p
    return nsar_run(stream, t, p, audit=False)


def _draw_beta_instance(cfg: ExperimentConfig, trial: int | None) -> BanditInstance:
    """Seeded instance for a random-mean setup, capped in resolved budget.

    Inverse squared boundary gaps have no finite mean, so an uncapped
    "ceil-h1" budget occasionally lands in the millions; draws whose budget
    exceeds beta_budget_cap are redrawn along a deterministic seed chain.
    """
    capped = isinstance(cfg.budget, str) and cfg.beta_budget_cap is not None
    parts = ["instance", cfg.master_seed, cfg.instance_token(), cfg.k, cfg.m]
    if trial is not None:
        parts.append(trial)
    for attempt in range(1000):
        inst = generate_setup(cfg.setup, cfg.k, cfg.m, seed=_h64(*parts, attempt))
        if not capped or resolve_budget(inst, cfg.budget) <= cfg.beta_budget_cap:
            return inst
    raise ConfigError(
        f"no draw of setup {cfg.setup} fit beta_budget_cap={cfg.beta_budget_cap} in 1000 attempts"
    )


def _fixed_instance(cfg: ExperimentConfig) -> BanditInstance | None:
    """The trial-independent instance, or None when setups 4/5 redraw per trial."""
    if cfg.means is not None:
        return make_instance(np.array(cfg.means), kind="bernoulli", m=cfg.m)
    if cfg.setup in (4, 5):
        if cfg.beta_mode == "per-trial":
            return None
        return _draw_beta_instance(cfg, trial=None)
    return generate_setup(cfg.setup, cfg.k, cfg.m)


def _run_chunk(cfg: ExperimentConfig, lo: int, hi: int) -> tuple[int, int]:
    """Run trials lo..hi-1; returns (error count, summed resolved budgets)."""
    fixed = _fixed_instance(cfg)
    if fixed is not None:
        fixed_top = true_top_m(fixed)
        fixed_budget = resolve_budget(fixed, cfg.budget)
    errors = 0
    budget_sum = 0
    token = cfg.instance_token()
    algo_token = cfg.algorithm.token()
    for i in range(lo, hi):
        try:
            if fixed is not None:
                inst, top, t = fixed, fixed_top, fixed_budget
            else:
                inst = _draw_beta_instance(cfg, trial=i)
                top = true_top_m(inst)
                t = resolve_budget(inst, cfg.budget)
            stream_seed = _h64("stream", cfg.master_seed, token, cfg.k, cfg.m, algo_token, i)
            rec = _run_algorithm(cfg.algorithm, RewardStream(inst, stream_seed), t)
            if frozenset(rec.accepted) != top:
                errors += 1
            budget_sum += t
        except TrialError:
            raise
        except Exception as exc:
            raise TrialError(i, str(exc)) from exc
    return errors, budget_sum


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ErrorEstimate:
    """Run all trials of one configuration and estimate the error frequency.

    The estimate (everything except wall_ms) is a pure function of the
    configuration: trial seeds derive from it, and chunk results are summed,
    so any worker count gives the same answer.
    """
    n = config.trials
    started = time.perf_counter()
    workers = max(1, int(workers))
    if workers == 1 or n < 64:
        errors, budget_sum = _run_chunk(config, 0, n)
    else:
        n_chunks = min(n, workers * 4)
        bounds = np.linspace(0, n, n_chunks + 1, dtype=int)
        jobs = [(config, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.starmap(_run_chunk, jobs)
        errors = sum(e for e, _ in parts)
        budget_sum = sum(b for _, b in parts)
    wall_ms = int((time.perf_counter() - started) * 1000)
    p_hat, ci_low, ci_high = estimate_error(errors, n)
    return ErrorEstimate(
        errors=errors,
        trials=n,
        p_hat=p_hat,
        ci_low=ci_low,
        ci_high=ci_high,
        config_digest=config.digest(),
        wall_ms=wall_ms,
        budget_mean=budget_sum / n,
    )


def estimate_error(errors: int, n: int) -> tuple[float, float, float]:
    """Binomial point estimate with a 95% Wilson score interval."""
    if n < 1 or errors < 0 or errors > n:
        raise BadCounts(f"need 0 <= errors <= n with n >= 1, got errors={errors}, n={n}")
    z = 1.96
    p_hat = errors / n
    z2n = z * z / n
    center = (p_hat + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2n / (4.0 * n)) / (1.0 + z2n)
    # the interval endpoints at p_hat = 0 and 1 are exactly the boundary
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == n else min(1.0, center + half)
    return p_hat, lo, hi


def hoeffding_check(mu: float, n: int, eps: float, trials: int, seed: int) -> HoeffdingResult:
    """Empirically compare mean deviations against the two-sided tail bound.

    Each trial draws n Bernoulli(mu) rewards (sampled as one binomial count)
    and checks whether the sample mean strays from mu by more than eps; the
    observed frequency is set against 2 exp(-2 n eps^2) plus Monte Carlo slack.
    """
    if not (0.0 <= mu <= 1.0):
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    rng = np.random.default_rng(seed)
    hits = rng.binomial(n, mu, size=trials)
    freq = float(np.mean(np.abs(hits / n - mu) > eps))
    bound = 2.0 * math.exp(-2.0 * n * eps * eps)
    slack = 3.0 * math.sqrt(bound / trials)
    return HoeffdingResult(empirical_freq=freq, bound=bound, slack=slack)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 2**53:
            return str(int(value))
        return repr(value)
    return str(value)


def result_row(cfg: ExperimentConfig, est: ErrorEstimate) -> dict[str, str]:
    """One CSV row; floats serialize with shortest round-trip precision."""
    return {
        "setup_id": str(cfg.setup) if cfg.setup is not None else "custom",
        "K": str(cfg.k),
        "M": str(cfg.m),
        "algorithm": cfg.algorithm.name,
        "p": repr(cfg.algorithm.p) if cfg.algorithm.p is not None else "",
        "T": _format_cell(est.budget_mean),
        "trials": str(est.trials),
        "errors": str(est.errors),
        "p_hat": repr(est.p_hat),
        "ci_low": repr(est.ci_low),
        "ci_high": repr(est.ci_high),
        "master_seed": str(cfg.master_seed),
        "wall_ms": str(est.wall_ms),
    }


def persist(results, csv_path, jsonl_path=None) -> None:
    """Write (config, estimate) pairs as CSV, optionally mirroring JSON lines.

    Columns are fixed, one row per result, and every field except wall_ms is
    reproducible from the same master seed.
    """
    rows = [result_row(cfg, est) for cfg, est in results]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    if jsonl_path is not None:
        with open(jsonl_path, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=False) + "\n")


_CONFIG_KEYS = {
    "setups",
    "means",
    "k",
    "m",
    "algorithms",
    "trials",
    "budget",
    "seed",
    "beta_instance_mode",
    "beta_budget_cap",
}


def _parse_algorithm(entry) -> AlgorithmSpec:
    if isinstance(entry, str):
        return AlgorithmSpec(name=entry)
    if isinstance(entry, dict):
        unknown = set(entry) - {"name", "p"}
        if unknown:
            raise ConfigError(f"unknown algorithm fields {sorted(unknown)}")
        if "name" not in entry:
            raise ConfigError("algorithm entry needs a name")
        return AlgorithmSpec(name=entry["name"], p=entry.get("p"))
    raise ConfigError(f"algorithm entry must be a string or object, got {type(entry).__name__}")


def load_config_file(path) -> list[ExperimentConfig]:
    """Load a JSON experiment config and expand its grid.

    Returns one ExperimentConfig per (setup or mean vector, m, algorithm),
    in that nesting order. Unknown top-level fields are rejected.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    for key in ("m", "algorithms", "trials"):
        if key not in raw:
            raise ConfigError(f"config is missing required field {key!r}")
    if ("setups" in raw) == ("means" in raw):
        raise ConfigError('config needs exactly one of "setups" or "means"')

    m_values = raw["m"] if isinstance(raw["m"], list) else [raw["m"]]
    algorithms = [_parse_algorithm(a) for a in raw["algorithms"]]
    trials = int(raw["trials"])
    budget = raw.get("budget", "ceil-h1")
    seed = int(raw.get("seed", DEFAULT_SEED))
    beta_mode = raw.get("beta_instance_mode", "fixed")
    beta_cap = raw.get("beta_budget_cap", 50_000)
    k = int(raw.get("k", 50))

    targets: list[dict] = []
    if "setups" in raw:
        setups = raw["setups"] if isinstance(raw["setups"], list) else [raw["setups"]]
        targets = [{"setup": int(s), "k": k} for s in setups]
    else:
        means_list = raw["means"]
        if means_list and not isinstance(means_list[0], list):
            means_list = [means_list]
        targets = [{"means": tuple(float(x) for x in v)} for v in means_list]

    configs = []
    for target in targets:
        for m in m_values:
            for spec in algorithms:
                configs.append(
                    ExperimentConfig(
                        m=int(m),
                        algorithm=spec,
                        trials=trials,
                        budget=budget,
                        master_seed=seed,
                        beta_mode=beta_mode,
                        beta_budget_cap=beta_cap,
                        **target,
                    )
                )
    return configs
