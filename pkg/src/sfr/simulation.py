"""Monte Carlo comparison of estimators on four synthetic outlier scenarios.

Clean rows follow ``Y = X + e`` with ``X ~ N(0, 1)`` and ``e ~ N(0, 2/3)``.
A share ``alpha`` of the rows is replaced by outliers:

1. none;
2. scattered: ``X ~ N(0, 2)``, ``Y ~ N(0, 2)``;
3. one dense leverage cluster: ``X ~ N(2, 1/2)``, ``Y ~ N(-1, 2/3)``;
4. two clusters, the second mirrored at ``X ~ N(-2, 1/2)``, ``Y ~ N(1, 2/3)``.

The second argument of each ``N(., .)`` is read as a standard deviation or as
a variance according to ``ScenarioConfig.variance_convention``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Literal, Union

import numpy as np

from . import streams, tabular
from .baselines import HuberConfig, RansacConfig
from .core import Dataset, ordered_map
from .errors import SFRError, TooFewSamples, ValidationError
from .fitting import ESTIMATORS, WeightScheme, estimator_fn
from .scoring import ScoringConfig

TRUE_SLOPE = 1.0
METRICS = ("mse", "mean_abs_bias", "std_dev", "jarque_bera_p")
METRIC_TITLES = {
    "mse": "Mean Squared Error",
    "mean_abs_bias": "Mean Absolute Bias",
    "std_dev": "Standard Deviation",
    "jarque_bera_p": "Jarque Bera p-value",
}

EstimatorSpec = Union[str, tuple[str, Callable[[Dataset, int], Sequence[float]]]]


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: int
    n: int = 1000
    outlier_share: float = 0.05
    replications: int = 1000
    seed: int = 0
    variance_convention: Literal["sd", "variance"] = "sd"
    add_intercept: bool = True

    def __post_init__(self):
        if self.scenario not in (1, 2, 3, 4):
            raise ValidationError(f"scenario must be 1-4, got {self.scenario}")
        if not 0 <= self.outlier_share < 1:
            raise ValidationError("outlier_share must lie in [0, 1)")
        if self.variance_convention not in ("sd", "variance"):
            raise ValidationError(f"unknown variance_convention {self.variance_convention!r}")
        if self.n < 4:
            raise ValidationError("n must be at least 4")
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if self.scenario == 1:
            object.__setattr__(self, "outlier_share", 0.0)

    @property
    def n_outliers(self) -> int:
        """``round(n * alpha)`` with halves rounded up."""
        return math.floor(round(self.n * self.outlier_share, 9) + 0.5)

    @property
    def cluster_sizes(self) -> tuple[int, int]:
        m = self.n_outliers
        return m - m // 2, m // 2


def _normal(rng: np.random.Generator, loc: float, spread: float, size: int, convention: str) -> np.ndarray:
    sd = spread if convention == "sd" else math.sqrt(spread)
    return loc + sd * rng.standard_normal(size)


def generate_scenario(config: ScenarioConfig, replication_index: int) -> Dataset:
    """Synthetic dataset for one replication; outliers occupy the first rows.

    Replication ``r`` draws only from the stream ``(config.seed, r)``, so the
    clean core is shared across scenarios for a given seed and replication.
    """
    rng = streams.generator(config.seed, streams.SIMULATION, replication_index)
    conv = config.variance_convention
    n = config.n
    x = _normal(rng, 0.0, 1.0, n, conv)
    y = TRUE_SLOPE * x + _normal(rng, 0.0, 2 / 3, n, conv)
    m = config.n_outliers
    if config.scenario == 2 and m:
        x[:m] = _normal(rng, 0.0, 2.0, m, conv)
        y[:m] = _normal(rng, 0.0, 2.0, m, conv)
    elif config.scenario == 3 and m:
        x[:m] = _normal(rng, 2.0, 0.5, m, conv)
        y[:m] = _normal(rng, -1.0, 2 / 3, m, conv)
    elif config.scenario == 4 and m:
        m1, m2 = config.cluster_sizes
        x[:m1] = _normal(rng, 2.0, 0.5, m1, conv)
        y[:m1] = _normal(rng, -1.0, 2 / 3, m1, conv)
        x[m1:m] = _normal(rng, -2.0, 0.5, m2, conv)
        y[m1:m] = _normal(rng, 1.0, 2 / 3, m2, conv)
    return Dataset(y, x[:, None], ("x",), config.add_intercept)


def jarque_bera(samples: Sequence[float]) -> tuple[float, float]:
    """Jarque-Bera normality statistic and its chi-squared(2) upper-tail p-value.

    Uses biased (population) moments.  A constant sample returns ``(0, 1)``.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n < 8:
        raise TooFewSamples(f"Jarque-Bera needs at least 8 samples, got {n}")
    d = x - x.mean()
    m2 = np.mean(d**2)
    if np.ptp(x) == 0 or m2 == 0:
        return 0.0, 1.0
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2 - 3.0
    stat = n / 6.0 * (skew**2 + kurt**2 / 4.0)
    # chi-squared with two degrees of freedom has survival function exp(-x/2)
    return float(stat), float(math.exp(-stat / 2.0))


@dataclass(frozen=True, eq=False)
class MetricsTable:
    config: ScenarioConfig
    estimators: tuple[str, ...]
    values: dict[tuple[str, str], float]
    failures: dict[str, int]
    draws: dict[str, np.ndarray] = field(default_factory=dict)

    HEADER = ("estimator", *METRICS, "failures")

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self.values[key]

    def records(self) -> list[dict]:
        return [
            {"estimator": e, **{m: self.values[e, m] for m in METRICS}, "failures": self.failures[e]}
            for e in self.estimators
        ]

    def to_csv(self, path_or_file) -> None:
        tabular.to_csv(path_or_file, self.HEADER, self.records())

    def to_text(self) -> str:
        c = self.config
        label = f"N={c.n}, alpha={c.outlier_share:g}"
        out = [f"Scenario {c.scenario} ({label}, R={c.replications})"]
        for m in METRICS:
            body = [[e.upper(), self.values[e, m]] for e in self.estimators]
            out.append(f"{METRIC_TITLES[m]}\n" + tabular.text_table(("", label), body))
        return "\n".join(out)

    def draws_records(self) -> list[dict]:
        return [
            {"replication": r, **{e: float(self.draws[e][r]) for e in self.estimators}}
            for r in range(self.config.replications)
        ]


def summarize_draws(estimates: np.ndarray, truth: float = TRUE_SLOPE) -> dict[str, float]:
    est = estimates[~np.isnan(estimates)]
    err = est - truth
    nan = float("nan")
    if est.size == 0:
        return dict.fromkeys(METRICS, nan)
    return {
        "mse": float(np.mean(err**2)),
        "mean_abs_bias": float(np.mean(np.abs(err))),
        "std_dev": float(est.std(ddof=1)) if est.size > 1 else nan,
        "jarque_bera_p": jarque_bera(est)[1] if est.size >= 8 else nan,
    }


def run_benchmark(
    config: ScenarioConfig,
    estimators: Sequence[EstimatorSpec] = ESTIMATORS,
    *,
    scoring_config: ScoringConfig = ScoringConfig(),
    scheme: WeightScheme = WeightScheme(),
    huber_config: HuberConfig = HuberConfig(),
    ransac_config: RansacConfig = RansacConfig(),
    n_jobs: int | None = 1,
) -> MetricsTable:
    """Run every estimator on ``config.replications`` synthetic datasets.

    Estimators are names from :data:`ESTIMATORS` or ``(name, fn)`` pairs with
    ``fn(dataset, seed) -> coefficients``.  The slope (last coefficient) is
    compared with the true value 1.  Failed fits are excluded from the
    metrics and counted per estimator.
    """
    if config.replications < 10:
        raise ValidationError(f"run_benchmark needs at least 10 replications, got {config.replications}")
    fns: list[tuple[str, Callable]] = []
    for spec in estimators:
        if isinstance(spec, str):
            fns.append((spec, estimator_fn(spec, scoring_config, scheme, huber_config, ransac_config)))
        else:
            fns.append((spec[0], spec[1]))
    names = tuple(name for name, _ in fns)
    if len(set(names)) != len(names):
        raise ValidationError("duplicate estimator names")

    def one(r: int) -> np.ndarray:
        data = generate_scenario(config, r)
        seed = streams.derive_seed(config.seed, streams.SIMULATION, r, 1)
        out = np.full(len(fns), np.nan)
        for j, (_, fn) in enumerate(fns):
            try:
                out[j] = np.asarray(fn(data, seed), dtype=np.float64)[-1]
            except SFRError:
                pass
        return out

    draws = np.vstack(ordered_map(one, range(config.replications), n_jobs))
    values, failures, per = {}, {}, {}
    for j, name in enumerate(names):
        col = draws[:, j]
        per[name] = col
        failures[name] = int(np.isnan(col).sum())
        for metric, v in summarize_draws(col).items():
            values[name, metric] = v
    return MetricsTable(config, names, values, failures, per)


def scenario_grid(
    scenario: int,
    sizes: Sequence[int] = (100, 500, 1000),
    shares: Sequence[float] = (0.01, 0.025, 0.05),
    **kw,
) -> list[ScenarioConfig]:
    """Configurations for one scenario over the sample-size by outlier-share grid."""
    base = ScenarioConfig(scenario, **kw)
    if scenario == 1:
        return [replace(base, n=n) for n in sizes]
    return [replace(base, n=n, outlier_share=a) for n in sizes for a in shares]
