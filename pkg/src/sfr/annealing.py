"""Annealing: re-estimate while dropping the least reliable rows one by one."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import tabular
from .core import (
    Dataset,
    bootstrap_rows,
    ordered_map,
    replicate_seed,
    solve_lstsq,
    summarize_replicates,
)
from .errors import DegenerateSampleError, RankDeficient, ValidationError
from .scoring import ReliabilityScores, ScoringConfig, score_sample


@dataclass(frozen=True)
class AnnealingConfig:
    """Annealing settings.

    ``n_steps`` is the number of evaluation points on the path, including
    the unannealed start; ``None`` evaluates every drop count when there are
    at most 200 of them and 201 evenly spaced counts otherwise.
    ``target_coefficient=None`` tracks the last coefficient (the slope or
    treatment effect in a one-feature model).  ``bootstrap_iterations``
    overrides the scoring iteration count inside bootstrap replicates.
    """

    share: float = 0.10
    n_steps: int | None = None
    bootstrap_b: int = 1000
    seed: int = 0
    target_coefficient: int | None = None
    bootstrap_iterations: int | None = None
    ci_method: str = "normal"
    n_jobs: int | None = 1

    def __post_init__(self):
        if not 0 < self.share <= 1:
            raise ValidationError(f"share must lie in (0, 1], got {self.share}")
        if self.n_steps is not None and self.n_steps < 1:
            raise ValidationError("n_steps must be >= 1")
        if self.ci_method not in ("normal", "percentile"):
            raise ValidationError(f"unknown ci_method {self.ci_method!r}")

    def max_drop(self, data: Dataset) -> int:
        d = math.ceil(round(self.share * data.n, 9))
        if d > data.n - data.k - 1:
            raise ValidationError(
                f"annealing {d} of {data.n} rows leaves fewer than k + 1 = {data.k + 1} observations"
            )
        return d

    def grid(self, data: Dataset) -> np.ndarray:
        """Drop counts at which the path is evaluated; always starts at 0."""
        d = self.max_drop(data)
        points = min(d, 200) + 1 if self.n_steps is None else self.n_steps
        if points == 1:
            return np.zeros(1, dtype=np.int64)
        if points >= d + 1:
            return np.arange(d + 1, dtype=np.int64)
        return np.unique(np.round(np.linspace(0, d, points)).astype(np.int64))

    def target(self, data: Dataset) -> int:
        j = data.k - 1 if self.target_coefficient is None else int(self.target_coefficient)
        if not 0 <= j < data.k:
            raise ValidationError(f"target_coefficient {j} out of range for {data.k} coefficients")
        return j


@dataclass(frozen=True)
class AnnealingStep:
    n_dropped: int
    share_dropped: float
    estimate: float
    ci_lower: float = float("nan")
    ci_upper: float = float("nan")


@dataclass(frozen=True, eq=False)
class AnnealingPath:
    steps: tuple[AnnealingStep, ...]
    dropped_order: np.ndarray
    coefficient: str = ""
    replicate_estimates: np.ndarray | None = None

    HEADER = ("n_dropped", "share", "estimate", "ci_lower", "ci_upper")

    @property
    def n_dropped(self) -> np.ndarray:
        return np.array([s.n_dropped for s in self.steps])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([s.estimate for s in self.steps])

    @property
    def ci(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([s.ci_lower for s in self.steps]), np.array([s.ci_upper for s in self.steps])

    def at_share(self, share: float) -> AnnealingStep:
        """Deepest evaluated step whose dropped share does not exceed ``share``."""
        eligible = [s for s in self.steps if s.share_dropped <= share + 1e-12]
        return eligible[-1]

    def records(self) -> list[dict]:
        return [
            {"n_dropped": s.n_dropped, "share": s.share_dropped, "estimate": s.estimate,
             "ci_lower": s.ci_lower, "ci_upper": s.ci_upper}
            for s in self.steps
        ]

    def to_csv(self, path_or_file) -> None:
        tabular.to_csv(path_or_file, self.HEADER, self.records())


def drop_order(scores: ReliabilityScores | np.ndarray) -> np.ndarray:
    """Rows by ascending score; ties broken by ascending row index."""
    s = scores.scores if isinstance(scores, ReliabilityScores) else np.asarray(scores)
    return np.lexsort((np.arange(s.shape[0]), s))


def path_estimates(data: Dataset, order: np.ndarray, grid: np.ndarray, target: int) -> np.ndarray:
    """Target coefficient after dropping ``order[:d]`` for every ``d`` in ``grid``.

    Raises :class:`RankDeficient` naming the failing step.
    """
    out = np.empty(grid.shape[0])
    keep = np.ones(data.n, dtype=bool)
    done = 0
    for j, d in enumerate(grid):
        keep[order[done:d]] = False
        done = d
        try:
            out[j] = solve_lstsq(data.design[keep], data.y[keep])[target]
        except RankDeficient as exc:
            raise RankDeficient(f"annealing step {j} ({d} rows dropped): {exc}") from exc
    return out


def anneal(data: Dataset, scores: ReliabilityScores, config: AnnealingConfig = AnnealingConfig()) -> AnnealingPath:
    """Point-estimate annealing path from given scores (no intervals)."""
    if len(scores) != data.n:
        raise ValidationError(f"{len(scores)} scores for {data.n} observations")
    grid = config.grid(data)
    target = config.target(data)
    order = drop_order(scores)
    est = path_estimates(data, order, grid, target)
    steps = tuple(AnnealingStep(int(d), float(d / data.n), float(e)) for d, e in zip(grid, est))
    return AnnealingPath(steps, order[: grid[-1]], data.coef_names[target])


def replicate_path(
    data: Dataset, scoring_config: ScoringConfig, grid: np.ndarray, target: int
) -> np.ndarray:
    """Full two-step pipeline on one (resampled) dataset: re-score, sort, anneal."""
    scores = score_sample(data, scoring_config)
    return path_estimates(data, drop_order(scores), grid, target)


def anneal_with_bootstrap(
    data: Dataset,
    scoring_config: ScoringConfig = ScoringConfig(),
    config: AnnealingConfig = AnnealingConfig(),
) -> AnnealingPath:
    """Annealing path with pointwise two-step bootstrap intervals.

    Each replicate resamples rows in pairs, re-scores the resample from
    scratch, and anneals it on the same drop-count grid.  Point estimates
    come from the original data.
    """
    grid = config.grid(data)
    target = config.target(data)
    scores = score_sample(data, scoring_config)
    order = drop_order(scores)
    point = path_estimates(data, order, grid, target)

    boot_cfg = scoring_config
    if config.bootstrap_iterations is not None:
        boot_cfg = replace(boot_cfg, iterations=config.bootstrap_iterations)
    b = config.bootstrap_b
    if b < 2:
        raise ValidationError(f"bootstrap needs b >= 2, got {b}")

    def one(r: int) -> np.ndarray:
        rows = bootstrap_rows(config.seed, r, data.n)
        cfg = boot_cfg.with_seed(replicate_seed(config.seed, r))
        try:
            return replicate_path(data.take(rows), cfg, grid, target)
        except DegenerateSampleError:
            return np.full(grid.shape[0], np.nan)

    draws = np.vstack(ordered_map(one, range(b), config.n_jobs))
    summary = summarize_replicates(point, draws, b, config.ci_method)
    lo, hi = summary.ci_lower, summary.ci_upper
    steps = tuple(
        AnnealingStep(int(d), float(d / data.n), float(e), float(l), float(h))
        for d, e, l, h in zip(grid, point, lo, hi)
    )
    return AnnealingPath(steps, order[: grid[-1]], data.coef_names[target], draws)


def covariate_balance(data: Dataset, order: np.ndarray, n_dropped: int) -> list[dict]:
    """Standardised mean differences between dropped and kept rows, per feature."""
    dropped = np.zeros(data.n, dtype=bool)
    dropped[order[:n_dropped]] = True
    out = []
    for j, name in enumerate(data.feature_names):
        a, b = data.X[dropped, j], data.X[~dropped, j]
        ma = float(a.mean()) if a.size else float("nan")
        mb = float(b.mean())
        va = float(a.var(ddof=1)) if a.size > 1 else 0.0
        vb = float(b.var(ddof=1)) if b.size > 1 else 0.0
        pooled = math.sqrt((va + vb) / 2)
        smd = (ma - mb) / pooled if pooled > 0 else float("nan")
        out.append({"feature": name, "mean_dropped": ma, "mean_kept": mb, "smd": smd})
    return out
