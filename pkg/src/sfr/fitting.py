"""Reliability-weighted least squares and publication-style fit tables."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import tabular
from .baselines import HuberConfig, RansacConfig, fit_huber, fit_ransac
from .core import Dataset, LinearFit, fit_ols, fit_wls, pairs_bootstrap, two_sided_normal_p
from .errors import SFRError, ValidationError
from .scoring import ReliabilityScores, ScoringConfig, score_sample

log = logging.getLogger(__name__)

ESTIMATORS = ("ols", "huber", "ransac", "sfr")


@dataclass(frozen=True)
class WeightScheme:
    """Map reliability scores to regression weights: ``psi**2`` or ``psi``."""

    kind: Literal["squared", "identity"] = "squared"

    def __post_init__(self):
        if self.kind not in ("squared", "identity"):
            raise ValidationError(f"unknown weight scheme {self.kind!r}")

    def __call__(self, scores: np.ndarray) -> np.ndarray:
        scores = np.asarray(scores, dtype=np.float64)
        return scores * scores if self.kind == "squared" else scores.copy()


@dataclass(frozen=True, eq=False)
class SFRFit:
    fit: LinearFit
    scores: ReliabilityScores
    weights: np.ndarray


def sfr_estimate(
    data: Dataset, scoring_config: ScoringConfig = ScoringConfig(), scheme: WeightScheme = WeightScheme()
) -> SFRFit:
    """One pass of the two-step estimator: score, then weighted refit."""
    scores = score_sample(data, scoring_config)
    w = scheme(scores.scores)
    return SFRFit(fit_wls(data, w), scores, w)


@dataclass(frozen=True)
class FitRow:
    estimator: str
    coefficient: str
    coef: float
    std_err: float
    t: float
    p: float
    ci_lower: float
    ci_upper: float

    @classmethod
    def from_inference(cls, estimator, coefficient, coef, se, lo, hi) -> FitRow:
        coef, se, lo, hi = map(float, (coef, se, lo, hi))
        t = coef / se if se > 0 else float("nan")
        return cls(estimator, coefficient, coef, se, t, two_sided_normal_p(t), lo, hi)


@dataclass
class FitTable:
    rows: list[FitRow] = field(default_factory=list)

    HEADER = ("estimator", "coefficient", "coef", "std_err", "t", "p", "ci_lower", "ci_upper")
    TEXT_HEADER = ("", "Coef.", "Std.Err.", "t", "P>|t|", "[0.025", "0.975]")

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def get(self, estimator: str, coefficient: str) -> FitRow:
        for row in self.rows:
            if row.estimator == estimator and row.coefficient == coefficient:
                return row
        raise KeyError((estimator, coefficient))

    def records(self) -> list[dict]:
        return [{h: getattr(r, h) for h in self.HEADER} for r in self.rows]

    def to_csv(self, path_or_file) -> None:
        tabular.to_csv(path_or_file, self.HEADER, self.records())

    def to_text(self, coefficient: str | None = None) -> str:
        """Aligned table, one block per coefficient, estimators as rows."""
        names = [coefficient] if coefficient else list(dict.fromkeys(r.coefficient for r in self.rows))
        blocks = []
        for name in names:
            body = [
                [r.estimator.upper(), r.coef, r.std_err, r.t, r.p, r.ci_lower, r.ci_upper]
                for r in self.rows
                if r.coefficient == name
            ]
            blocks.append(f"{name}\n" + tabular.text_table(self.TEXT_HEADER, body))
        return "\n".join(blocks)


def nan_row(estimator: str, coefficient: str) -> FitRow:
    nan = math.nan
    return FitRow(estimator, coefficient, nan, nan, nan, nan, nan, nan)


def _bootstrapped_rows(
    name: str, data: Dataset, estimator: Callable[[Dataset, int], np.ndarray], b: int, seed: int, **kw
) -> list[FitRow]:
    try:
        point = np.asarray(estimator(data, seed), dtype=np.float64)
    except SFRError as exc:
        log.warning("%s: estimation failed: %s", name, exc)
        return [nan_row(name, c) for c in data.coef_names]
    try:
        boot = pairs_bootstrap(data, estimator, b, seed, **kw)
    except SFRError as exc:
        log.warning("%s: inference unavailable: %s", name, exc)
        nan = float("nan")
        return [FitRow(name, c, float(v), nan, nan, nan, nan, nan) for c, v in zip(data.coef_names, point)]
    return [
        FitRow.from_inference(name, c, boot.point_estimate[j], boot.standard_errors[j], boot.ci_lower[j], boot.ci_upper[j])
        for j, c in enumerate(data.coef_names)
    ]


def sfr_estimator(scoring_config: ScoringConfig, scheme: WeightScheme) -> Callable[[Dataset, int], np.ndarray]:
    """Two-step SFR estimator ``(data, seed) -> coefficients``; the seed drives scoring."""

    def est(d: Dataset, seed: int) -> np.ndarray:
        return sfr_estimate(d, scoring_config.with_seed(seed), scheme).fit.coefficients

    return est


def estimator_fn(
    name: str,
    scoring_config: ScoringConfig = ScoringConfig(),
    scheme: WeightScheme = WeightScheme(),
    huber_config: HuberConfig = HuberConfig(),
    ransac_config: RansacConfig = RansacConfig(),
) -> Callable[[Dataset, int], np.ndarray]:
    """Estimator ``(data, seed) -> coefficients`` by name."""
    if name == "ols":
        return lambda d, seed: fit_ols(d).coefficients
    if name == "huber":
        return lambda d, seed: fit_huber(d, huber_config).coefficients
    if name == "ransac":
        return lambda d, seed: fit_ransac(d, replace(ransac_config, seed=seed)).coefficients
    if name == "sfr":
        return sfr_estimator(scoring_config, scheme)
    raise ValidationError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")


def fit_sfr(
    data: Dataset,
    scoring_config: ScoringConfig = ScoringConfig(),
    scheme: WeightScheme = WeightScheme(),
    bootstrap_b: int = 1000,
    seed: int | None = None,
    *,
    ci_method: str = "normal",
    n_jobs: int | None = 1,
) -> FitTable:
    """Reliability-weighted fit with two-step pairs-bootstrap inference.

    The point estimate scores ``data`` with ``scoring_config`` and fits WLS
    with weights ``scheme(scores)``.  Every bootstrap replicate re-scores its
    own resample before re-weighting, so score noise enters the standard
    errors.  ``seed`` defaults to ``scoring_config.seed``.
    """
    seed = scoring_config.seed if seed is None else seed
    est = sfr_estimator(scoring_config, scheme)
    boot = pairs_bootstrap(data, est, bootstrap_b, seed, ci_method=ci_method, n_jobs=n_jobs)
    return FitTable([
        FitRow.from_inference("sfr", c, boot.point_estimate[j], boot.standard_errors[j], boot.ci_lower[j], boot.ci_upper[j])
        for j, c in enumerate(data.coef_names)
    ])


def fit_table_compare(
    data: Dataset,
    estimators: Sequence[str] = ESTIMATORS,
    *,
    bootstrap_b: int = 1000,
    seed: int = 0,
    scoring_config: ScoringConfig = ScoringConfig(),
    scheme: WeightScheme = WeightScheme(),
    huber_config: HuberConfig = HuberConfig(),
    ransac_config: RansacConfig = RansacConfig(),
    ci_method: str = "normal",
    n_jobs: int | None = 1,
) -> FitTable:
    """Side-by-side table of bootstrapped fits, one row per estimator and coefficient.

    All estimators share the same bootstrap resamples (same ``seed``).  A
    failing estimator keeps its rows, with NaN in whatever could not be
    computed, instead of aborting the table.
    """
    if not estimators:
        raise ValidationError("at least one estimator is required")
    table = FitTable()
    for name in estimators:
        fn = estimator_fn(name, scoring_config, scheme, huber_config, ransac_config)
        table.rows.extend(_bootstrapped_rows(name, data, fn, bootstrap_b, seed, ci_method=ci_method, n_jobs=n_jobs))
    return table

