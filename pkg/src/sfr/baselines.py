"""Reference robust estimators: Huber M-estimation (IRLS) and RANSAC."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .core import Dataset, LinearFit, draw_fittable_subsamples, fit_ols, fit_wls
from .errors import NoConsensus, NoConvergence, ValidationError

MAD_NORMAL = 0.6744897501960817  # Phi^{-1}(0.75)


class NoConvergenceWarning(UserWarning):
    pass


def mad(r: np.ndarray) -> float:
    """Raw median absolute deviation about the median."""
    return float(np.median(np.abs(r - np.median(r))))


def residual_scale(r: np.ndarray) -> float:
    """Normal-consistent MAD of residuals taken about zero."""
    return float(np.median(np.abs(r))) / MAD_NORMAL


@dataclass(frozen=True)
class HuberConfig:
    """Huber IRLS settings.

    ``scale`` is ``"mad"`` (normalised MAD of the current residuals about
    zero, re-estimated every iteration) or a positive float used as a fixed scale.
    """

    tuning_constant: float = 1.345
    max_iterations: int = 100
    tolerance: float = 1e-8
    scale: str | float = "mad"
    strict: bool = False

    def __post_init__(self):
        if not self.tuning_constant > 0:
            raise ValidationError("tuning_constant must be positive")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if self.scale != "mad" and not (isinstance(self.scale, (int, float)) and self.scale > 0):
            raise ValidationError(f"scale must be 'mad' or a positive number, got {self.scale!r}")


@dataclass(frozen=True, eq=False)
class HuberFit(LinearFit):
    scale: float = float("nan")
    converged: bool = True
    n_iter: int = 0
    objective_path: tuple[float, ...] = ()


def huber_rho(u: np.ndarray, c: float) -> np.ndarray:
    a = np.abs(u)
    return np.where(a <= c, 0.5 * u * u, c * a - 0.5 * c * c)


def huber_objective(residuals: np.ndarray, scale: float, c: float) -> float:
    return float(huber_rho(residuals / scale, c).sum()) if scale > 0 else 0.0


def huber_weights(residuals: np.ndarray, scale: float, c: float) -> np.ndarray:
    a = np.abs(residuals)
    thresh = c * scale
    w = np.ones_like(a)
    big = a > thresh
    w[big] = thresh / a[big]
    return w


def fit_huber(data: Dataset, config: HuberConfig = HuberConfig()) -> HuberFit:
    """Huber regression by iteratively reweighted least squares.

    Starts from OLS.  Each iteration computes the scale (unless fixed),
    Huber weights ``min(1, c * scale / |r|)`` and a weighted refit; stops when
    the largest coefficient change falls below ``config.tolerance``.  On
    non-convergence the last iterate is returned with ``converged=False``
    (and a warning), or :class:`NoConvergence` is raised when
    ``config.strict`` is set.
    """
    c = config.tuning_constant
    fit = fit_ols(data)
    coef = fit.coefficients
    path = []
    converged = False
    scale = float("nan")
    it = 0
    for it in range(1, config.max_iterations + 1):
        r = fit.residuals
        scale = residual_scale(r) if config.scale == "mad" else float(config.scale)
        path.append(huber_objective(r, scale, c))
        w = huber_weights(r, scale, c)
        fit = fit_wls(data, w)
        step = np.max(np.abs(fit.coefficients - coef))
        coef = fit.coefficients
        if step < config.tolerance:
            converged = True
            break
    if config.scale != "mad":
        path.append(huber_objective(fit.residuals, scale, c))
    if not converged:
        msg = f"Huber IRLS did not converge in {config.max_iterations} iterations"
        if config.strict:
            raise NoConvergence(msg)
        warnings.warn(msg, NoConvergenceWarning, stacklevel=2)
    return HuberFit(coef, fit.residuals, fit.fitted_values, True, scale, converged, it, tuple(path))


@dataclass(frozen=True)
class RansacConfig:
    """RANSAC settings.

    ``min_sample_size=None`` means the coefficient count;
    ``residual_threshold=None`` means the raw MAD of full-sample OLS
    residuals.
    """

    min_sample_size: int | None = None
    residual_threshold: float | None = None
    max_trials: int = 100
    stop_inlier_fraction: float = 1.0
    seed: int = 0
    max_redraws: int = 100

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValidationError("max_trials must be >= 1")
        if self.residual_threshold is not None and not self.residual_threshold > 0:
            raise ValidationError("residual_threshold must be positive")
        if not 0 < self.stop_inlier_fraction <= 1:
            raise ValidationError("stop_inlier_fraction must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class RansacFit(LinearFit):
    inlier_mask: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    threshold: float = float("nan")
    best_trial: int = -1
    trials_run: int = 0


def fit_ransac(data: Dataset, config: RansacConfig = RansacConfig()) -> RansacFit:
    """Random sample consensus.

    Trial ``t`` fits OLS on a random minimal subset drawn from the stream
    ``(config.seed, t)`` and counts rows with ``|residual| <= threshold``.
    The trial with the most inliers wins (ties to the lowest trial index) and
    OLS is refitted on its inliers.  ``inlier_mask`` holds the winning trial's
    inliers, i.e. the consensus set used for the refit.
    """
    k = data.k
    size = k if config.min_sample_size is None else int(config.min_sample_size)
    if size < k or size >= data.n:
        raise ValidationError(f"min_sample_size must lie in [{k}, {data.n - 1}], got {size}")
    if config.residual_threshold is None:
        threshold = mad(fit_ols(data).residuals)
    else:
        threshold = float(config.residual_threshold)

    idx, coef, ok = draw_fittable_subsamples(
        data.design, data.y, size, config.seed, (streams.RANSAC,), 0, config.max_trials, config.max_redraws
    )
    resid = np.abs(data.y[:, None] - data.design @ np.where(ok[:, None], coef, 0.0).T)
    inliers = resid <= threshold
    counts = np.where(ok, inliers.sum(axis=0), -1)
    # Trials are evaluated in index order; stop at the first trial that reaches the target.
    target = config.stop_inlier_fraction * data.n
    running_best = np.maximum.accumulate(counts)
    reached = np.flatnonzero(running_best >= target)
    trials_run = int(reached[0]) + 1 if reached.size else config.max_trials
    best = int(np.argmax(counts[:trials_run]))
    mask = inliers[:, best].copy()
    if counts[best] < k + 1:
        raise NoConsensus(f"best trial has {max(int(counts[best]), 0)} inliers, need {k + 1}")
    refit = fit_wls(data, mask.astype(np.float64))
    return RansacFit(
        refit.coefficients, refit.residuals, refit.fitted_values, True, mask, threshold, best, trials_run
    )
