"""Linear-algebra foundation: datasets, least squares, and the pairs bootstrap."""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import streams
from .errors import (
    DegenerateSampleError,
    DegenerateWeights,
    RankDeficient,
    TooManyFailures,
    ValidationError,
)

RANK_TOL = 1e-10
Z_975 = 1.96


@dataclass(frozen=True, eq=False)
class Dataset:
    """Outcome vector plus feature matrix.

    Parameters
    ----------
    y : array-like, shape (n,)
    X : array-like, shape (n, p)
        Feature matrix *without* an intercept column.
    feature_names : sequence of str, optional
        Defaults to ``x0, x1, ...``.
    add_intercept : bool, default True
        Prepend a column of ones to the design; coefficients are then
        reported as ``[intercept, features...]``.
    outcome_name : str, default "y"
    """

    y: np.ndarray
    X: np.ndarray
    feature_names: tuple[str, ...] = ()
    add_intercept: bool = True
    outcome_name: str = "y"

    def __post_init__(self):
        y = np.array(self.y, dtype=np.float64)
        X = np.array(self.X, dtype=np.float64)
        if y.ndim != 1:
            raise ValidationError(f"y must be one-dimensional, got shape {y.shape}")
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValidationError(f"X shape {X.shape} does not match y of length {y.shape[0]}")
        n, p = X.shape
        if p < 1:
            raise ValidationError("at least one feature column is required")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(p))
        if len(names) != p:
            raise ValidationError(f"{len(names)} feature names given for {p} columns")
        if n < p + 2:
            raise ValidationError(f"need at least p + 2 = {p + 2} observations, got {n}")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValidationError("non-finite values in y or X")
        y.flags.writeable = False
        X.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_names", names)
        design = np.column_stack([np.ones(n), X]) if self.add_intercept else X.copy()
        design.flags.writeable = False
        object.__setattr__(self, "_design", design)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def k(self) -> int:
        """Number of fitted coefficients."""
        return self.p + int(self.add_intercept)

    @property
    def design(self) -> np.ndarray:
        return self._design

    @property
    def coef_names(self) -> tuple[str, ...]:
        return (("intercept",) if self.add_intercept else ()) + self.feature_names

    def take(self, rows: Sequence[int] | np.ndarray) -> Dataset:
        """Dataset restricted to (possibly repeated) ``rows``."""
        rows = np.asarray(rows)
        return Dataset(self.y[rows], self.X[rows], self.feature_names, self.add_intercept, self.outcome_name)

    def with_y(self, y: np.ndarray) -> Dataset:
        return Dataset(y, self.X, self.feature_names, self.add_intercept, self.outcome_name)


@dataclass(frozen=True, eq=False)
class LinearFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted_values: np.ndarray
    rank_ok: bool = True


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """Replicate estimates and normal-approximation (or percentile) intervals.

    ``replicate_estimates`` has one row per requested replicate; rows of
    replicates that failed on a degenerate resample are NaN.
    """

    replicate_estimates: np.ndarray
    point_estimate: np.ndarray
    standard_errors: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    b_effective: int
    ci_method: str = "normal"

    @property
    def failed(self) -> np.ndarray:
        return np.flatnonzero(np.isnan(self.replicate_estimates).any(axis=1))


# ---------------------------------------------------------------------------
# least squares


def solve_lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(A)
    diag = np.abs(np.diag(r))
    scale = np.linalg.norm(A, axis=0).max(initial=0.0)
    if scale == 0.0 or (diag <= RANK_TOL * scale).any():
        raise RankDeficient(f"design of shape {A.shape} is rank deficient")
    return np.linalg.solve(r, q.T @ b)


def _fit_from_coef(data: Dataset, coef: np.ndarray) -> LinearFit:
    fitted = data.design @ coef
    return LinearFit(coef, data.y - fitted, fitted)


def fit_ols(data: Dataset) -> LinearFit:
    """Ordinary least squares via Householder QR."""
    return _fit_from_coef(data, solve_lstsq(data.design, data.y))


def fit_wls(data: Dataset, weights: np.ndarray) -> LinearFit:
    """Weighted least squares minimising ``sum(w * (y - X b)**2)``.

    Rows with zero weight are removed before the decomposition, so a
    zero-weight fit is exactly the fit on the remaining rows.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n,):
        raise ValidationError(f"weights must have shape ({data.n},), got {w.shape}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValidationError("weights must be finite and non-negative")
    keep = w > 0
    if keep.sum() < data.k:
        raise DegenerateWeights(f"{int(keep.sum())} positive weights for {data.k} coefficients")
    sw = np.sqrt(w[keep])
    coef = solve_lstsq(data.design[keep] * sw[:, None], data.y[keep] * sw)
    return _fit_from_coef(data, coef)


def fit_subsamples(design: np.ndarray, y: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched OLS on many small row subsets.

    Parameters
    ----------
    design : ndarray, shape (n, k)
    y : ndarray, shape (n,)
    idx : ndarray of int, shape (m, size)

    Returns
    -------
    coef : ndarray, shape (m, k)
        NaN rows where the subset is rank deficient.
    ok : ndarray of bool, shape (m,)
    """
    A = design[idx]
    b = y[idx]
    q, r = np.linalg.qr(A)
    diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
    scale = np.linalg.norm(A, axis=1).max(axis=1)
    ok = (scale > 0) & (diag > RANK_TOL * scale[:, None]).all(axis=1)
    k = design.shape[1]
    r_safe = np.where(ok[:, None, None], r, np.eye(k))
    qtb = np.einsum("mik,mi->mk", q, b)
    coef = np.linalg.solve(r_safe, qtb[..., None])[..., 0]
    coef[~ok] = np.nan
    return coef, ok


def draw_fittable_subsamples(
    design: np.ndarray,
    y: np.ndarray,
    size: int,
    seed: int,
    keys: tuple[int, ...],
    start: int,
    stop: int,
    max_redraws: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw subsets for work items ``start..stop-1`` and fit OLS on each.

    A rank-deficient draw is replaced by a fresh draw from the next redraw
    layer, up to ``max_redraws`` times; items still degenerate after that are
    flagged in ``ok``.  Draw ``(item, layer)`` depends only on the seed, the
    keys, the item index and the layer.
    """
    n = design.shape[0]
    u = streams.block_uniforms(seed, (*keys, 0), start, stop, size)
    idx = streams.partial_fisher_yates(u, n)
    coef, ok = fit_subsamples(design, y, idx)
    for layer in range(1, max_redraws + 1):
        bad = np.flatnonzero(~ok)
        if bad.size == 0:
            break
        lo, hi = int(bad.min()), int(bad.max()) + 1
        u = streams.block_uniforms(seed, (*keys, layer), start + lo, start + hi, size)[bad - lo]
        new_idx = streams.partial_fisher_yates(u, n)
        new_coef, new_ok = fit_subsamples(design, y, new_idx)
        idx[bad] = new_idx
        coef[bad] = new_coef
        ok[bad] = new_ok
    return idx, coef, ok


# ---------------------------------------------------------------------------
# parallel helpers


def resolve_jobs(n_jobs: int | None) -> int:
    if n_jobs is None or n_jobs <= 0:
        return os.cpu_count() or 1
    return int(n_jobs)


def ordered_map(fn: Callable[[Any], Any], items: Iterable[Any], n_jobs: int | None = 1) -> list[Any]:
    """``[fn(x) for x in items]``, optionally on a thread pool; order preserved."""
    items = list(items)
    jobs = resolve_jobs(n_jobs)
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# bootstrap


def normal_interval(point: np.ndarray, se: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return point - Z_975 * se, point + Z_975 * se


def bootstrap_rows(seed: int, replicate: int, n: int) -> np.ndarray:
    """Row indices of pairs-bootstrap replicate ``replicate``."""
    return streams.generator(seed, streams.BOOTSTRAP, replicate).integers(0, n, size=n)


def replicate_seed(seed: int, replicate: int) -> int:
    """Seed handed to the estimator inside replicate ``replicate``."""
    return streams.derive_seed(seed, streams.REPLICATE, replicate)


def summarize_replicates(
    point: np.ndarray, draws: np.ndarray, b: int, ci_method: str = "normal"
) -> BootstrapResult:
    """Standard errors and intervals from a (b, k) array with NaN failure rows."""
    good = ~np.isnan(draws).any(axis=1)
    b_eff = int(good.sum())
    if b_eff < b / 2:
        raise TooManyFailures(f"only {b_eff} of {b} bootstrap replicates succeeded")
    ok_draws = draws[good]
    if b_eff >= 2:
        se = ok_draws.std(axis=0, ddof=1)
    else:
        se = np.full(point.shape, np.nan)
    if ci_method == "normal":
        lo, hi = normal_interval(point, se)
    elif ci_method == "percentile":
        lo, hi = np.percentile(ok_draws, [2.5, 97.5], axis=0)
    else:
        raise ValidationError(f"unknown ci_method {ci_method!r}")
    return BootstrapResult(draws, point, se, lo, hi, b_eff, ci_method)


def pairs_bootstrap(
    data: Dataset,
    estimator: Callable[[Dataset, int], Sequence[float]],
    b: int,
    seed: int,
    *,
    ci_method: str = "normal",
    n_jobs: int | None = 1,
) -> BootstrapResult:
    """Non-parametric pairs bootstrap of ``estimator``.

    ``estimator(dataset, seed)`` must return a coefficient vector and be
    deterministic in its arguments.  The point estimate uses ``seed`` itself;
    replicate ``r`` resamples rows from the stream ``(seed, r)`` and passes the
    estimator a seed derived from the same pair.  Replicates whose resample
    is degenerate (:class:`DegenerateSampleError`) are dropped.
    """
    if b < 2:
        raise ValidationError(f"bootstrap needs b >= 2, got {b}")
    point = np.atleast_1d(np.asarray(estimator(data, seed), dtype=np.float64))

    def one(r: int) -> np.ndarray:
        rows = bootstrap_rows(seed, r, data.n)
        try:
            est = np.asarray(estimator(data.take(rows), replicate_seed(seed, r)), dtype=np.float64)
        except DegenerateSampleError:
            return np.full(point.shape, np.nan)
        return np.atleast_1d(est)

    draws = np.vstack(ordered_map(one, range(b), n_jobs))
    return summarize_replicates(point, draws, b, ci_method)


@dataclass
class NeumaierSum:
    """Vectorised compensated running sum."""

    total: np.ndarray
    comp: np.ndarray = field(init=False)

    def __post_init__(self):
        self.total = np.array(self.total, dtype=np.float64)
        self.comp = np.zeros_like(self.total)

    def add(self, x: np.ndarray) -> None:
        t = self.total + x
        big = np.abs(self.total) >= np.abs(x)
        self.comp += np.where(big, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    @property
    def value(self) -> np.ndarray:
        return self.total + self.comp


def two_sided_normal_p(t: float) -> float:
    return math.erfc(abs(t) / math.sqrt(2.0)) if np.isfinite(t) else float("nan")
