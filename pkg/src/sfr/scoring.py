"""Reliability scoring from out-of-bag losses of minimal random sub-samples.

For each iteration a sub-sample of ``eta`` rows is drawn without replacement,
OLS is fitted on it, and every row outside the sub-sample is charged its
prediction loss.  A row's expected loss is the mean of its out-of-bag
charges; reliability scores map expected losses linearly and in reverse onto
[0, 1] (largest loss -> 0, smallest loss -> 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from . import streams, tabular
from .core import Dataset, NeumaierSum, draw_fittable_subsamples, fit_subsamples, ordered_map
from .errors import AllIterationsDegenerate, NeverOutOfBag, TooManySubsamples, ValidationError

MAX_EXHAUSTIVE = 10**6
# Bound on the (rows x iterations) loss block held in memory at once.  Chunking
# depends only on N, never on the thread count, so sums are reproducible.
_BLOCK_CELLS = 2_000_000
_RELATIVE_TOL = 1e-12


@dataclass(frozen=True)
class ScoringConfig:
    """Settings for :func:`score_sample`.

    ``subsample_size=None`` means (number of fitted coefficients) + 1.
    ``averaging="oob"`` divides each row's summed loss by its own out-of-bag
    count; ``"iterations"`` divides by the number of effective iterations.
    """

    iterations: int = 1000
    subsample_size: int | None = None
    loss: Literal["absolute", "squared"] = "absolute"
    seed: int = 0
    max_redraws_per_iteration: int = 100
    averaging: Literal["oob", "iterations"] = "oob"
    n_jobs: int | None = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        if self.loss not in ("absolute", "squared"):
            raise ValidationError(f"unknown loss {self.loss!r}")
        if self.averaging not in ("oob", "iterations"):
            raise ValidationError(f"unknown averaging {self.averaging!r}")
        if self.max_redraws_per_iteration < 0:
            raise ValidationError("max_redraws_per_iteration must be >= 0")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")

    def eta(self, data: Dataset) -> int:
        eta = data.k + 1 if self.subsample_size is None else int(self.subsample_size)
        if eta < data.k:
            raise ValidationError(f"subsample size {eta} below coefficient count {data.k}")
        if eta >= data.n:
            raise ValidationError(f"subsample size {eta} must be below N = {data.n}")
        return eta

    def with_seed(self, seed: int) -> ScoringConfig:
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class ReliabilityScores:
    expected_losses: np.ndarray
    scores: np.ndarray
    oob_counts: np.ndarray
    effective_iterations: int

    def __len__(self) -> int:
        return self.scores.shape[0]

    def order(self) -> np.ndarray:
        """Row indices by ascending score, ties by ascending row index."""
        return np.lexsort((np.arange(len(self)), self.scores))

    def rows(self) -> list[dict]:
        return [
            {"row_index": i, "expected_loss": float(g), "score": float(s), "oob_count": int(c)}
            for i, (g, s, c) in enumerate(zip(self.expected_losses, self.scores, self.oob_counts))
        ]

    HEADER = ("row_index", "expected_loss", "score", "oob_count")

    def to_csv(self, path_or_file) -> None:
        tabular.to_csv(path_or_file, self.HEADER, self.rows())


def reverse_minmax(losses: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Map losses onto [0, 1] with the largest loss at 0 and the smallest at 1.

    When all losses are equal (spread at most ``tol``) every score is 1.
    """
    lo, hi = losses.min(), losses.max()
    if hi - lo <= tol:
        return np.ones_like(losses)
    return (losses - hi) / (lo - hi) + 0.0  # no -0.0 at the maximum


def _block_losses(data: Dataset, idx: np.ndarray, coef: np.ndarray, loss: str):
    """Summed out-of-bag losses and OOB counts for one block of fitted subsets."""
    pred = data.design @ coef.T  # (n, m)
    resid = data.y[:, None] - pred
    L = np.abs(resid) if loss == "absolute" else resid * resid
    cols = np.broadcast_to(np.arange(idx.shape[0])[:, None], idx.shape)
    L[idx, cols] = 0.0
    inbag = np.zeros(data.n)
    np.add.at(inbag, idx.ravel(), 1.0)
    return L.sum(axis=1), idx.shape[0] - inbag


def _equal_loss_tol(data: Dataset, loss: str) -> float:
    """Loss spread indistinguishable from rounding error at the outcome's scale."""
    tol = _RELATIVE_TOL * float(np.abs(data.y).max())
    return tol if loss == "absolute" else tol * tol


def _finish(
    total: np.ndarray, counts: np.ndarray, effective: int, averaging: str, tol: float
) -> ReliabilityScores:
    if effective == 0:
        raise AllIterationsDegenerate("every sub-sample was rank deficient")
    if (counts == 0).any():
        missing = np.flatnonzero(counts == 0)
        raise NeverOutOfBag(f"{missing.size} observation(s) never out-of-bag, e.g. row {int(missing[0])}")
    denom = counts if averaging == "oob" else float(effective)
    expected = total / denom
    return ReliabilityScores(expected, reverse_minmax(expected, tol), counts.astype(np.int64), effective)


def score_sample(data: Dataset, config: ScoringConfig = ScoringConfig()) -> ReliabilityScores:
    """Monte Carlo reliability scores.

    Iteration ``s`` draws its sub-sample from the counter stream
    ``(config.seed, s)``.  Rank-deficient draws are redrawn up to
    ``config.max_redraws_per_iteration`` times and the iteration is skipped
    after that.  Results do not depend on ``config.n_jobs``.
    """
    eta = config.eta(data)
    S = config.iterations
    block = max(1, min(S, _BLOCK_CELLS // data.n))
    starts = list(range(0, S, block))

    def run(start: int):
        stop = min(S, start + block)
        idx, coef, ok = draw_fittable_subsamples(
            data.design, data.y, eta, config.seed, (streams.SUBSAMPLE,), start, stop,
            config.max_redraws_per_iteration,
        )
        if not ok.any():
            return np.zeros(data.n), np.zeros(data.n), 0
        sums, counts = _block_losses(data, idx[ok], coef[ok], config.loss)
        return sums, counts, int(ok.sum())

    total = NeumaierSum(np.zeros(data.n))
    counts = np.zeros(data.n)
    effective = 0
    for sums, c, eff in ordered_map(run, starts, config.n_jobs):
        total.add(sums)
        counts += c
        effective += eff
    return _finish(total.value, counts, effective, config.averaging, _equal_loss_tol(data, config.loss))


def score_sample_exhaustive(data: Dataset, config: ScoringConfig = ScoringConfig()) -> ReliabilityScores:
    """Exact expected losses over every size-``eta`` sub-sample.

    Rank-deficient sub-samples are skipped.  ``config.iterations`` and the
    seed are ignored.
    """
    eta = config.eta(data)
    total_subsets = math.comb(data.n, eta)
    if total_subsets > MAX_EXHAUSTIVE:
        raise TooManySubsamples(f"C({data.n}, {eta}) = {total_subsets} exceeds {MAX_EXHAUSTIVE}")
    block = max(1, _BLOCK_CELLS // data.n)
    combos = itertools.combinations(range(data.n), eta)
    total = NeumaierSum(np.zeros(data.n))
    counts = np.zeros(data.n)
    effective = 0
    while True:
        chunk = list(itertools.islice(combos, block))
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.int64)
        coef, ok = fit_subsamples(data.design, data.y, idx)
        if ok.any():
            sums, c = _block_losses(data, idx[ok], coef[ok], config.loss)
            total.add(sums)
            counts += c
            effective += int(ok.sum())
    return _finish(total.value, counts, effective, config.averaging, _equal_loss_tol(data, config.loss))
