"""Exception hierarchy.

Every error carries a short machine-readable ``code`` that the command line
front end reports next to the human-readable message.  Errors that signal an
unfittable (sub-)sample derive from :class:`DegenerateSampleError`; resampling
loops treat those as a dropped replicate rather than a fatal failure.
"""

from __future__ import annotations


class SFRError(Exception):
    """Base class for all package errors."""

    code = "sfr_error"


class ValidationError(SFRError, ValueError):
    """Invalid input data or configuration."""

    code = "invalid_input"


class ComputationError(SFRError, RuntimeError):
    """A numerical procedure could not produce a result."""

    code = "computation_failed"


class DegenerateSampleError(ComputationError):
    """The sample at hand does not identify the model."""

    code = "degenerate_sample"


class RankDeficient(DegenerateSampleError):
    code = "rank_deficient"


class DegenerateWeights(DegenerateSampleError):
    code = "degenerate_weights"


class NeverOutOfBag(DegenerateSampleError):
    code = "never_out_of_bag"


class AllIterationsDegenerate(DegenerateSampleError):
    code = "all_iterations_degenerate"


class TooManyFailures(ComputationError):
    code = "too_many_failures"


class TooManySubsamples(ValidationError):
    code = "too_many_subsamples"


class NoConvergence(ComputationError):
    code = "no_convergence"


class NoConsensus(DegenerateSampleError):
    code = "no_consensus"


class TooFewSamples(ValidationError):
    code = "too_few_samples"


class MissingColumn(ValidationError):
    code = "missing_column"


class NonNumericCell(ValidationError):
    code = "non_numeric_cell"

    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric value {value!r} at line {row}, column {column!r}")


class EmptyAfterNaDrop(ValidationError):
    code = "empty_after_na_drop"
