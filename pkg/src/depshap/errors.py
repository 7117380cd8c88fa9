"""Exception hierarchy.

Every library error derives from :class:`DepshapError` and carries an
``exit_code`` used by the CLI: 2 for configuration problems, 3 for data
validation failures, 4 for numeric failures (singularities, degenerate
inputs discovered mid-computation).
"""

from __future__ import annotations


class DepshapError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class ConfigError(DepshapError):
    """Inconsistent or malformed run configuration."""

    exit_code = 2


class ValidationError(DepshapError):
    """Input data failed ingestion validation."""

    exit_code = 3


class RowCountMismatch(ValidationError):
    """Target and feature samples have different numbers of rows."""


class ShapeMismatch(ValidationError):
    """Two decompositions are not comparable (different size or measure)."""


class MissingTarget(ValidationError):
    """The requested attribution needs a target column that was not supplied."""


class InsufficientRows(ValidationError):
    """Fewer rows available than the requested resample size."""


class NumericError(DepshapError):
    """Numeric failure while evaluating a measure or fitting a model."""

    exit_code = 4


class ZeroVarianceColumn(NumericError):
    """A column is constant, so its correlation is undefined."""

    def __init__(self, name: str):
        super().__init__(f"column {name!r} has zero sample variance")
        self.name = name


class SingularCorrelationMatrix(NumericError):
    """Feature correlation matrix is numerically singular (collinear features)."""


class SingularCovariance(NumericError):
    """Sample covariance is not invertible, so whitening is undefined."""


class NonPositiveBandwidth(NumericError):
    """A fixed kernel bandwidth must be strictly positive."""


class DegenerateBandwidth(NumericError):
    """All pairwise distances are zero; the median heuristic is undefined."""


class PlayerOutOfRange(ConfigError):
    """Player index outside the game's universe."""


class DimensionTooLarge(ConfigError):
    """Exact enumeration requested beyond the configured dimension cap."""

    def __init__(self, d: int, limit: int):
        super().__init__(
            f"exact Shapley enumeration over {d} players exceeds the cap of "
            f"{limit}; use Monte Carlo or block decomposition, or raise the cap"
        )
        self.d = d
        self.limit = limit


class InvalidPartition(ConfigError):
    """Blocks do not form a disjoint cover of the player universe."""


class ZeroTotal(NumericError):
    """Attribution values sum to zero; normalization is undefined."""


class RankDeficientDesign(NumericError):
    """Least-squares design matrix does not have full column rank."""


class InternalConsistencyError(DepshapError):
    """A computed value violated its theoretical range beyond numerical slack."""

    exit_code = 4
