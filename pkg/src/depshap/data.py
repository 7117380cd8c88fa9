"""Core data containers: observation tables and feature coalitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class DataMatrix:
    """An n x d numeric observation table with named columns.

    Rows are observations, columns are variables. Construction validates that
    there are at least two rows, every entry is finite, and column names are
    unique. The wrapped array is float64 and never mutated.
    """

    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError(f"expected a 2-d table, got shape {values.shape}")
        if values.shape[0] < 2:
            raise ValidationError(f"need at least 2 rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite value at row {bad[0]}, column {bad[1]}"
            )
        names = tuple(str(c) for c in self.column_names)
        if len(names) != values.shape[1]:
            raise ValidationError(
                f"{len(names)} column names for {values.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise ValidationError("column names are not unique")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_array(cls, values: np.ndarray, column_names: Sequence[str] | None = None) -> "DataMatrix":
        """Wrap an array, auto-naming columns x1..xd when names are omitted."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if column_names is None:
            column_names = tuple(f"x{i + 1}" for i in range(values.shape[1]))
        return cls(values, tuple(column_names))

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.column_names.index(name)
        except ValueError:
            raise ValidationError(f"no column named {name!r}") from None
        return self.values[:, idx]

    def select(self, subset: "FeatureSubset | Sequence[int]") -> "DataMatrix":
        """Project onto the columns of a coalition (or explicit index list)."""
        if isinstance(subset, FeatureSubset):
            if subset.d != self.d:
                raise ValidationError(
                    f"subset universe {subset.d} does not match d={self.d}"
                )
            idx = subset.indices()
        else:
            idx = tuple(int(i) for i in subset)
        names = tuple(self.column_names[i] for i in idx)
        return DataMatrix(self.values[:, list(idx)], names)

    def select_named(self, names: Sequence[str]) -> "DataMatrix":
        return self.select([self.column_names.index(str(n)) for n in names])

    def take_rows(self, indices: np.ndarray) -> "DataMatrix":
        return DataMatrix(self.values[np.asarray(indices, dtype=np.intp)], self.column_names)


@dataclass(frozen=True)
class FeatureSubset:
    """A coalition of feature indices, stored as a bitmask over a universe of d."""

    bits: int
    d: int

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValidationError("universe size must be nonnegative")
        if not 0 <= self.bits < (1 << self.d):
            raise ValidationError(
                f"bitmask {self.bits:#x} outside universe of {self.d} features"
            )

    @classmethod
    def empty(cls, d: int) -> "FeatureSubset":
        return cls(0, d)

    @classmethod
    def full(cls, d: int) -> "FeatureSubset":
        return cls((1 << d) - 1, d)

    @classmethod
    def from_indices(cls, indices: Iterable[int], d: int) -> "FeatureSubset":
        bits = 0
        for i in indices:
            i = int(i)
            if not 0 <= i < d:
                raise ValidationError(f"feature index {i} outside universe of {d}")
            bits |= 1 << i
        return cls(bits, d)

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if self.bits >> i & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.d and bool(self.bits >> i & 1)

    def __or__(self, other: "FeatureSubset") -> "FeatureSubset":
        self._check_universe(other)
        return FeatureSubset(self.bits | other.bits, self.d)

    def __and__(self, other: "FeatureSubset") -> "FeatureSubset":
        self._check_universe(other)
        return FeatureSubset(self.bits & other.bits, self.d)

    def _check_universe(self, other: "FeatureSubset") -> None:
        if self.d != other.d:
            raise ValidationError("subsets live in different universes")

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    def with_member(self, i: int) -> "FeatureSubset":
        if not 0 <= i < self.d:
            raise ValidationError(f"feature index {i} outside universe of {self.d}")
        return FeatureSubset(self.bits | (1 << i), self.d)

    def without_member(self, i: int) -> "FeatureSubset":
        return FeatureSubset(self.bits & ~(1 << i), self.d)
