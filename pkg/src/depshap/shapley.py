"""Exact, Monte Carlo, and block Shapley decomposition of coalition games.

A game is any deterministic map from feature coalitions to real payoffs with
the empty coalition fixed at 0. Decompositions report the number of distinct
coalition evaluations they consumed and the number of marginal-contribution
terms their method aggregates, so the cost of exact enumeration versus block
or sampled computation is visible in the output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import FeatureSubset
from .errors import (
    DimensionTooLarge,
    InvalidPartition,
    PlayerOutOfRange,
    ValidationError,
)
from .measures import CharacteristicSpec
from .rng import STREAM_MC_PERMUTATIONS, substream

EXACT_DIMENSION_LIMIT = 20


class Game:
    """Memoized characteristic-function game over ``d`` players.

    The wrapped function is called at most once per distinct coalition; the
    empty coalition is the constant 0 by convention and never triggers a
    call. Evaluation must be pure, so concurrent duplicate computation of a
    coalition would be harmless (idempotent cache inserts).
    """

    def __init__(self, d: int, fn: Callable[[FeatureSubset], float]):
        if d < 1:
            raise ValidationError(f"need at least one player, got d={d}")
        self.d = d
        self._fn = fn
        self._cache: dict[int, float] = {0: 0.0}
        self._evaluations = 0

    def evaluate_mask(self, mask: int) -> float:
        try:
            return self._cache[mask]
        except KeyError:
            pass
        value = float(self._fn(FeatureSubset(mask, self.d)))
        self._cache[mask] = value
        self._evaluations += 1
        return value

    def evaluate(self, subset: FeatureSubset) -> float:
        if subset.d != self.d:
            raise ValidationError(
                f"subset universe {subset.d} does not match game d={self.d}"
            )
        return self.evaluate_mask(subset.bits)

    @property
    def evaluations(self) -> int:
        """Distinct nonempty coalitions evaluated so far."""
        return self._evaluations


@dataclass(frozen=True)
class ShapleyDecomposition:
    """Per-player attribution values plus how they were computed."""

    values: np.ndarray
    d: int
    method: str  # "exact" | "monte_carlo" | "block"
    evaluations_used: int
    marginal_terms: int
    standard_errors: np.ndarray | None = None
    permutations: int | None = None
    seed: int | None = None
    blocks: tuple[tuple[int, ...], ...] | None = None
    measure: CharacteristicSpec | None = None
    target_kind: str = "custom"
    feature_names: tuple[str, ...] | None = None

    @property
    def total(self) -> float:
        return float(np.sum(self.values))

    def value_of(self, name: str) -> float:
        if self.feature_names is None:
            raise ValidationError("decomposition has no feature names")
        return float(self.values[self.feature_names.index(name)])

    def as_records(self) -> list[dict]:
        names = self.feature_names or tuple(f"player{i}" for i in range(self.d))
        records = []
        for i, name in enumerate(names):
            rec = {"name": name, "value": float(self.values[i])}
            if self.standard_errors is not None:
                se = float(self.standard_errors[i])
                rec["standard_error"] = None if math.isnan(se) else se
            records.append(rec)
        return records


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint feature blocks covering the full player universe."""

    blocks: tuple[FeatureSubset, ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise InvalidPartition("partition has no blocks")
        d = self.blocks[0].d
        union = 0
        total = 0
        for block in self.blocks:
            if block.d != d:
                raise InvalidPartition("blocks live in different universes")
            if block.is_empty:
                raise InvalidPartition("empty block")
            union |= block.bits
            total += len(block)
        if union != (1 << d) - 1 or total != d:
            raise InvalidPartition("blocks must be disjoint and cover all players")

    @property
    def d(self) -> int:
        return self.blocks[0].d

    @classmethod
    def from_index_groups(cls, groups: Sequence[Sequence[int]], d: int) -> "BlockPartition":
        return cls(tuple(FeatureSubset.from_indices(g, d) for g in groups))


def _popcount_table(d: int) -> np.ndarray:
    table = np.zeros(1 << d, dtype=np.uint8)
    for i in range(d):
        table[1 << i : 1 << (i + 1)] = table[: 1 << i] + 1
    return table


def shapley_from_value_table(values: np.ndarray) -> np.ndarray:
    """Shapley values from a dense table of coalition values.

    ``values`` has one row per bitmask (2^d rows, mask order) and may carry
    extra trailing axes, e.g. one column per bootstrap resample; the result
    has shape (d, ...). Row 0 (the empty coalition) is used as given.
    """
    values = np.asarray(values, dtype=np.float64)
    size = values.shape[0]
    d = size.bit_length() - 1
    if size != 1 << d or d < 1:
        raise ValidationError(f"table length {size} is not a power of two")
    popcnt = _popcount_table(d)
    masks = np.arange(size, dtype=np.intp)
    inv_binom = np.array([1.0 / math.comb(d - 1, k) for k in range(d)])
    phi = np.empty((d,) + values.shape[1:], dtype=np.float64)
    for v in range(d):
        bit = 1 << v
        without = masks[(masks & bit) == 0]
        diffs = values[without | bit] - values[without]
        weights = inv_binom[popcnt[without]]
        if diffs.ndim > 1:
            weights = weights.reshape((-1,) + (1,) * (diffs.ndim - 1))
        phi[v] = np.sum(diffs * weights, axis=0) / d
    return phi


def marginal_contribution_mean(game: Game, player: int, team_size: int) -> float:
    """Mean of C(S + player) - C(S) over all teams S of the given size.

    Enumerates every one of the binomial(d-1, team_size) teams excluding the
    player; intended for small d and as the building block of the exact
    decomposition's definition.
    """
    d = game.d
    if not 0 <= player < d:
        raise PlayerOutOfRange(f"player {player} outside universe of {d}")
    if not 0 <= team_size <= d - 1:
        raise ValidationError(f"team size {team_size} outside [0, {d - 1}]")
    others = [i for i in range(d) if i != player]
    bit = 1 << player
    total = 0.0
    count = 0
    for team in itertools.combinations(others, team_size):
        mask = 0
        for i in team:
            mask |= 1 << i
        total += game.evaluate_mask(mask | bit) - game.evaluate_mask(mask)
        count += 1
    return total / count


def exact_shapley(
    game: Game,
    *,
    dimension_limit: int = EXACT_DIMENSION_LIMIT,
    allow_large: bool = False,
) -> ShapleyDecomposition:
    """Exact Shapley decomposition by full coalition enumeration.

    Averages the size-k marginal-contribution means over all team sizes.
    Evaluates each of the 2^d - 1 nonempty coalitions exactly once; refuses
    d beyond ``dimension_limit`` unless ``allow_large`` is set.
    """
    d = game.d
    if d > dimension_limit and not allow_large:
        raise DimensionTooLarge(d, dimension_limit)
    before = game.evaluations
    values = np.empty(1 << d, dtype=np.float64)
    values[0] = 0.0
    for mask in range(1, 1 << d):
        values[mask] = game.evaluate_mask(mask)
    phi = shapley_from_value_table(values)
    return ShapleyDecomposition(
        values=phi,
        d=d,
        method="exact",
        evaluations_used=game.evaluations - before,
        marginal_terms=d * (1 << (d - 1)),
    )


def monte_carlo_shapley(game: Game, permutations: int, seed: int = 0) -> ShapleyDecomposition:
    """Permutation-sampling Monte Carlo estimate of the Shapley values.

    Each sampled permutation contributes one marginal term per player (the
    value gained when the player joins the players preceding it), an unbiased
    draw of that player's Shapley value. Permutations come from a seeded
    counter-based stream, so results are reproducible from (seed, p) alone.
    Standard errors are the per-player sample standard deviations of the
    marginal terms divided by sqrt(p); NaN when p == 1.
    """
    if permutations < 1:
        raise ValidationError(f"need at least one permutation, got {permutations}")
    d = game.d
    before = game.evaluations
    rng = substream(seed, STREAM_MC_PERMUTATIONS)
    perms = rng.permuted(np.tile(np.arange(d), (permutations, 1)), axis=1)
    sums = np.zeros(d)
    sumsq = np.zeros(d)
    for row in perms:
        mask = 0
        previous = 0.0
        for v in row:
            mask |= 1 << int(v)
            current = game.evaluate_mask(mask)
            delta = current - previous
            sums[v] += delta
            sumsq[v] += delta * delta
            previous = current
    values = sums / permutations
    if permutations > 1:
        variances = np.maximum(sumsq - permutations * values**2, 0.0) / (permutations - 1)
        standard_errors = np.sqrt(variances / permutations)
    else:
        standard_errors = np.full(d, np.nan)
    return ShapleyDecomposition(
        values=values,
        d=d,
        method="monte_carlo",
        evaluations_used=game.evaluations - before,
        marginal_terms=permutations * d,
        standard_errors=standard_errors,
        permutations=permutations,
        seed=seed,
    )


def block_shapley(game: Game, partition: BlockPartition) -> ShapleyDecomposition:
    """Exact Shapley values computed independently within each block.

    Players outside the active block are held absent (never join a
    coalition), which is the right semantics when blocks are mutually
    independent: each block's decomposition only needs its own 2^|b| - 1
    coalition values, for a total of sum(|b| * 2^(|b|-1)) marginal terms
    instead of d * 2^(d-1).
    """
    if partition.d != game.d:
        raise InvalidPartition(
            f"partition universe {partition.d} does not match game d={game.d}"
        )
    before = game.evaluations
    phi = np.zeros(game.d)
    marginal_terms = 0
    for block in partition.blocks:
        indices = block.indices()

        def embed(local: FeatureSubset, indices=indices) -> float:
            mask = 0
            for i in local.indices():
                mask |= 1 << indices[i]
            return game.evaluate_mask(mask)

        sub = exact_shapley(Game(len(indices), embed))
        phi[list(indices)] = sub.values
        marginal_terms += sub.marginal_terms
    return ShapleyDecomposition(
        values=phi,
        d=game.d,
        method="block",
        evaluations_used=game.evaluations - before,
        marginal_terms=marginal_terms,
        blocks=tuple(block.indices() for block in partition.blocks),
    )
