"""Attribution workflows: decompose dependence on labels, predictions, or
residuals among features, with bootstrap bands and decomposition comparison.

The target kinds are:

* ``labels`` - dependence between observed labels and the features,
* ``predictions`` - dependence between model outputs and the features,
* ``residuals`` - dependence between labels minus predictions and the
  features.

Only the model's input/output pairs are needed; the model itself is never
touched. A ``feature_scope`` restricts the player universe to the named
features: out-of-scope columns are dropped entirely, so a 4-feature scope
over a 50-column table plays a 4-player game.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .data import DataMatrix, FeatureSubset
from .errors import (
    InsufficientRows,
    InternalConsistencyError,
    MissingTarget,
    ShapeMismatch,
    ValidationError,
    ZeroTotal,
)
from .measures import CharacteristicSpec, Measure, evaluate_characteristic
from .rng import STREAM_BOOTSTRAP, substream
from .shapley import (
    BlockPartition,
    Game,
    ShapleyDecomposition,
    block_shapley,
    exact_shapley,
    monte_carlo_shapley,
    shapley_from_value_table,
)

TARGET_KINDS = ("labels", "predictions", "residuals")

# The weighted fast path for distance-correlation bootstraps caches one
# n x n squared-difference matrix per feature.
_FAST_DC_MAX_D = 6
_FAST_DC_MAX_N = 4000


@dataclass(frozen=True)
class ShapleyMethod:
    """Engine choice for a decomposition run."""

    kind: str = "exact"  # "exact" | "monte_carlo" | "block"
    permutations: int = 2000
    seed: int = 0
    blocks: tuple[tuple[str, ...], ...] | None = None
    exact_limit: int = 20

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "monte_carlo", "block"):
            raise ValidationError(f"unknown method kind {self.kind!r}")
        if self.kind == "block" and not self.blocks:
            raise ValidationError("block method needs feature-name blocks")


@dataclass(frozen=True)
class AttributionRequest:
    """Everything needed to run one attribution: data, targets, measure, engine."""

    x: DataMatrix
    labels: np.ndarray | None = None
    predictions: np.ndarray | None = None
    spec: CharacteristicSpec = CharacteristicSpec(Measure.DC)
    method: ShapleyMethod = ShapleyMethod()
    feature_scope: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        for field_name in ("labels", "predictions"):
            vec = getattr(self, field_name)
            if vec is None:
                continue
            vec = np.asarray(vec, dtype=np.float64)
            if vec.ndim != 1 or vec.size != self.x.n:
                raise ValidationError(
                    f"{field_name} must be a vector with one entry per row"
                )
            if not np.all(np.isfinite(vec)):
                raise ValidationError(f"{field_name} contains non-finite values")
            object.__setattr__(self, field_name, vec)
        if self.feature_scope is not None:
            scope = tuple(str(s) for s in self.feature_scope)
            unknown = [s for s in scope if s not in self.x.column_names]
            if unknown:
                raise ValidationError(f"scope names not in table: {unknown}")
            if len(set(scope)) != len(scope) or not scope:
                raise ValidationError("scope must be a nonempty list of unique names")
            object.__setattr__(self, "feature_scope", scope)


def _scoped_features(request: AttributionRequest) -> DataMatrix:
    if request.feature_scope is None:
        return request.x
    return request.x.select_named(request.feature_scope)


def _target_for(request: AttributionRequest, kind: str) -> np.ndarray:
    if kind == "labels":
        if request.labels is None:
            raise MissingTarget("labels are required for this attribution")
        return request.labels
    if kind == "predictions":
        if request.predictions is None:
            raise MissingTarget("predictions are required for this attribution")
        return request.predictions
    if kind == "residuals":
        if request.labels is None or request.predictions is None:
            raise MissingTarget("residuals need both labels and predictions")
        return request.labels - request.predictions
    raise ValidationError(f"unknown target kind {kind!r}")


def _characteristic_game(spec: CharacteristicSpec, target: np.ndarray, xs: DataMatrix) -> Game:
    return Game(xs.d, lambda subset: evaluate_characteristic(spec, target, xs, subset))


def _run_method(game: Game, method: ShapleyMethod, names: tuple[str, ...]) -> ShapleyDecomposition:
    if method.kind == "exact":
        return exact_shapley(game, dimension_limit=method.exact_limit)
    if method.kind == "monte_carlo":
        return monte_carlo_shapley(game, method.permutations, method.seed)
    groups = []
    for block in method.blocks or ():
        try:
            groups.append([names.index(str(name)) for name in block])
        except ValueError as exc:
            raise ValidationError(f"block name not in scope: {exc}") from None
    partition = BlockPartition.from_index_groups(groups, len(names))
    return block_shapley(game, partition)


def _fast_dc_applicable(request: AttributionRequest, xs: DataMatrix) -> bool:
    return (
        request.spec.measure is Measure.DC
        and request.method.kind == "exact"
        and xs.d <= min(_FAST_DC_MAX_D, request.method.exact_limit)
        and xs.n <= _FAST_DC_MAX_N
    )


def _decompose(request: AttributionRequest, kind: str) -> ShapleyDecomposition:
    xs = _scoped_features(request)
    target = _target_for(request, kind)
    if _fast_dc_applicable(request, xs):
        # Same values as the coalition-by-coalition route (up to float
        # rounding), but the per-column distance matrices are built once.
        all_rows = np.arange(xs.n, dtype=np.intp)[None, :]
        values = _dc_bootstrap_values(xs.values, target, all_rows)[0]
        decomposition = ShapleyDecomposition(
            values=values,
            d=xs.d,
            method="exact",
            evaluations_used=(1 << xs.d) - 1,
            marginal_terms=xs.d * (1 << (xs.d - 1)),
        )
    else:
        game = _characteristic_game(request.spec, target, xs)
        decomposition = _run_method(game, request.method, xs.column_names)
    return replace(
        decomposition,
        measure=request.spec,
        target_kind=kind,
        feature_names=xs.column_names,
    )


def adl(request: AttributionRequest) -> ShapleyDecomposition:
    """Attribution of the dependence between observed labels and features."""
    return _decompose(request, "labels")


def adp(request: AttributionRequest) -> ShapleyDecomposition:
    """Attribution of the dependence between model predictions and features."""
    return _decompose(request, "predictions")


def adr(request: AttributionRequest) -> ShapleyDecomposition:
    """Attribution of the dependence between residuals and features.

    Residuals are the raw differences labels - predictions. Individual
    attributions of a nonnegative dependence measure can legitimately be
    negative: adding an irrelevant feature to a coalition dilutes the
    measured dependence, giving that feature negative marginals.
    """
    return _decompose(request, "residuals")


def normalize(decomposition: ShapleyDecomposition) -> np.ndarray:
    """Attribution values rescaled to sum to 1."""
    total = decomposition.total
    if total == 0.0:
        raise ZeroTotal("attribution values sum to zero")
    return decomposition.values / total


@dataclass(frozen=True)
class BootstrapSummary:
    """Point estimate and 95% resampling band per feature."""

    feature_names: tuple[str, ...]
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    resamples: int
    resample_size: int
    seed: int
    mode: str  # "bootstrap" (with replacement) | "subsample" (without)
    target_kind: str
    measure: CharacteristicSpec
    values: np.ndarray  # (resamples, d) decomposition per resample

    def band(self, name: str) -> tuple[float, float]:
        i = self.feature_names.index(name)
        return float(self.lower[i]), float(self.upper[i])

    def point_of(self, name: str) -> float:
        return float(self.point[self.feature_names.index(name)])

    def as_records(self) -> list[dict]:
        return [
            {
                "name": name,
                "value": float(self.point[i]),
                "lower": float(self.lower[i]),
                "upper": float(self.upper[i]),
            }
            for i, name in enumerate(self.feature_names)
        ]


def _resample_indices(n: int, resamples: int, size: int, seed: int, mode: str) -> np.ndarray:
    """One index row per resample, each from its own derived stream."""
    out = np.empty((resamples, size), dtype=np.intp)
    for r in range(resamples):
        stream = substream(seed, STREAM_BOOTSTRAP, r)
        out[r] = stream.choice(n, size=size, replace=(mode == "bootstrap"))
    return out


def bands_separated(a: BootstrapSummary, b: BootstrapSummary) -> np.ndarray:
    """Per-feature flag: the two 95% bands do not overlap."""
    if a.feature_names != b.feature_names:
        raise ShapeMismatch("summaries cover different features")
    return (a.lower > b.upper) | (b.lower > a.upper)


def bootstrap(
    request: AttributionRequest,
    kind: str,
    resamples: int,
    resample_size: int | None = None,
    seed: int = 0,
) -> BootstrapSummary:
    """Row-resampled attribution bands.

    Draws rows with replacement when ``resample_size`` equals the sample size
    ("bootstrap") and without replacement when it is smaller ("subsample");
    requesting more rows than available raises. The point estimate is the
    full-data decomposition; the band is the 2.5%/97.5% empirical quantile of
    the per-resample decompositions. Each resample uses an independent
    derived stream indexed by its position, so the summary is reproducible
    from the seed alone.
    """
    if kind not in TARGET_KINDS:
        raise ValidationError(f"unknown target kind {kind!r}")
    if resamples < 1:
        raise ValidationError(f"need at least one resample, got {resamples}")
    xs = _scoped_features(request)
    target = _target_for(request, kind)
    n = xs.n
    size = n if resample_size is None else int(resample_size)
    if size > n:
        raise InsufficientRows(f"resample size {size} exceeds {n} rows")
    if size < 2:
        raise ValidationError(f"resample size must be at least 2, got {size}")
    mode = "bootstrap" if size == n else "subsample"
    indices = _resample_indices(n, resamples, size, seed, mode)
    point = _decompose(request, kind)

    if _fast_dc_applicable(request, xs):
        values = _dc_bootstrap_values(xs.values, target, indices)
    else:
        values = np.empty((resamples, xs.d))
        for r in range(resamples):
            rows = indices[r]
            sub_x = xs.take_rows(rows)
            game = _characteristic_game(request.spec, target[rows], sub_x)
            values[r] = _run_method(game, request.method, sub_x.column_names).values

    lower = np.quantile(values, 0.025, axis=0)
    upper = np.quantile(values, 0.975, axis=0)
    return BootstrapSummary(
        feature_names=xs.column_names,
        point=point.values,
        lower=lower,
        upper=upper,
        resamples=resamples,
        resample_size=size,
        seed=seed,
        mode=mode,
        target_kind=kind,
        measure=request.spec,
        values=values,
    )


def _dc_bootstrap_values(
    x_values: np.ndarray, target: np.ndarray, indices: np.ndarray
) -> np.ndarray:
    """Exact-method distance-correlation decompositions for all resamples.

    Resampling rows of the data is identical to reweighting rows of the full
    sample by their multiplicities, so the double-centered product sums for
    every resample reduce to matrix products of the full-sample distance
    matrices with a weight matrix (one column per resample). This evaluates
    all coalitions for all resamples without rebuilding distance matrices.
    """
    n, d = x_values.shape
    resamples = indices.shape[0]
    weights = np.zeros((n, resamples))
    for r in range(resamples):
        weights[:, r] = np.bincount(indices[r], minlength=n)
    totals = weights.sum(axis=0)

    target_dist = np.abs(target[:, None] - target[None, :])
    u_t = target_dist @ weights
    t_t = np.sum(weights * u_t, axis=0)
    s_tt = np.einsum("im,im->m", weights, (target_dist * target_dist) @ weights)
    c_tt = np.sum(weights * u_t * u_t, axis=0)
    v_tt = s_tt - 2.0 * c_tt / totals + (t_t * t_t) / totals**2

    sq_cols = [(col[:, None] - col[None, :]) ** 2 for col in x_values.T]
    table = np.zeros(((1 << d), resamples))
    for mask in range(1, 1 << d):
        sq = None
        for j in range(d):
            if mask >> j & 1:
                sq = sq_cols[j] if sq is None else sq + sq_cols[j]
        dist = np.sqrt(sq)
        u_s = dist @ weights
        t_s = np.sum(weights * u_s, axis=0)
        s_ab = np.einsum("im,im->m", weights, (dist * target_dist) @ weights)
        c_ab = np.sum(weights * u_s * u_t, axis=0)
        v_ab = s_ab - 2.0 * c_ab / totals + (t_s * t_t) / totals**2
        s_aa = np.einsum("im,im->m", weights, sq @ weights)
        c_aa = np.sum(weights * u_s * u_s, axis=0)
        v_aa = s_aa - 2.0 * c_aa / totals + (t_s * t_s) / totals**2
        table[mask] = _dc_ratio(v_ab, v_aa, v_tt)
    return shapley_from_value_table(table).T


def _dc_ratio(v_ab: np.ndarray, v_aa: np.ndarray, v_tt: np.ndarray) -> np.ndarray:
    """Vectorized counterpart of the scalar correlation-ratio rule."""
    denom = np.sqrt(np.maximum(v_aa, 0.0) * np.maximum(v_tt, 0.0))
    ratio = np.divide(v_ab, denom, out=np.zeros_like(denom), where=denom > 0)
    if np.any(ratio < -1e-9) or np.any(ratio > 1.0 + 1e-9):
        raise InternalConsistencyError(
            "correlation ratio outside [0, 1] beyond numerical slack"
        )
    return np.sqrt(np.clip(ratio, 0.0, 1.0))


@dataclass(frozen=True)
class DecompositionDiff:
    """Per-feature absolute differences between two decompositions."""

    feature_names: tuple[str, ...]
    diffs: np.ndarray
    delta: float
    flags: np.ndarray
    band_separated: np.ndarray | None = None

    @property
    def flagged_features(self) -> tuple[str, ...]:
        return tuple(n for n, f in zip(self.feature_names, self.flags) if f)


def compare(
    a: ShapleyDecomposition,
    b: ShapleyDecomposition,
    delta: float,
    bands_a: BootstrapSummary | None = None,
    bands_b: BootstrapSummary | None = None,
) -> DecompositionDiff:
    """Flag features whose attributions differ by at least ``delta``.

    When both bootstrap summaries are given, also reports which features have
    non-overlapping 95% bands (the significance convention used throughout).
    """
    if a.d != b.d:
        raise ShapeMismatch(f"decompositions have different sizes: {a.d} vs {b.d}")
    if a.measure is not None and b.measure is not None and a.measure != b.measure:
        raise ShapeMismatch("decompositions use different measures")
    if (
        a.feature_names is not None
        and b.feature_names is not None
        and a.feature_names != b.feature_names
    ):
        raise ShapeMismatch("decompositions cover different features")
    if not math.isfinite(delta):
        raise ValidationError("delta must be finite")
    names = a.feature_names or tuple(f"player{i}" for i in range(a.d))
    diffs = np.abs(a.values - b.values)
    separated = None
    if bands_a is not None and bands_b is not None:
        separated = bands_separated(bands_a, bands_b)
    return DecompositionDiff(
        feature_names=names,
        diffs=diffs,
        delta=float(delta),
        flags=diffs >= delta,
        band_separated=separated,
    )
