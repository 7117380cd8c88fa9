"""Empirical measures of (possibly non-linear) statistical dependence.

Each measure maps a target sample and a feature-subset sample to a scalar, and
doubles as the characteristic function of a coalition game over features via
:func:`evaluate_characteristic`. Four measures are supported:

``r2``
    Coefficient of multiple correlation computed from determinants of the
    joint Pearson correlation matrix. Linear dependence only.
``dc``
    Empirical distance correlation, built from double-centered Euclidean
    distance matrices. Zero (in the population) iff independent.
``aidc``
    Distance correlation after whitening each side by the inverse square root
    of its sample covariance; invariant under invertible affine maps.
``hsic``
    Normalized Hilbert-Schmidt independence criterion with Gaussian kernels
    and a median-heuristic bandwidth.

Conventions (documented here once, relied on throughout):

* The empty coalition has value 0 for every measure, so attribution values
  sum to the full-coalition value.
* ``distance_covariance_sq`` returns the plain double-centered product sum
  without a 1/n^2 factor; the constant cancels in every correlation ratio, so
  only the raw covariance magnitude is convention-dependent.
* The characteristic values used for attribution are the *unsquared* distance
  correlation (and its affine-invariant variant) and the *normalized* HSIC.
  The squared / raw estimators are exposed separately under explicit names.
* Degenerate denominators yield 0 rather than an error: a constant target or
  constant feature block has no dependence to measure.
* Gaussian kernel entries are ``exp(-||wi - wj||^2 / (2 sigma^2))``; the
  median heuristic sets ``2 sigma^2`` equal to the median of the nonzero
  squared pairwise distances.

All functions are pure; large inputs are processed in fixed-order row blocks
(or collapsed onto unique rows with multiplicity weights when the data is
heavily duplicated), so results are deterministic for a given input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .data import DataMatrix, FeatureSubset
from .errors import (
    DegenerateBandwidth,
    InternalConsistencyError,
    NonPositiveBandwidth,
    RowCountMismatch,
    SingularCorrelationMatrix,
    SingularCovariance,
    ValidationError,
    ZeroVarianceColumn,
)

# Deterministic path selection for the O(n^2) kernels: dense matrices up to
# _DENSE_MAX_N rows, duplicate-collapse above that when the joint sample has
# few unique rows, fixed-order streaming otherwise.
_DENSE_MAX_N = 2048
_COMPRESS_MAX_UNIQUE = 128
_STREAM_BLOCK = 512


class Measure(str, Enum):
    R2 = "r2"
    DC = "dc"
    AIDC = "aidc"
    HSIC = "hsic"


@dataclass(frozen=True)
class CharacteristicSpec:
    """Choice of dependence measure plus its parameters.

    ``hsic_bandwidth`` of None selects the median heuristic independently for
    the target and feature sides; a fixed value applies to both sides.
    ``aidc_ridge`` is added to the covariance eigenvalues before whitening
    (default 0: singular covariance is an error, never silently regularized).
    """

    measure: Measure
    hsic_bandwidth: float | None = None
    aidc_ridge: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "measure", Measure(self.measure))
        if self.hsic_bandwidth is not None and not self.hsic_bandwidth > 0:
            raise NonPositiveBandwidth(
                f"fixed bandwidth must be positive, got {self.hsic_bandwidth}"
            )
        if self.aidc_ridge < 0:
            raise ValidationError(f"ridge must be nonnegative, got {self.aidc_ridge}")


# ---------------------------------------------------------------------------
# coercion and small shared helpers
# ---------------------------------------------------------------------------


def _as_2d(data) -> np.ndarray:
    """Coerce a DataMatrix, vector, or 2-d array to a float64 (n, d) array."""
    if isinstance(data, DataMatrix):
        return data.values
    values = np.asarray(data, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValidationError(f"expected a vector or 2-d array, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("input contains non-finite values")
    return values


def _check_rows(y: np.ndarray, x: np.ndarray) -> int:
    if y.shape[0] != x.shape[0]:
        raise RowCountMismatch(
            f"row counts differ: {y.shape[0]} vs {x.shape[0]}"
        )
    if y.shape[0] < 2:
        raise ValidationError("need at least 2 rows")
    return y.shape[0]


def _column_names(data, d: int) -> tuple[str, ...]:
    if isinstance(data, DataMatrix):
        return data.column_names
    return tuple(f"column {i}" for i in range(d))


def _clamp_unit(value: float, slack: float = 1e-9) -> float:
    """Clamp to [0, 1]; violations beyond the slack are internal errors."""
    if value < -slack or value > 1.0 + slack:
        raise InternalConsistencyError(
            f"value {value!r} outside [0, 1] beyond numerical slack"
        )
    return min(max(value, 0.0), 1.0)


def _clamp_nonneg(value: float, scale: float) -> float:
    """Clamp tiny negative round-off to 0, relative to the problem scale."""
    if value >= 0.0:
        return value
    if -value <= 1e-9 * max(scale, 1e-30):
        return 0.0
    raise InternalConsistencyError(
        f"value {value!r} negative beyond numerical slack (scale {scale!r})"
    )


def _ratio_or_zero(vab: float, vaa: float, vbb: float) -> float:
    """Correlation-style ratio of centered product sums, with the zero rule.

    The self-products are sums of squares, so negatives can only be round-off
    and are clamped; a zero denominator returns 0. Ratios outside [0, 1]
    beyond slack indicate an internal bug and raise.
    """
    denom = math.sqrt(max(vaa, 0.0) * max(vbb, 0.0))
    if denom == 0.0:
        return 0.0
    ratio = vab / denom
    if ratio < -1e-9 or ratio > 1.0 + 1e-9:
        raise InternalConsistencyError(
            f"correlation ratio {ratio!r} outside [0, 1] beyond numerical slack"
        )
    return min(max(ratio, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Pearson correlation and the multiple-correlation characteristic
# ---------------------------------------------------------------------------


def pearson_correlation_matrix(data) -> np.ndarray:
    """Sample Pearson correlation matrix of the columns of ``data``.

    Raises :class:`ZeroVarianceColumn` if any column is constant. The result
    is symmetric with unit diagonal and entries clipped to [-1, 1].
    """
    values = _as_2d(data)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 rows")
    names = _column_names(data, values.shape[1])
    sd = values.std(axis=0, ddof=1)
    for j, s in enumerate(sd):
        if s == 0.0:
            raise ZeroVarianceColumn(names[j])
    corr = np.atleast_2d(np.corrcoef(values, rowvar=False))
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def r2_characteristic(target, features) -> float:
    """Squared multiple correlation of ``target`` on the feature columns.

    Computed as 1 minus the ratio of the joint correlation determinant to the
    feature-block correlation determinant. Empty feature sets return 0 by the
    empty-coalition convention.
    """
    y = _as_2d(target)
    if y.shape[1] != 1:
        raise ValidationError("target must be a single column")
    x = _as_2d(features)
    if x.shape[1] == 0:
        return 0.0
    _check_rows(y, x)
    feature_names = _column_names(features, x.shape[1])
    joint = DataMatrix(
        np.column_stack([y, x]), ("target",) + tuple(feature_names)
    )
    corr = pearson_correlation_matrix(joint)
    det_features = float(np.linalg.det(corr[1:, 1:]))
    if abs(det_features) < 1e-12:
        raise SingularCorrelationMatrix(
            f"feature correlation determinant {det_features!r} below 1e-12"
        )
    det_joint = float(np.linalg.det(corr))
    return _clamp_unit(1.0 - det_joint / det_features)


# ---------------------------------------------------------------------------
# distance matrices and double centering
# ---------------------------------------------------------------------------


def euclidean_distance_matrix(data) -> np.ndarray:
    """Pairwise Euclidean distances between the rows of ``data``."""
    values = _as_2d(data)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 rows")
    return squareform(pdist(values))


def double_center(matrix: np.ndarray) -> np.ndarray:
    """Subtract row means, column means, and add back the grand mean.

    The result has all row sums and column sums equal to zero.
    """
    b = np.asarray(matrix, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {b.shape}")
    row_means = b.mean(axis=1, keepdims=True)
    col_means = b.mean(axis=0, keepdims=True)
    return b - row_means - col_means + b.mean()


# ---------------------------------------------------------------------------
# centered-product machinery shared by distance covariance and HSIC
#
# For symmetric matrices a, b and nonnegative weights w (multiplicities of
# rows), the weighted double-centered product sum
#
#     sum_{ij} w_i w_j A_ij B_ij,   A = a double-centered under weights w,
#
# expands to  S_ab - (2/W) sum_i w_i Ra_i Rb_i + Ta Tb / W^2  with
# Ra_i = sum_j w_j a_ij, Ta = sum_ij w_i w_j a_ij, W = sum w. With unit
# weights this is the plain double-centered product over all n^2 pairs.
# ---------------------------------------------------------------------------


def _finalize_products(sab, saa, sbb, ra, rb, w) -> tuple[float, float, float]:
    total = float(w.sum())
    ta = float(ra @ w)
    tb = float(rb @ w)
    cab = float(np.sum(w * ra * rb))
    caa = float(np.sum(w * ra * ra))
    cbb = float(np.sum(w * rb * rb))
    vab = sab - 2.0 * cab / total + ta * tb / total**2
    vaa = saa - 2.0 * caa / total + ta * ta / total**2
    vbb = sbb - 2.0 * cbb / total + tb * tb / total**2
    return vab, vaa, vbb


def _weighted_products(da: np.ndarray, db: np.ndarray, w: np.ndarray):
    """Centered product sums for explicit (possibly weighted) matrices."""
    ra = da @ w
    rb = db @ w
    sab = float(w @ ((da * db) @ w))
    saa = float(w @ ((da * da) @ w))
    sbb = float(w @ ((db * db) @ w))
    return _finalize_products(sab, saa, sbb, ra, rb, w)


def _streamed_distance_products(y2: np.ndarray, x2: np.ndarray):
    """Centered product sums over row blocks, never materializing n x n."""
    n = y2.shape[0]
    ra = np.empty(n)
    rb = np.empty(n)
    sab = saa = sbb = 0.0
    for start in range(0, n, _STREAM_BLOCK):
        stop = min(start + _STREAM_BLOCK, n)
        da = cdist(y2[start:stop], y2)
        db = cdist(x2[start:stop], x2)
        ra[start:stop] = da.sum(axis=1)
        rb[start:stop] = db.sum(axis=1)
        sab += float(np.sum(da * db))
        saa += float(np.sum(da * da))
        sbb += float(np.sum(db * db))
    return _finalize_products(sab, saa, sbb, ra, rb, np.ones(n))


def _compress_joint(y2: np.ndarray, x2: np.ndarray):
    """Collapse duplicate (target, feature) rows to unique rows with counts.

    Returns None when the data is not duplicated enough to be worth it.
    """
    joint = np.ascontiguousarray(np.concatenate([y2, x2], axis=1))
    unique, counts = np.unique(joint, axis=0, return_counts=True)
    if unique.shape[0] > _COMPRESS_MAX_UNIQUE:
        return None
    split = y2.shape[1]
    return unique[:, :split], unique[:, split:], counts.astype(np.float64)


def _distance_products(y2: np.ndarray, x2: np.ndarray):
    """(V_xy, V_yy, V_xx)-style centered distance product sums, path-routed."""
    n = y2.shape[0]
    if n <= _DENSE_MAX_N:
        w = np.ones(n)
        return _weighted_products(
            squareform(pdist(y2)), squareform(pdist(x2)), w
        )
    compressed = _compress_joint(y2, x2)
    if compressed is not None:
        uy, ux, counts = compressed
        if uy.shape[0] == 1:
            # Single unique row: all distances are zero on both sides.
            return 0.0, 0.0, 0.0
        return _weighted_products(
            squareform(pdist(uy)), squareform(pdist(ux)), counts
        )
    return _streamed_distance_products(y2, x2)


# ---------------------------------------------------------------------------
# distance covariance / correlation
# ---------------------------------------------------------------------------


def distance_covariance_sq(target, features) -> float:
    """Squared distance covariance as a plain double-centered product sum.

    No 1/n^2 normalization is applied, so the absolute magnitude depends on
    that convention; correlation ratios do not.
    """
    y = _as_2d(target)
    x = _as_2d(features)
    _check_rows(y, x)
    vab, vaa, vbb = _distance_products(y, x)
    return _clamp_nonneg(vab, math.sqrt(max(vaa, 0.0) * max(vbb, 0.0)))


def distance_correlation_sq(target, features) -> float:
    """Squared empirical distance correlation in [0, 1].

    Returns 0 when either marginal distance covariance vanishes (e.g. a
    constant sample on one side).
    """
    y = _as_2d(target)
    x = _as_2d(features)
    _check_rows(y, x)
    vab, vaa, vbb = _distance_products(y, x)
    return _ratio_or_zero(vab, vaa, vbb)


def distance_correlation(target, features) -> float:
    """Empirical distance correlation (square root of the squared form).

    This is the scale used by the ``dc`` characteristic function.
    """
    return math.sqrt(distance_correlation_sq(target, features))


# ---------------------------------------------------------------------------
# affine-invariant distance correlation
# ---------------------------------------------------------------------------


def affine_whiten(data, ridge: float = 0.0):
    """Rescale by the inverse square root of the sample covariance.

    The whitened sample has identity covariance (when ``ridge`` is 0), which
    makes distance correlation invariant under invertible affine maps of the
    input. Returns the same container type it was given.
    """
    values = _as_2d(data)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 rows to whiten")
    if ridge < 0:
        raise ValidationError(f"ridge must be nonnegative, got {ridge}")
    cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals.min() + ridge <= 1e-12:
        raise SingularCovariance(
            f"smallest covariance eigenvalue {eigvals.min():.3e} + ridge "
            f"{ridge:.3e} is not positive"
        )
    inv_sqrt = (eigvecs * (1.0 / np.sqrt(eigvals + ridge))) @ eigvecs.T
    whitened = values @ inv_sqrt
    if isinstance(data, DataMatrix):
        return DataMatrix(whitened, data.column_names)
    return whitened


def _constant_rows(values: np.ndarray) -> bool:
    return bool(np.all(values == values[0]))


def aidc_sq(target, features, ridge: float = 0.0) -> float:
    """Squared affine-invariant distance correlation.

    Either side being constant yields 0 (no dependence to measure), mirroring
    the distance-correlation zero rule; whitening is skipped in that case
    since a zero-variance covariance cannot be inverted.
    """
    y = _as_2d(target)
    x = _as_2d(features)
    _check_rows(y, x)
    if _constant_rows(y) or _constant_rows(x):
        return 0.0
    return distance_correlation_sq(affine_whiten(y, ridge), affine_whiten(x, ridge))


def aidc(target, features, ridge: float = 0.0) -> float:
    """Affine-invariant distance correlation; the ``aidc`` characteristic."""
    return math.sqrt(aidc_sq(target, features, ridge))


# ---------------------------------------------------------------------------
# HSIC with Gaussian kernels
# ---------------------------------------------------------------------------


def gaussian_kernel_matrix(data, bandwidth: float) -> np.ndarray:
    """Gaussian kernel matrix with entries exp(-d_ij^2 / (2 bandwidth^2))."""
    if not bandwidth > 0:
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {bandwidth}")
    values = _as_2d(data)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 rows")
    sq = squareform(pdist(values, "sqeuclidean"))
    kernel = np.exp(-sq / (2.0 * bandwidth * bandwidth))
    np.fill_diagonal(kernel, 1.0)
    return kernel


def _median_sigma(values: np.ndarray) -> float | None:
    """Median-heuristic bandwidth, or None when all rows coincide.

    Sets 2 sigma^2 to the median nonzero squared pairwise distance, i.e.
    sigma is the median nonzero distance divided by sqrt(2).
    """
    sq = pdist(values, "sqeuclidean")
    nonzero = sq[sq > 0.0]
    if nonzero.size == 0:
        return None
    return math.sqrt(0.5 * float(np.median(nonzero)))


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Median of the multiset where values[i] occurs weights[i] times.

    Matches np.median on the expanded array exactly (midpoint of the two
    central elements for even totals).
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    csum = np.cumsum(weights[order])
    total = int(csum[-1])
    lo = v[np.searchsorted(csum, (total - 1) // 2, side="right")]
    hi = v[np.searchsorted(csum, total // 2, side="right")]
    return 0.5 * (float(lo) + float(hi))


def _median_sigma_weighted(values: np.ndarray, counts: np.ndarray) -> float | None:
    """Median-heuristic bandwidth over unique rows with multiplicities."""
    if values.shape[0] < 2:
        return None
    sq = pdist(values, "sqeuclidean")
    pair_weights = squareform(np.outer(counts, counts), checks=False)
    keep = sq > 0.0
    if not np.any(keep):
        return None
    return math.sqrt(0.5 * _weighted_median(sq[keep], pair_weights[keep]))


def median_heuristic(data) -> float:
    """Median-heuristic Gaussian bandwidth for a sample.

    Raises :class:`DegenerateBandwidth` when every pairwise distance is zero.
    """
    values = _as_2d(data)
    if values.shape[0] < 2:
        raise ValidationError("need at least 2 rows")
    sigma = _median_sigma(values)
    if sigma is None:
        raise DegenerateBandwidth("all pairwise distances are zero")
    return sigma


def _streamed_kernel_products(y2, x2, sigma_y, sigma_x):
    n = y2.shape[0]
    gamma_y = 1.0 / (2.0 * sigma_y * sigma_y)
    gamma_x = 1.0 / (2.0 * sigma_x * sigma_x)
    ra = np.empty(n)
    rb = np.empty(n)
    sab = saa = sbb = 0.0
    for start in range(0, n, _STREAM_BLOCK):
        stop = min(start + _STREAM_BLOCK, n)
        ky = np.exp(-gamma_y * cdist(y2[start:stop], y2, "sqeuclidean"))
        kx = np.exp(-gamma_x * cdist(x2[start:stop], x2, "sqeuclidean"))
        ra[start:stop] = ky.sum(axis=1)
        rb[start:stop] = kx.sum(axis=1)
        sab += float(np.sum(ky * kx))
        saa += float(np.sum(ky * ky))
        sbb += float(np.sum(kx * kx))
    return _finalize_products(sab, saa, sbb, ra, rb, np.ones(n))


def _hsic_products(y2: np.ndarray, x2: np.ndarray, bandwidth: float | None):
    """Centered kernel product sums (xy, yy, xx) over all n^2 pairs.

    Returns None when either side is degenerate (all rows identical): the
    centered kernel vanishes exactly, so every HSIC quantity is 0.
    """
    n = y2.shape[0]
    if _constant_rows(y2) or _constant_rows(x2):
        return None

    if n <= _DENSE_MAX_N:
        sigma_y = bandwidth if bandwidth is not None else _median_sigma(y2)
        sigma_x = bandwidth if bandwidth is not None else _median_sigma(x2)
        if sigma_y is None or sigma_x is None:
            return None
        ky = gaussian_kernel_matrix(y2, sigma_y)
        kx = gaussian_kernel_matrix(x2, sigma_x)
        return _weighted_products(ky, kx, np.ones(n))

    compressed = _compress_joint(y2, x2)
    if compressed is not None:
        uy, ux, counts = compressed
        if bandwidth is not None:
            sigma_y: float | None = bandwidth
            sigma_x: float | None = bandwidth
        else:
            sigma_y = _median_sigma_weighted(uy, counts)
            sigma_x = _median_sigma_weighted(ux, counts)
        if sigma_y is None or sigma_x is None:
            return None
        ky = gaussian_kernel_matrix(uy, sigma_y)
        kx = gaussian_kernel_matrix(ux, sigma_x)
        return _weighted_products(ky, kx, counts)

    sigma_y = bandwidth if bandwidth is not None else _median_sigma(y2)
    sigma_x = bandwidth if bandwidth is not None else _median_sigma(x2)
    if sigma_y is None or sigma_x is None:
        return None
    return _streamed_kernel_products(y2, x2, sigma_y, sigma_x)


def hsic(target, features, bandwidth: float | None = None) -> float:
    """Biased empirical HSIC with Gaussian kernels.

    Equals ``trace(K H L H) / n^2`` with ``H`` the centering matrix, which is
    algebraically the three-sum V-statistic form. ``bandwidth`` of None
    selects the median heuristic independently per side. Constant input on
    either side gives exactly 0 (the centered kernel vanishes).
    """
    y = _as_2d(target)
    x = _as_2d(features)
    n = _check_rows(y, x)
    products = _hsic_products(y, x, bandwidth)
    if products is None:
        return 0.0
    vab, vaa, vbb = products
    scale = math.sqrt(max(vaa, 0.0) * max(vbb, 0.0))
    if scale == 0.0:
        return 0.0
    return _clamp_nonneg(vab, scale) / (n * n)


def hsic_normalized(target, features, bandwidth: float | None = None) -> float:
    """HSIC normalized by the marginal kernel self-products, in [0, 1].

    This is the scale used by the ``hsic`` characteristic function; the
    normalization makes values comparable across bandwidths and sample sizes
    in the same way distance correlation normalizes distance covariance.
    """
    y = _as_2d(target)
    x = _as_2d(features)
    _check_rows(y, x)
    products = _hsic_products(y, x, bandwidth)
    if products is None:
        return 0.0
    vab, vaa, vbb = products
    return _ratio_or_zero(vab, vaa, vbb)


# ---------------------------------------------------------------------------
# characteristic-function dispatch
# ---------------------------------------------------------------------------


def evaluate_characteristic(
    spec: CharacteristicSpec,
    target,
    features: DataMatrix,
    subset: FeatureSubset | None = None,
) -> float:
    """Value of the chosen dependence measure between target and a coalition.

    ``subset`` of None means the full feature set; the empty coalition is 0
    for every measure.
    """
    if subset is None:
        subset = FeatureSubset.full(features.d)
    if subset.is_empty:
        return 0.0
    projected = features.select(subset)
    if spec.measure is Measure.R2:
        return r2_characteristic(target, projected)
    if spec.measure is Measure.DC:
        return distance_correlation(target, projected)
    if spec.measure is Measure.AIDC:
        return aidc(target, projected, spec.aidc_ridge)
    if spec.measure is Measure.HSIC:
        return hsic_normalized(target, projected, spec.hsic_bandwidth)
    raise ValidationError(f"unknown measure {spec.measure!r}")
