"""Seeded synthetic data generators and a small least-squares fitter.

Each generator draws every column from its own derived random stream, so a
sample is reproducible byte-for-byte from (name, parameters, n, seed) and the
feature matrix does not depend on parameters that only enter the response
(e.g. the drift time index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import DataMatrix
from .errors import RankDeficientDesign, ValidationError
from .rng import (
    STREAM_DGP_DRIFT,
    STREAM_DGP_INTERACTION,
    STREAM_DGP_QUADRATIC,
    STREAM_DGP_XOR,
    substream,
)

# Sub-key for response-noise draws, clear of any column index.
_NOISE_KEY = 1_000_000

# 0-based columns entering the three-way interaction regressor (x3 * x4 * x5).
_THREE_WAY_COLUMNS = (2, 3, 4)


@dataclass(frozen=True)
class DgpSample:
    """One simulated draw: features, response, and how it was generated."""

    x: DataMatrix
    y: np.ndarray
    seed: int
    name: str
    t: int | None = None
    noise: np.ndarray | None = None


def _feature_names(d: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(d))


def gen_quadratic(n: int, coefficients: Sequence[float] = (0, 2, 4, 6, 8), seed: int = 0) -> DgpSample:
    """Features uniform on [-1, 1]; response is a weighted sum of squares.

    Every feature has zero linear correlation with the response, so linear
    measures see nothing while the dependence is in fact deterministic.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    coefficients = np.asarray(coefficients, dtype=np.float64)
    d = coefficients.size
    columns = [
        substream(seed, STREAM_DGP_QUADRATIC, j).uniform(-1.0, 1.0, size=n)
        for j in range(d)
    ]
    x = np.column_stack(columns)
    y = (x * x) @ coefficients
    return DgpSample(DataMatrix(x, _feature_names(d)), y, seed, "quadratic")


def gen_xor(n: int, seed: int = 0) -> DgpSample:
    """Two fair binary features; response is their exclusive or.

    The response is independent of each feature alone but a deterministic
    function of the pair.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    x1 = (substream(seed, STREAM_DGP_XOR, 0).random(n) < 0.5).astype(np.float64)
    x2 = (substream(seed, STREAM_DGP_XOR, 1).random(n) < 0.5).astype(np.float64)
    y = x1 * (1.0 - x2) + x2 * (1.0 - x1)
    return DgpSample(DataMatrix(np.column_stack([x1, x2]), _feature_names(2)), y, seed, "xor")


def gen_drift(n: int, t: int, seed: int = 0, full_width: bool = True) -> DgpSample:
    """Linear response whose x3/x4 coefficients drift with the time index.

    y = x1 + x2 + (1 + t/10) x3 + (1 - t/10) x4 + sum(x5..x50), noiseless.
    Features 1-4 are N(0, 4); the 46 low-signal features are N(0, 0.05)
    (variance parameters). ``full_width`` False drops features 5..50 from
    both the table and the response. The feature draw does not depend on t,
    only the response coefficients do.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    if t < 0:
        raise ValidationError(f"need t >= 0, got {t}")
    d = 50 if full_width else 4
    columns = []
    for j in range(d):
        scale = 2.0 if j < 4 else np.sqrt(0.05)
        columns.append(substream(seed, STREAM_DGP_DRIFT, j).normal(0.0, scale, size=n))
    x = np.column_stack(columns)
    coefficients = np.ones(d)
    coefficients[2] = 1.0 + t / 10.0
    coefficients[3] = 1.0 - t / 10.0
    y = x @ coefficients
    return DgpSample(DataMatrix(x, _feature_names(d)), y, seed, "drift", t=t)


def gen_interaction(n: int, seed: int = 0) -> DgpSample:
    """Response with a strong three-way interaction gated by two binaries.

    y = x1 + x2 + 5 x3 x4 x5 + noise, with x1..x3 standard normal, x4 and x5
    fair binaries, and noise N(0, 0.1) (variance). The x3 effect is active
    only on rows where x4 = x5 = 1.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    streams = [substream(seed, STREAM_DGP_INTERACTION, j) for j in range(5)]
    x1 = streams[0].normal(0.0, 1.0, size=n)
    x2 = streams[1].normal(0.0, 1.0, size=n)
    x3 = streams[2].normal(0.0, 1.0, size=n)
    x4 = (streams[3].random(n) < 0.5).astype(np.float64)
    x5 = (streams[4].random(n) < 0.5).astype(np.float64)
    noise = substream(seed, STREAM_DGP_INTERACTION, _NOISE_KEY).normal(
        0.0, np.sqrt(0.1), size=n
    )
    y = x1 + x2 + 5.0 * x3 * x4 * x5 + noise
    x = np.column_stack([x1, x2, x3, x4, x5])
    return DgpSample(DataMatrix(x, _feature_names(5)), y, seed, "interaction", noise=noise)


GENERATORS = {
    "quadratic": gen_quadratic,
    "xor": gen_xor,
    "drift": gen_drift,
    "interaction": gen_interaction,
}


@dataclass(frozen=True)
class LinearModelFit:
    """Ordinary-least-squares fit, optionally with the x3*x4*x5 regressor."""

    intercept: float
    coefficients: np.ndarray
    interaction_coefficient: float | None
    column_names: tuple[str, ...]

    def predict(self, x: DataMatrix) -> np.ndarray:
        if x.column_names != self.column_names:
            raise ValidationError("prediction columns do not match the fit")
        fitted = x.values @ self.coefficients + self.intercept
        if self.interaction_coefficient is not None:
            c1, c2, c3 = _THREE_WAY_COLUMNS
            fitted = fitted + self.interaction_coefficient * (
                x.values[:, c1] * x.values[:, c2] * x.values[:, c3]
            )
        return fitted


def ols_fit(x: DataMatrix, y: np.ndarray, include_three_way: bool = False) -> LinearModelFit:
    """Least squares via orthogonal decomposition, with rank checking.

    ``include_three_way`` adds the product of columns x3, x4, x5 as one extra
    regressor (requires d >= 5). A rank-deficient design raises rather than
    silently picking a minimum-norm solution.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size != x.n:
        raise ValidationError("response must be a vector with one entry per row")
    design_cols = [np.ones(x.n), x.values]
    if include_three_way:
        if x.d < 5:
            raise ValidationError("three-way term needs at least 5 feature columns")
        c1, c2, c3 = _THREE_WAY_COLUMNS
        design_cols.append(x.values[:, c1] * x.values[:, c2] * x.values[:, c3])
    design = np.column_stack(design_cols)
    solution, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficientDesign(
            f"design rank {rank} < {design.shape[1]} columns"
        )
    interaction = float(solution[-1]) if include_three_way else None
    coefficients = solution[1 : 1 + x.d]
    return LinearModelFit(float(solution[0]), coefficients, interaction, x.column_names)
