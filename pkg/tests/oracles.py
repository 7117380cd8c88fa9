"""Brute-force reference implementations used as independent test oracles.

Everything here favours textbook clarity over speed: explicit loops and
direct formulas, sharing no code with the library paths under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def pearson(a, b) -> float:
    """Correlation as the direct covariance / stddev quotient."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    am, bm = a.mean(), b.mean()
    cov = float(np.sum((a - am) * (b - bm))) / (n - 1)
    sa = math.sqrt(float(np.sum((a - am) ** 2)) / (n - 1))
    sb = math.sqrt(float(np.sum((b - bm) ** 2)) / (n - 1))
    return cov / (sa * sb)


def correlation_matrix(table) -> np.ndarray:
    table = np.asarray(table, dtype=float)
    d = table.shape[1]
    out = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            out[i, j] = out[j, i] = pearson(table[:, i], table[:, j])
    return out


def r2_determinant_ratio(y, x) -> float:
    """Multiple correlation via explicit joint/feature determinants."""
    joint = np.column_stack([np.asarray(y, dtype=float), np.asarray(x, dtype=float)])
    corr = correlation_matrix(joint)
    return 1.0 - np.linalg.det(corr) / np.linalg.det(corr[1:, 1:])


def _rows(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return w[:, None] if w.ndim == 1 else w


def distance_matrix(w) -> np.ndarray:
    """Pairwise Euclidean distances by explicit double loop."""
    w = _rows(w)
    n = w.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = math.sqrt(sum((w[i, k] - w[j, k]) ** 2 for k in range(w.shape[1])))
    return out


def double_center(b) -> np.ndarray:
    """Entrywise centering formula with explicit row/column/grand means."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    row = [sum(b[i, j] for j in range(n)) / n for i in range(n)]
    col = [sum(b[i, j] for i in range(n)) / n for j in range(n)]
    grand = sum(row) / n
    out = np.empty_like(b)
    for i in range(n):
        for j in range(n):
            out[i, j] = b[i, j] - row[i] - col[j] + grand
    return out


def dcov_sq(y, x) -> float:
    """Plain double-centered distance product sum, entry by entry."""
    a = double_center(distance_matrix(y))
    b = double_center(distance_matrix(x))
    n = a.shape[0]
    return float(sum(a[i, j] * b[i, j] for i in range(n) for j in range(n)))


def dcor_sq(y, x) -> float:
    denom = math.sqrt(dcov_sq(y, y) * dcov_sq(x, x))
    if denom == 0.0:
        return 0.0
    return dcov_sq(y, x) / denom


def sample_covariance(w) -> np.ndarray:
    w = _rows(w)
    n, d = w.shape
    means = w.mean(axis=0)
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            out[i, j] = float(np.sum((w[:, i] - means[i]) * (w[:, j] - means[j]))) / (n - 1)
    return out


def gaussian_kernel(w, sigma) -> np.ndarray:
    """Kernel entries straight from the exp(-d^2 / (2 sigma^2)) formula."""
    w = _rows(w)
    n = w.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            sq = sum((w[i, k] - w[j, k]) ** 2 for k in range(w.shape[1]))
            out[i, j] = math.exp(-sq / (2.0 * sigma * sigma))
    return out


def hsic_three_sum(y, x, sigma_y, sigma_x) -> float:
    """Literal three-term estimator over the kernel matrices.

    First term: mean of elementwise kernel products. Second: product of the
    two kernel grand means. Third: twice the mean over i of (row mean of one
    kernel) times (row mean of the other).
    """
    k = gaussian_kernel(y, sigma_y)
    l = gaussian_kernel(x, sigma_x)
    n = k.shape[0]
    term1 = sum(k[i, j] * l[i, j] for i in range(n) for j in range(n)) / n**2
    term2 = (
        sum(k[i, j] for i in range(n) for j in range(n))
        * sum(l[q, r] for q in range(n) for r in range(n))
        / n**4
    )
    term3 = (
        2.0
        * sum(
            k[i, j] * l[i, q] for i in range(n) for j in range(n) for q in range(n)
        )
        / n**3
    )
    return term1 + term2 - term3


def subset_shapley(values_by_mask, d) -> np.ndarray:
    """Average over team sizes of the average marginal contribution."""
    phi = np.zeros(d)
    for v in range(d):
        others = [i for i in range(d) if i != v]
        size_means = []
        for k in range(d):
            contributions = []
            for team in itertools.combinations(others, k):
                mask = 0
                for i in team:
                    mask |= 1 << i
                contributions.append(
                    values_by_mask[mask | (1 << v)] - values_by_mask[mask]
                )
            size_means.append(sum(contributions) / len(contributions))
        phi[v] = sum(size_means) / d
    return phi


def permutation_shapley(values_by_mask, d) -> np.ndarray:
    """Average marginal contribution over all d! player orderings."""
    phi = np.zeros(d)
    count = 0
    for perm in itertools.permutations(range(d)):
        mask = 0
        previous = 0.0
        for v in perm:
            mask |= 1 << v
            current = values_by_mask[mask]
            phi[v] += current - previous
            previous = current
        count += 1
    return phi / count


def quantile_sorted(values, q) -> float:
    """Classical linear-interpolation empirical quantile from a full sort."""
    ordered = sorted(float(v) for v in values)
    h = (len(ordered) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(ordered) - 1)
    return ordered[lo] + (h - lo) * (ordered[hi] - ordered[lo])


def ols_two_parameter(x, y) -> tuple[float, float]:
    """Closed-form slope and intercept for one feature."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / np.sum((x - x.mean()) ** 2))
    return y.mean() - slope * x.mean(), slope
