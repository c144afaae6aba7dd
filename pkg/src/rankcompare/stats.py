"""Statistical kernels: average ranks, skewness, Spearman's rho."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import InsufficientPairsError, UndefinedCorrelationError, UndefinedSkewnessError
from .series import IndicatorSeries, oriented_values

BANDS = (
    (0.8, "very strong"),
    (0.6, "strong"),
    (0.4, "moderate"),
    (0.2, "weak"),
    (0.0, "very weak"),
)

# t approximation is poor for tiny samples; enumerate permutations instead
EXACT_MAX_N = 10


def average_ranks(values: Sequence[float]) -> list:
    """1-based ranks, ties get the mean of the positions they occupy."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def skewness(values: Sequence[float], adjusted: bool = True) -> float:
    """Sample skewness from central moments.

    ``b1 = m3 / m2**1.5``; with ``adjusted`` the bias-corrected
    ``G1 = b1 * sqrt(n (n-1)) / (n-2)`` is returned instead.
    """
    xs = [float(v) for v in values]
    n = len(xs)
    if n < 3:
        raise UndefinedSkewnessError(f"skewness needs at least 3 values, got {n}")
    if any(not math.isfinite(x) for x in xs):
        raise UndefinedSkewnessError("skewness of non-finite values")
    if all(x == xs[0] for x in xs):
        raise UndefinedSkewnessError("skewness undefined for zero variance")
    mean = math.fsum(xs) / n
    mean += math.fsum(x - mean for x in xs) / n
    dev = [x - mean for x in xs]
    m2 = math.fsum(d * d for d in dev) / n
    m3 = math.fsum(d * d * d for d in dev) / n
    if m2 == 0.0:
        raise UndefinedSkewnessError("skewness undefined for zero variance")
    b1 = m3 / m2 ** 1.5
    if adjusted:
        return b1 * math.sqrt(n * (n - 1)) / (n - 2)
    return b1


def band(rho: float) -> str:
    """Qualitative label for |rho|; a value on a boundary takes the upper band."""
    r = abs(rho)
    for lower, label in BANDS:
        if r >= lower:
            return label
    return BANDS[-1][1]


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    n: int
    p_value: float
    band: str
    p_method: str = "t"

    def significant(self, alpha: float = 0.001) -> bool:
        return self.p_value < alpha


def _pearson(xs, ys) -> float:
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: a rank vector has zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def t_pvalue(rho: float, n: int) -> float:
    """Two-sided p from t = rho sqrt((n-2)/(1-rho^2)) on n-2 d.o.f."""
    if n < 3:
        raise InsufficientPairsError(f"p-value needs n >= 3, got {n}")
    if abs(rho) >= 1.0:
        return 0.0
    t = abs(rho) * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(min(1.0, 2.0 * special.stdtr(n - 2, -t)))


@lru_cache(maxsize=512)
def _null_counts(a: tuple, b: tuple) -> np.ndarray:
    """Counts of sum(a[i] * b[perm[i]]) over all permutations, indexed by the sum.

    ``a`` and ``b`` are non-negative integers. Dynamic programme over the
    subset of ``b`` already assigned, so cost is n * 2**(n-1) vector adds.
    """
    n = len(a)
    smax = sum(x * y for x, y in zip(sorted(a), sorted(b)))
    full = (1 << n) - 1
    dp = [None] * (full + 1)
    dp[0] = np.zeros(smax + 1, dtype=np.int64)
    dp[0][0] = 1
    for mask in range(full):
        cur = dp[mask]
        if cur is None:
            continue
        ai = a[bin(mask).count("1")]
        for j in range(n):
            bit = 1 << j
            if mask & bit:
                continue
            w = ai * b[j]
            nxt = dp[mask | bit]
            if nxt is None:
                nxt = dp[mask | bit] = np.zeros(smax + 1, dtype=np.int64)
            if w:
                nxt[w:] += cur[: smax + 1 - w]
            else:
                nxt += cur
        dp[mask] = None
    return dp[full]


def exact_pvalue(rx: Sequence[float], ry: Sequence[float]) -> float:
    """Two-sided permutation p for Spearman's rho, ties handled exactly.

    Every assignment of the y-ranks to the x-ranks is equally likely under
    the null; p is the share with |S - E[S]| at least the observed one,
    where S is the sum of rank products.
    """
    n = len(rx)
    a = [int(round(2 * r)) for r in rx]
    b = [int(round(2 * r)) for r in ry]
    s_obs = sum(x * y for x, y in zip(a, b))
    total_ab = sum(a) * sum(b)
    counts = _null_counts(tuple(sorted(a)), tuple(sorted(b)))
    s = np.arange(len(counts), dtype=np.int64)
    extreme = np.abs(n * s - total_ab) >= abs(n * s_obs - total_ab)
    return float(counts[extreme].sum() / math.factorial(n))


def spearman_values(xs: Sequence[float], ys: Sequence[float], p_method: str = "auto") -> CorrelationResult:
    """Spearman's rho for two aligned, complete vectors (larger = better)."""
    if len(xs) != len(ys):
        raise ValueError("vectors differ in length")
    n = len(xs)
    if n < 3:
        raise InsufficientPairsError(f"need at least 3 pairs, got {n}")
    rx = average_ranks(list(xs))
    ry = average_ranks(list(ys))
    rho = _pearson(rx, ry)
    if p_method == "auto":
        p_method = "exact" if n <= EXACT_MAX_N else "t"
    if p_method == "exact":
        p = exact_pvalue(rx, ry)
    elif p_method == "t":
        p = t_pvalue(rho, n)
    else:
        raise ValueError(f"unknown p_method {p_method!r}")
    return CorrelationResult(rho, n, p, band(rho), p_method)


def paired(x: IndicatorSeries, y: IndicatorSeries):
    """Oriented values for institutions non-missing in both series, sorted by id."""
    xv = oriented_values(x)
    yv = oriented_values(y)
    keys = sorted(xv.keys() & yv.keys())
    return keys, [xv[k] for k in keys], [yv[k] for k in keys]


def spearman(x: IndicatorSeries, y: IndicatorSeries, p_method: str = "auto") -> CorrelationResult:
    """Rank correlation over the pairwise-complete institutions."""
    _, xs, ys = paired(x, y)
    return spearman_values(xs, ys, p_method)


@dataclass(frozen=True)
class MatrixCell:
    row: str
    col: str
    n: int
    result: Optional[CorrelationResult] = None
    reason: str = ""
    significant: Optional[bool] = None

    @property
    def absent(self) -> bool:
        return self.result is None


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple
    cells: tuple  # upper triangle, row-major
    alpha: float
    min_n: int

    def cell(self, a: str, b: str) -> MatrixCell:
        for c in self.cells:
            if (c.row, c.col) in ((a, b), (b, a)):
                return c
        raise KeyError((a, b))


def correlation_matrix(series_list: Sequence[IndicatorSeries], min_n: int = 3,
                       alpha: float = 0.001, p_method: str = "auto") -> CorrelationMatrix:
    if len(series_list) < 2:
        raise ValueError("correlation_matrix needs at least two series")
    min_n = max(3, min_n)
    cells = []
    for i, x in enumerate(series_list):
        for y in series_list[i + 1:]:
            _, xs, ys = paired(x, y)
            n = len(xs)
            if n < min_n:
                cells.append(MatrixCell(x.label, y.label, n, reason="insufficient_pairs"))
                continue
            try:
                res = spearman_values(xs, ys, p_method)
            except UndefinedCorrelationError:
                cells.append(MatrixCell(x.label, y.label, n, reason="undefined_correlation"))
                continue
            cells.append(MatrixCell(x.label, y.label, n, res, "", res.significant(alpha)))
    return CorrelationMatrix(tuple(s.label for s in series_list), tuple(cells), alpha, min_n)
