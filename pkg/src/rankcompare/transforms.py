"""Score construction methods used by ranking systems.

normalize_by_max       top institution gets 100, the rest a percentage of it
percentile_rank        Hazen percentile of each value within the series
distance_to_median_classes
                       A..E classes from the ratio of value to median
quantify_classes       A=5 .. E=1
teaching_score         mean quantified class over subject-field surveys

All functions are pure and keep missing entries missing.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DomainError, EmptySeriesError, KindMismatchError
from .ingest import CLASS_A_TO_E, CLASS_LABELS, NUMERIC, RANK
from .series import IndicatorSeries, oriented_values
from .stats import average_ranks

PERCENTILE_METHODS = ("hazen", "rank_over_n", "rank_minus_one")
CLASS_POINTS = {label: 5 - i for i, label in enumerate(CLASS_LABELS)}


@dataclass(frozen=True)
class ClassThresholds:
    """Lower bounds of value/median for classes A, B, C and D; below D is E.

    The defaults are arbitrary placeholders, not any system's real cut points.
    """

    a: float = 2.0
    b: float = 1.25
    c: float = 0.75
    d: float = 0.25

    def __post_init__(self):
        cuts = self.as_tuple()
        if any(not x > 0 for x in cuts):
            raise ValueError(f"class thresholds must be positive: {cuts}")
        if any(hi <= lo for hi, lo in zip(cuts, cuts[1:])):
            raise ValueError(f"class thresholds must be strictly decreasing: {cuts}")

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    @classmethod
    def from_sequence(cls, cuts: Sequence[float]) -> "ClassThresholds":
        if len(cuts) != 4:
            raise ValueError("need exactly four class thresholds")
        return cls(*(float(x) for x in cuts))

    def classify(self, ratio: float) -> str:
        for label, cut in zip(CLASS_LABELS, self.as_tuple()):
            if ratio >= cut:
                return label
        return CLASS_LABELS[-1]


def _require_numeric(series: IndicatorSeries, allow_rank=False):
    ok = (NUMERIC, RANK) if allow_rank else (NUMERIC,)
    if series.kind not in ok:
        raise KindMismatchError(f"{series.label}: expected {' or '.join(ok)} series, got {series.kind}")


def normalize_by_max(series: IndicatorSeries, cap: Optional[float] = None) -> IndicatorSeries:
    """Scale to 100 x value / max.

    With ``cap``, every value >= cap scores 100 and the remainder scale by
    the cap instead of the maximum, so several institutions can share 100.
    """
    _require_numeric(series)
    present = series.present()
    if not present:
        raise EmptySeriesError(f"{series.label}: no non-missing values")
    top = max(present.values())
    if top <= 0:
        raise DomainError(f"{series.label}: maximum must be positive, got {top}")
    if cap is not None and not cap > 0:
        raise DomainError(f"cap must be positive, got {cap}")
    denom = top if cap is None else float(cap)
    out = {}
    for key, v in series.values.items():
        if v is None:
            out[key] = None
        elif cap is not None and v >= cap:
            out[key] = 100.0
        else:
            out[key] = v / denom * 100.0
    return series.with_values(out, kind=NUMERIC)


def cap_for_top(series: IndicatorSeries, count: int) -> float:
    """Smallest cap that gives at least ``count`` institutions a score of 100."""
    vals = sorted(series.present().values(), reverse=True)
    if not vals:
        raise EmptySeriesError(f"{series.label}: no non-missing values")
    return float(vals[min(count, len(vals)) - 1])


def percentile_rank(series: IndicatorSeries, method: str = "hazen") -> IndicatorSeries:
    """Percentile rank of every non-missing value, 100 = best.

    ``hazen`` gives 100 (r - 0.5) / n for average rank r, which never hits
    0 or 100. ``rank_over_n`` and ``rank_minus_one`` give 100 r / n and
    100 (r - 1) / (n - 1). Lower-is-better indicators are flipped first.
    """
    if method not in PERCENTILE_METHODS:
        raise ValueError(f"unknown percentile method {method!r}")
    if series.kind == CLASS_A_TO_E:
        raise KindMismatchError(f"{series.label}: percentile rank of a class series")
    oriented = oriented_values(series)
    if not oriented:
        raise EmptySeriesError(f"{series.label}: no non-missing values")
    keys = list(oriented)
    ranks = average_ranks([oriented[k] for k in keys])
    n = len(keys)
    pr = {}
    for key, r in zip(keys, ranks):
        if method == "hazen":
            pr[key] = 100.0 * (r - 0.5) / n
        elif method == "rank_over_n":
            pr[key] = 100.0 * r / n
        else:
            pr[key] = 50.0 if n == 1 else 100.0 * (r - 1.0) / (n - 1)
    out = {key: (None if v is None else pr[key]) for key, v in series.values.items()}
    return series.with_values(out, kind=NUMERIC, higher_is_better=True)


def distance_to_median_classes(series: IndicatorSeries,
                               thresholds: ClassThresholds = ClassThresholds()) -> IndicatorSeries:
    """Assign A..E from value / median of all non-missing values."""
    _require_numeric(series, allow_rank=True)
    present = series.present()
    if not present:
        raise EmptySeriesError(f"{series.label}: no non-missing values")
    median = statistics.median(present.values())
    if median <= 0:
        raise DomainError(f"{series.label}: median must be positive, got {median}")
    out = {}
    for key, v in series.values.items():
        if v is None:
            out[key] = None
            continue
        if series.higher_is_better:
            ratio = v / median
        else:
            ratio = median / v if v > 0 else float("inf")
        out[key] = thresholds.classify(ratio)
    return series.with_values(out, kind=CLASS_A_TO_E, higher_is_better=True)


def quantify_classes(series: IndicatorSeries) -> IndicatorSeries:
    if series.kind != CLASS_A_TO_E:
        raise KindMismatchError(f"{series.label}: expected a class series, got {series.kind}")
    out = {k: (None if v is None else float(CLASS_POINTS[v])) for k, v in series.values.items()}
    return series.with_values(out, kind=NUMERIC, higher_is_better=True)


def teaching_score(per_field: Sequence[IndicatorSeries], min_fields: int = 2,
                   name: str = "teaching_score") -> IndicatorSeries:
    """Mean quantified class over fields, for institutions rated in >= min_fields."""
    if not per_field:
        raise ValueError("teaching_score needs at least one field series")
    quantified = [quantify_classes(s) for s in per_field]
    keys = []
    seen = set()
    for s in quantified:
        for k in s.values:
            if k not in seen:
                seen.add(k)
                keys.append(k)
    out = {}
    for k in keys:
        points = [s.values[k] for s in quantified if s.values.get(k) is not None]
        out[k] = sum(points) / len(points) if len(points) >= min_fields else None
    first = per_field[0]
    return IndicatorSeries(first.system_id, name, out, NUMERIC, True)


def class_shares(series: IndicatorSeries) -> dict:
    """Fraction of institutions per class, plus the missing fraction."""
    if series.kind != CLASS_A_TO_E:
        raise KindMismatchError(f"{series.label}: expected a class series, got {series.kind}")
    total = len(series.values)
    counts = {label: 0 for label in CLASS_LABELS}
    missing = 0
    for v in series.values.values():
        if v is None:
            missing += 1
        else:
            counts[v] += 1
    if total == 0:
        return {**{k: 0.0 for k in counts}, "missing": 0.0}
    shares = {k: c / total for k, c in counts.items()}
    shares["missing"] = missing / total
    return shares
