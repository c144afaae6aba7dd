"""Comparative analyses over a LinkedCorpus.

Every function is a pure read of the corpus. Indicators are addressed as
``"SYSTEM:indicator"`` strings, ``(system, indicator)`` tuples, or given
directly as an IndicatorSeries (for derived indicators such as a teaching
score).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .entity_link import LinkedCorpus
from .errors import AnalysisError, UndefinedCorrelationError, UndefinedSkewnessError
from .ingest import CLASS_A_TO_E
from .series import IndicatorSeries, oriented_values
from .stats import CorrelationResult, skewness, spearman_values
from .transforms import (ClassThresholds, class_shares, distance_to_median_classes, percentile_rank,
                         quantify_classes)

IndicatorRef = Union[str, tuple, IndicatorSeries]


def parse_ref(ref) -> tuple:
    if isinstance(ref, tuple) and len(ref) == 2:
        return ref
    if isinstance(ref, str) and ":" in ref:
        system, name = ref.split(":", 1)
        if system and name:
            return system, name
    raise AnalysisError(f"indicator reference must look like SYSTEM:indicator, got {ref!r}")


def resolve(corpus: LinkedCorpus, ref: IndicatorRef) -> IndicatorSeries:
    if isinstance(ref, IndicatorSeries):
        return ref
    system, name = parse_ref(ref)
    try:
        return corpus.series(system, name)
    except KeyError as exc:
        raise AnalysisError(f"cannot resolve indicator {system}:{name}: {exc.args[0]}") from None


# -- overlap -----------------------------------------------------------------

@dataclass(frozen=True)
class OverlapMatrix:
    systems: tuple
    counts: tuple

    def get(self, a: str, b: str) -> int:
        return self.counts[self.systems.index(a)][self.systems.index(b)]


def overlap_matrix(corpus: LinkedCorpus) -> OverlapMatrix:
    systems = corpus.system_ids
    counts = [[0] * len(systems) for _ in systems]
    pos = {s: i for i, s in enumerate(systems)}
    for present in corpus.presence.values():
        idx = sorted(pos[s] for s in present)
        for i in idx:
            for j in idx:
                counts[i][j] += 1
    return OverlapMatrix(systems, tuple(tuple(r) for r in counts))


# -- top lists ---------------------------------------------------------------

@dataclass(frozen=True)
class TopList:
    system_id: str
    indicator: str
    n: int
    ids: tuple
    boundary_tie_warning: bool = False

    @property
    def label(self) -> str:
        return f"{self.system_id}:{self.indicator}"


def _best_first(corpus, values: Mapping[str, float]) -> list:
    return sorted(values, key=lambda cid: (-values[cid], corpus.name(cid), cid))


def build_top_list(corpus: LinkedCorpus, system_id: str, indicator: str, n: int) -> TopList:
    """Best ``n`` institutions of one system on one indicator.

    Ties are ordered by canonical name; a tie straddling the cut is flagged
    but the list is still cut at exactly ``n``.
    """
    if n < 1:
        raise AnalysisError(f"top-list size must be positive, got {n}")
    series = resolve(corpus, (system_id, indicator))
    values = oriented_values(series)
    if not values:
        raise AnalysisError(f"{series.label}: no non-missing values")
    order = _best_first(corpus, values)
    warning = len(order) > n and values[order[n - 1]] == values[order[n]]
    return TopList(system_id, indicator, n, tuple(order[:n]), warning)


@dataclass(frozen=True)
class TopOverlap:
    labels: tuple
    pairwise: tuple
    union_count: int
    all_count: int


def top_overlap(lists: Sequence[TopList]) -> TopOverlap:
    if len(lists) < 2:
        raise AnalysisError("top_overlap needs at least two lists")
    sets = [set(tl.ids) for tl in lists]
    pairwise = tuple(tuple(len(a & b) for b in sets) for a in sets)
    return TopOverlap(tuple(tl.label for tl in lists), pairwise,
                      len(set().union(*sets)), len(set.intersection(*sets)))


@dataclass(frozen=True)
class UniqueEntry:
    canonical_id: str
    name: str
    country: str
    status: Mapping[str, str]


@dataclass(frozen=True)
class UniqueInTop:
    label: str
    entries: tuple
    country_tally: tuple


def unique_in_top(lists: Sequence[TopList], corpus: LinkedCorpus) -> tuple:
    """Institutions in exactly one top list, with their fate in the others.

    Status per other list: ``lower_ranked`` (present in that system with a
    value, just outside the list), ``no_value`` (present, value missing) or
    ``unlinked`` (not found in that system at all).
    """
    if len(lists) < 2:
        raise AnalysisError("unique_in_top needs at least two lists")
    sets = [set(tl.ids) for tl in lists]
    out = []
    for i, tl in enumerate(lists):
        others = set().union(*(s for j, s in enumerate(sets) if j != i))
        entries = []
        for cid in tl.ids:
            if cid in others:
                continue
            status = {}
            for j, other in enumerate(lists):
                if j == i:
                    continue
                if other.system_id not in corpus.presence[cid]:
                    status[other.label] = "unlinked"
                elif corpus.value(cid, other.system_id, other.indicator) is None:
                    status[other.label] = "no_value"
                else:
                    status[other.label] = "lower_ranked"
            inst = corpus.institutions[cid]
            entries.append(UniqueEntry(cid, inst.name, inst.country, status))
        tally = Counter(e.country for e in entries)
        out.append(UniqueInTop(tl.label, tuple(entries),
                               tuple(sorted(tally.items(), key=lambda kv: (-kv[1], kv[0])))))
    return tuple(out)


# -- geography ---------------------------------------------------------------

def preference_ratios(counts: Sequence[Sequence[float]]) -> list:
    """Actual over expected share for a country x system count matrix.

    P[i][j] = (n[i][j] / col_j) / (row_i / total). Cells in an all-zero
    row or column are None.
    """
    rows = [list(map(float, r)) for r in counts]
    if not rows:
        return []
    row_tot = [sum(r) for r in rows]
    col_tot = [sum(r[j] for r in rows) for j in range(len(rows[0]))]
    total = sum(row_tot)
    out = []
    for i, r in enumerate(rows):
        line = []
        for j, nij in enumerate(r):
            if row_tot[i] == 0 or col_tot[j] == 0:
                line.append(None)
            else:
                line.append((nij / col_tot[j]) / (row_tot[i] / total))
        out.append(line)
    return out


@dataclass(frozen=True)
class PreferenceTable:
    countries: tuple
    systems: tuple
    counts: tuple
    preference: tuple
    top: Mapping[str, tuple] = field(default_factory=dict)

    def get(self, country: str, system: str):
        i, j = self.countries.index(country), self.systems.index(system)
        return self.counts[i][j], self.preference[i][j]


def preference_table(corpus: LinkedCorpus, min_count: int = 10, top: int = 5) -> PreferenceTable:
    systems = corpus.system_ids
    tally = defaultdict(Counter)
    for cid, present in corpus.presence.items():
        country = corpus.country(cid)
        for s in present:
            tally[country][s] += 1
    countries = tuple(sorted(tally))
    counts = tuple(tuple(tally[c][s] for s in systems) for c in countries)
    pref = tuple(tuple(r) for r in preference_ratios(counts))
    best = {}
    for j, s in enumerate(systems):
        eligible = [(countries[i], counts[i][j], pref[i][j]) for i in range(len(countries))
                    if counts[i][j] >= min_count and pref[i][j] is not None]
        best[s] = tuple(sorted(eligible, key=lambda t: (-t[2], t[0]))[:top])
    return PreferenceTable(countries, systems, counts, pref, best)


# -- missing values ----------------------------------------------------------

@dataclass(frozen=True)
class CoverageRow:
    system_id: str
    indicator: str
    present: int
    non_missing: int

    @property
    def coverage(self) -> float:
        return self.non_missing / self.present if self.present else 0.0


@dataclass(frozen=True)
class MissingReport:
    coverage: tuple
    institutions: tuple  # (canonical_id, name, available, applicable)


def missing_report(corpus: LinkedCorpus) -> MissingReport:
    rows = []
    available = Counter()
    applicable = Counter()
    for m in corpus.systems:
        members = corpus.members(m.system_id)
        for ind in m.indicators:
            have = 0
            for cid in members:
                applicable[cid] += 1
                if corpus.value(cid, m.system_id, ind.name) is not None:
                    have += 1
                    available[cid] += 1
            rows.append(CoverageRow(m.system_id, ind.name, len(members), have))
    inst = tuple((cid, corpus.name(cid), available[cid], applicable[cid]) for cid in corpus.institutions)
    return MissingReport(tuple(rows), inst)


# -- distributions -----------------------------------------------------------

@dataclass(frozen=True)
class SkewRow:
    label: str
    n: int
    skewness: Optional[float]
    reason: str = ""


def skewness_report(corpus: LinkedCorpus, refs: Optional[Iterable[IndicatorRef]] = None,
                    adjusted: bool = True) -> tuple:
    """Skewness of each indicator's raw non-missing values (classes quantified)."""
    if refs is None:
        refs = [(m.system_id, i.name) for m in corpus.systems for i in m.indicators]
    rows = []
    for ref in refs:
        series = resolve(corpus, ref)
        present = series.present()
        if series.kind == CLASS_A_TO_E:
            present = quantify_classes(series).present()
        try:
            rows.append(SkewRow(series.label, len(present), skewness(list(present.values()), adjusted)))
        except UndefinedSkewnessError as exc:
            rows.append(SkewRow(series.label, len(present), None, str(exc)))
    return tuple(sorted(rows, key=lambda r: (r.skewness is None, -(r.skewness or 0.0), r.label)))


def class_share_report(corpus: LinkedCorpus, refs: Iterable[IndicatorRef],
                       thresholds: ClassThresholds = ClassThresholds()) -> tuple:
    """Distance-to-median class shares per indicator: (label, shares)."""
    out = []
    for ref in refs:
        series = resolve(corpus, ref)
        if series.kind != CLASS_A_TO_E:
            series = distance_to_median_classes(series, thresholds)
        out.append((series.label, class_shares(series)))
    return tuple(out)


# -- correlations ------------------------------------------------------------

@dataclass(frozen=True)
class CountryCorrelations:
    a: str
    b: str
    min_n: int
    results: Mapping[str, CorrelationResult]
    excluded: Mapping[str, tuple]   # country -> (n, reason)


def _pairs(corpus, a: IndicatorSeries, b: IndicatorSeries, countries=None):
    xa = oriented_values(a)
    xb = oriented_values(b)
    keys = sorted(xa.keys() & xb.keys())
    if countries is not None:
        keys = [k for k in keys if corpus.country(k) in countries]
    return keys, xa, xb


def per_country_correlation(corpus: LinkedCorpus, ind_a: IndicatorRef, ind_b: IndicatorRef,
                            min_n: int = 11, p_method: str = "auto") -> CountryCorrelations:
    a, b = resolve(corpus, ind_a), resolve(corpus, ind_b)
    keys, xa, xb = _pairs(corpus, a, b)
    groups = defaultdict(list)
    for k in keys:
        groups[corpus.country(k)].append(k)
    results, excluded = {}, {}
    for country in sorted(groups):
        members = groups[country]
        if len(members) < max(3, min_n):
            excluded[country] = (len(members), "below_min_n")
            continue
        try:
            results[country] = spearman_values([xa[k] for k in members], [xb[k] for k in members], p_method)
        except UndefinedCorrelationError:
            excluded[country] = (len(members), "undefined_correlation")
    return CountryCorrelations(a.label, b.label, min_n, results, excluded)


# -- pairwise discrepancies --------------------------------------------------

@dataclass(frozen=True)
class DiscrepancyEntry:
    canonical_id: str
    name: str
    country: str
    pr_a: float
    pr_b: float
    diff: float


@dataclass(frozen=True)
class DiscrepancyList:
    a: str
    b: str
    k: int
    n_pairs: int
    top: tuple
    bottom: tuple
    warning: str = ""


def paired_percentiles(corpus, a: IndicatorSeries, b: IndicatorSeries, countries=None,
                       method: str = "hazen"):
    """Percentile ranks of both indicators over their pairwise-complete subset."""
    keys, _, _ = _pairs(corpus, a, b, countries)
    if not keys:
        return [], {}, {}
    keep = set(keys)
    pa = percentile_rank(a.with_values({k: v for k, v in a.values.items() if k in keep}), method)
    pb = percentile_rank(b.with_values({k: v for k, v in b.values.items() if k in keep}), method)
    return keys, dict(pa.values), dict(pb.values)


def _discrepancy(corpus, a, b, k, countries=None, method="hazen") -> DiscrepancyList:
    keys, pa, pb = paired_percentiles(corpus, a, b, countries, method)
    n = len(keys)
    kk, warning = k, ""
    if n < 2 * k:
        kk = n // 2
        warning = f"only {n} pairwise-complete institutions; lists shrunk to {kk}"
    entries = [DiscrepancyEntry(c, corpus.name(c), corpus.country(c), pa[c], pb[c], pa[c] - pb[c])
               for c in keys]
    top = sorted(entries, key=lambda e: (-e.diff, e.name, e.canonical_id))[:kk]
    bottom = sorted(entries, key=lambda e: (e.diff, e.name, e.canonical_id))[:kk]
    return DiscrepancyList(a.label, b.label, k, n, tuple(top), tuple(bottom), warning)


def discrepancy_lists(corpus: LinkedCorpus, ind_a: IndicatorRef, ind_b: IndicatorRef, k: int,
                      countries: Optional[Iterable[str]] = None,
                      method: str = "hazen") -> DiscrepancyList:
    """Top-k and bottom-k institutions by percentile(a) - percentile(b)."""
    if k < 1:
        raise AnalysisError(f"k must be positive, got {k}")
    countries = None if countries is None else frozenset(countries)
    return _discrepancy(corpus, resolve(corpus, ind_a), resolve(corpus, ind_b), k, countries, method)


@dataclass(frozen=True)
class ScatterPoint:
    canonical_id: str
    name: str
    country: str
    x: float
    y: float
    labeled: bool = False


def scatter_data(corpus: LinkedCorpus, ind_a: IndicatorRef, ind_b: IndicatorRef,
                 countries: Optional[Iterable[str]] = None, label_rule=None,
                 percentile: bool = False, method: str = "hazen") -> list:
    """Pairwise-complete points (x from ``ind_a``, y from ``ind_b``).

    ``label_rule`` is None (no labels), ``"all"``, or an int k meaning the
    top-k and bottom-k percentile-rank differences among the plotted points.
    With ``percentile`` the coordinates are percentile ranks over the
    plotted subset; otherwise raw values (rank indicators stay ranks).
    """
    a, b = resolve(corpus, ind_a), resolve(corpus, ind_b)
    countries = None if countries is None else frozenset(countries)
    keys, pa, pb = paired_percentiles(corpus, a, b, countries, method)
    if not keys:
        return []
    if percentile:
        xs, ys = pa, pb
    else:
        xs = {k: float(a.values[k]) if a.kind != CLASS_A_TO_E else oriented_values(a)[k] for k in keys}
        ys = {k: float(b.values[k]) if b.kind != CLASS_A_TO_E else oriented_values(b)[k] for k in keys}
    if label_rule is None:
        labeled = set()
    elif label_rule == "all":
        labeled = set(keys)
    elif isinstance(label_rule, int) and not isinstance(label_rule, bool) and label_rule > 0:
        d = _discrepancy(corpus, a, b, label_rule, countries, method)
        labeled = {e.canonical_id for e in d.top} | {e.canonical_id for e in d.bottom}
    else:
        raise AnalysisError(f"label_rule must be None, 'all' or a positive int, got {label_rule!r}")
    points = [ScatterPoint(k, corpus.name(k), corpus.country(k), xs[k], ys[k], k in labeled) for k in keys]
    return sorted(points, key=lambda p: (p.x, p.y, p.name, p.canonical_id))
