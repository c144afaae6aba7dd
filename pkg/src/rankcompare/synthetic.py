"""Seeded synthetic ranking corpora with known ground truth.

Institutions shared between systems carry the same ``local_id`` in every
system, so the true cross-system identity of any record is its local_id.
Names differ between systems only by surface variation that the bundled
normalization rules undo (abbreviations, case, diacritics, Roma/Rome).

Planted rank correlations are imposed with a rank-reordering copula: normal
scores are rotated to the target correlation (Iman & Conover), then every
indicator's marginal values are reassigned in the rank order of its score
column. A few fixed-point corrections make the realized Spearman
coefficients land close to the targets.

Synthetic spec (JSON)::

    {
      "shared_fraction": 0.6,              # of the smallest system, in [0, 1]
      "countries": {"US": 3, "GB": 1},     # mixture weights
      "campus_decoys": 2,                  # "<shared name> at <city>" records
      "systems": [
        {"system_id": "ALPHA", "display_name": "Alpha", "year": 2016,
         "size": 500,
         "indicators": [
           {"name": "cit", "kind": "numeric", "higher_is_better": true,
            "distribution": {"type": "lognormal", "mu": 0, "sigma": 1},
            "coverage": 1.0, "missing": "random", "decimals": 4}]}],
      "correlations": [{"a": "ALPHA:cit", "b": "ALPHA:pub", "rho": 0.9}],
      "country_correlations": {"IT": [{"a": "ALPHA:cit", "b": "ALPHA:rep", "rho": 0.2}]}
    }

Distributions: ``lognormal`` (mu, sigma), ``normal`` (mean, sd), ``uniform``
(low, high). Pairs not listed are planted at zero correlation.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import special

from .errors import ValidationError
from .ingest import (CLASS_A_TO_E, KINDS, NUMERIC, RANK, IndicatorDef, InstitutionRecord,
                     RankingDataset, SystemManifest, resolve_country, write_dataset)
from .series import IndicatorSeries
from .transforms import distance_to_median_classes

DISTRIBUTIONS = ("lognormal", "normal", "uniform")

_ONSETS = ["b", "br", "c", "d", "f", "g", "gr", "h", "k", "l", "m", "n", "p", "r", "s",
           "st", "t", "tr", "v", "w", "z"]
_VOWELS = ["a", "e", "i", "o", "u", "ei", "ou"]
_CODAS = ["", "", "n", "r", "l", "s", "m", "th"]
_UMLAUT = {"a": "ä", "o": "ö", "u": "ü"}
_PATTERNS = [
    "University of {w}",
    "{w} University",
    "{w} Institute of Technology",
    "{w} State University",
    "Technical University of {w}",
    "{w} Medical University",
    "University of {w} and {v}",
    "{w} College",
    "University of Science and Technology {w}",
    "{w} National University",
]
# (pattern fragment, alternatives that normalize back to it)
_VARIANTS = [
    ("University", ["Univ.", "Univ", "U", "UNIVERSITY"]),
    ("Institute", ["Inst.", "Inst"]),
    ("Technology", ["Tech.", "Technol."]),
    ("National", ["Natl."]),
    ("College", ["Coll."]),
    ("Science", ["Sci."]),
    ("Medical", ["Med."]),
]
_CITY_VARIANTS = {"Rome": "Roma", "Milan": "Milano", "Naples": "Napoli", "Turin": "Torino",
                  "Vienna": "Wien", "Munich": "München", "Prague": "Praha"}
_DECOY_CITIES = ["Fayetteville", "Little Rock", "Boulder", "Amherst", "Davis", "Irvine",
                 "Omaha", "Lowell"]


@dataclass(frozen=True)
class SyntheticIndicator:
    name: str
    kind: str = NUMERIC
    higher_is_better: bool = True
    distribution: Mapping = field(default_factory=lambda: {"type": "lognormal", "mu": 0.0, "sigma": 1.0})
    coverage: float = 1.0
    missing: str = "random"
    decimals: int = 4


@dataclass(frozen=True)
class SyntheticSystem:
    system_id: str
    display_name: str
    year: int
    size: int
    indicators: tuple


@dataclass(frozen=True)
class PlantedCorrelation:
    a: str
    b: str
    rho: float


@dataclass(frozen=True)
class SyntheticSpec:
    systems: tuple
    countries: Mapping[str, float]
    shared_fraction: float = 0.5
    correlations: tuple = ()
    country_correlations: Mapping[str, tuple] = field(default_factory=dict)
    campus_decoys: int = 0
    city_names: bool = True

    def __post_init__(self):
        if not self.systems:
            raise ValidationError("synthetic spec needs at least one system")
        if not 0.0 <= self.shared_fraction <= 1.0:
            raise ValidationError(f"shared_fraction must be within [0, 1], got {self.shared_fraction}")
        ids = [s.system_id for s in self.systems]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate system_id in synthetic spec")
        for s in self.systems:
            if s.size < 1:
                raise ValidationError(f"{s.system_id}: size must be positive")
            names = [i.name for i in s.indicators]
            if len(set(names)) != len(names):
                raise ValidationError(f"{s.system_id}: duplicate indicator names")
            for ind in s.indicators:
                if ind.kind not in KINDS:
                    raise ValidationError(f"{s.system_id}:{ind.name}: unknown kind {ind.kind!r}")
                if not 0.0 <= ind.coverage <= 1.0:
                    raise ValidationError(f"{s.system_id}:{ind.name}: coverage outside [0, 1]")
                if ind.missing not in ("random", "tail"):
                    raise ValidationError(f"{s.system_id}:{ind.name}: missing must be random or tail")
                if ind.distribution.get("type") not in DISTRIBUTIONS:
                    raise ValidationError(f"{s.system_id}:{ind.name}: unknown distribution")
        if not self.countries or any(w < 0 for w in self.countries.values()) \
                or sum(self.countries.values()) <= 0:
            raise ValidationError("country weights must be non-negative with a positive sum")
        keys = set(self.indicator_keys())
        pairs = list(self.correlations) + [p for ps in self.country_correlations.values() for p in ps]
        for p in pairs:
            if p.a not in keys or p.b not in keys or p.a == p.b:
                raise ValidationError(f"bad planted correlation {p.a} ~ {p.b}")
            if not -1.0 < p.rho < 1.0:
                raise ValidationError(f"planted rho must be inside (-1, 1), got {p.rho}")
        if self.campus_decoys < 0:
            raise ValidationError("campus_decoys must be non-negative")

    def indicator_keys(self):
        return [f"{s.system_id}:{i.name}" for s in self.systems for i in s.indicators]

    @classmethod
    def from_json(cls, obj) -> "SyntheticSpec":
        try:
            systems = tuple(
                SyntheticSystem(
                    s["system_id"], s.get("display_name", s["system_id"]), int(s.get("year", 2016)),
                    int(s["size"]),
                    tuple(SyntheticIndicator(
                        i["name"], i.get("kind", NUMERIC),
                        i.get("higher_is_better", i.get("kind", NUMERIC) != RANK),
                        dict(i.get("distribution", {"type": "lognormal", "mu": 0.0, "sigma": 1.0})),
                        float(i.get("coverage", 1.0)), i.get("missing", "random"),
                        int(i.get("decimals", 4)))
                        for i in s["indicators"]))
                for s in obj["systems"])
            countries = {resolve_country(k): float(v) for k, v in obj["countries"].items()}
            corr = tuple(PlantedCorrelation(c["a"], c["b"], float(c["rho"]))
                         for c in obj.get("correlations", []))
            ccorr = {resolve_country(k): tuple(PlantedCorrelation(c["a"], c["b"], float(c["rho"]))
                                               for c in v)
                     for k, v in obj.get("country_correlations", {}).items()}
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed synthetic spec: {exc!r}") from None
        return cls(systems, countries, float(obj.get("shared_fraction", 0.5)), corr, ccorr,
                   int(obj.get("campus_decoys", 0)), bool(obj.get("city_names", True)))

    @classmethod
    def load(cls, path) -> "SyntheticSpec":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# -- helpers -----------------------------------------------------------------

def allocate(total: int, weights: Mapping[str, float]) -> dict:
    """Largest-remainder split of ``total`` by weight, ties by key order."""
    keys = sorted(weights)
    wsum = sum(weights.values())
    raw = {k: total * weights[k] / wsum for k in keys}
    counts = {k: int(math.floor(raw[k])) for k in keys}
    left = total - sum(counts.values())
    order = sorted(keys, key=lambda k: (-(raw[k] - counts[k]), k))
    for k in order[:left]:
        counts[k] += 1
    return counts


def spearman_to_pearson(rho):
    """Normal-copula Pearson correlation giving Spearman ``rho``."""
    return 2.0 * np.sin(np.pi * np.asarray(rho) / 6.0)


def _normal_scores(n: int) -> np.ndarray:
    return special.ndtri(np.arange(1, n + 1) / (n + 1.0))


def _rank_matrix(x: np.ndarray) -> np.ndarray:
    return np.argsort(np.argsort(x, axis=0, kind="stable"), axis=0, kind="stable").astype(float)


def _spearman_matrix(x: np.ndarray) -> np.ndarray:
    return np.corrcoef(_rank_matrix(x), rowvar=False)


def _impose(scores: np.ndarray, pearson: np.ndarray) -> Optional[np.ndarray]:
    try:
        target = np.linalg.cholesky(pearson)
        current = np.linalg.cholesky(np.corrcoef(scores, rowvar=False))
    except np.linalg.LinAlgError:
        return None
    return scores @ np.linalg.inv(current).T @ target.T


def induce(scores: np.ndarray, target: np.ndarray, tol: float = 1e-3, max_iter: int = 30) -> np.ndarray:
    """Reorder-free Iman-Conover step with fixed-point Spearman correction.

    ``scores`` columns are independent score vectors, ``target`` the wanted
    Spearman matrix. Returns a matrix whose column ranks realize it closely.
    """
    if scores.shape[1] < 2 or scores.shape[0] < 3:
        return scores
    adjusted = target.copy()
    best = scores
    best_err = np.inf
    off = ~np.eye(len(target), dtype=bool)
    for _ in range(max_iter):
        pearson = spearman_to_pearson(adjusted)
        np.fill_diagonal(pearson, 1.0)
        out = _impose(scores, pearson)
        if out is None:
            break
        err = target - _spearman_matrix(out)
        worst = float(np.abs(err[off]).max())
        if worst < best_err:
            best, best_err = out, worst
        if worst < tol:
            break
        adjusted = np.clip(adjusted + err, -0.999, 0.999)
        np.fill_diagonal(adjusted, 1.0)
    return best


def _check_feasible(target: np.ndarray, where: str):
    pearson = spearman_to_pearson(target)
    np.fill_diagonal(pearson, 1.0)
    try:
        np.linalg.cholesky(pearson)
    except np.linalg.LinAlgError:
        raise ValidationError(
            f"planted correlations ({where}) are jointly infeasible: matrix not positive definite") from None


def _fill(latent, rng, rows, cols, target):
    m = len(rows)
    scores = np.column_stack([_normal_scores(m)[rng.permutation(m)] for _ in cols])
    if len(cols) >= 2 and m > len(cols) + 2:
        scores = induce(scores, target[np.ix_(cols, cols)])
    latent[np.ix_(rows, cols)] = scores


def _marginal(dist: Mapping, z: np.ndarray) -> np.ndarray:
    kind = dist.get("type", "lognormal")
    if kind == "lognormal":
        return np.exp(float(dist.get("mu", 0.0)) + float(dist.get("sigma", 1.0)) * z)
    if kind == "normal":
        return float(dist.get("mean", 0.0)) + float(dist.get("sd", 1.0)) * z
    lo, hi = float(dist.get("low", 0.0)), float(dist.get("high", 1.0))
    return lo + (hi - lo) * special.ndtr(z)


def _word(rng) -> str:
    parts = []
    for _ in range(int(rng.integers(2, 4))):
        parts.append(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))])
    parts.append(_CODAS[rng.integers(len(_CODAS))])
    return "".join(parts).capitalize()


def _base_names(rng, count: int, rules, use_cities: bool) -> list:
    from .entity_link import normalize_name

    blocked = set(rules.term_map) | set(rules.city_map) | set(rules.campus_cities) \
        | set(rules.campus_markers) | set(rules.similarity_stopwords)
    names, seen = [], set()
    cities = sorted(_CITY_VARIANTS)
    while len(names) < count:
        w, v = _word(rng), _word(rng)
        if w.lower() in blocked or v.lower() in blocked:
            continue
        if use_cities and rng.random() < 0.05:
            w = cities[rng.integers(len(cities))]
        if rng.random() < 0.1:
            vowel = [i for i, ch in enumerate(w) if ch in _UMLAUT]
            if vowel:
                i = vowel[0]
                w = w[:i] + _UMLAUT[w[i]] + w[i + 1:]
        name = _PATTERNS[rng.integers(len(_PATTERNS))].format(w=w, v=v)
        norm = normalize_name(name, rules)
        if norm in seen:
            continue
        seen.add(norm)
        names.append(name)
    return names


def _variant(rng, name: str) -> str:
    out = name
    for word, alts in _VARIANTS:
        pattern = re.compile(rf"\b{word}\b")
        if pattern.search(out) and rng.random() < 0.5:
            out = pattern.sub(alts[rng.integers(len(alts))], out, count=1)
    for city, local in _CITY_VARIANTS.items():
        pattern = re.compile(rf"\b{city}\b")
        if pattern.search(out) and rng.random() < 0.5:
            out = pattern.sub(local, out)
    if rng.random() < 0.15:
        out = out.upper()
    elif rng.random() < 0.15:
        out = out.replace("ä", "a").replace("ö", "o").replace("ü", "u")
    if rng.random() < 0.1:
        out = out + " "
    return out


# -- generator ---------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticCorpus:
    datasets: tuple
    countries: Mapping[str, str]       # truth id -> country
    latent: Mapping[str, Mapping[str, float]]  # indicator key -> truth id -> score

    def truth_of(self, system_id: str, local_id: str) -> str:
        return local_id


def generate_synthetic(seed: int, spec: SyntheticSpec) -> SyntheticCorpus:
    from .entity_link import load_rules

    rng = np.random.default_rng(seed)
    rules = load_rules()
    sizes = [s.size for s in spec.systems]
    n_shared = int(round(spec.shared_fraction * min(sizes)))
    n_shared = min(n_shared, min(sizes))

    # truth ids: shared first, then exclusive blocks per system
    members = {}
    pool = [f"T{i:05d}" for i in range(n_shared)]
    for s in spec.systems:
        own = [f"T{len(pool) + i:05d}" for i in range(s.size - n_shared)]
        pool.extend(own)
        members[s.system_id] = pool[:n_shared] + own
    total = len(pool)

    counts = allocate(total, spec.countries)
    country_list = [c for c in sorted(counts) for _ in range(counts[c])]
    country_list = [country_list[i] for i in rng.permutation(total)]
    country_of = dict(zip(pool, country_list))

    names = dict(zip(pool, _base_names(rng, total, rules, spec.city_names)))
    # decoys sit in the last system so they compete with hosts across systems
    exclusive = members[spec.systems[-1].system_id][n_shared:]
    for i, tid in enumerate(exclusive[: min(spec.campus_decoys, n_shared)]):
        host = pool[int(rng.integers(n_shared))]
        names[tid] = f"{names[host]} at {_DECOY_CITIES[i % len(_DECOY_CITIES)]}"
        country_of[tid] = country_of[host]

    # latent scores per (membership block, country) group; every subset an
    # analysis can observe is a union of such groups
    keys = spec.indicator_keys()
    pos = {key: i for i, key in enumerate(keys)}
    base_target = np.eye(len(keys))
    for p in spec.correlations:
        base_target[pos[p.a], pos[p.b]] = base_target[pos[p.b], pos[p.a]] = p.rho
    _check_feasible(base_target, "global")
    country_targets = {}
    for country, pairs in sorted(spec.country_correlations.items()):
        t = base_target.copy()
        for p in pairs:
            t[pos[p.a], pos[p.b]] = t[pos[p.b], pos[p.a]] = p.rho
        _check_feasible(t, country)
        country_targets[country] = t

    row = {tid: i for i, tid in enumerate(pool)}
    latent = np.full((total, len(keys)), np.nan)
    blocks = [(pool[:n_shared], list(range(len(keys))))]
    for s in spec.systems:
        own = members[s.system_id][n_shared:]
        blocks.append((own, [pos[f"{s.system_id}:{i.name}"] for i in s.indicators]))
    for tids, cols in blocks:
        if not tids or not cols:
            continue
        leftover = []
        for country in sorted({country_of[t] for t in tids}):
            group = [t for t in tids if country_of[t] == country]
            if len(group) > len(cols) + 2:
                target = country_targets.get(country, base_target)
                _fill(latent, rng, [row[t] for t in group], cols, target)
            else:
                leftover.extend(group)
        if leftover:
            _fill(latent, rng, [row[t] for t in leftover], cols, base_target)

    datasets = []
    latent_out = {}
    for s in spec.systems:
        sid = s.system_id
        mem = members[sid]
        idx = np.array([row[t] for t in mem], dtype=int)
        columns = {}
        for ind in s.indicators:
            key = f"{sid}:{ind.name}"
            z_raw = latent[idx, pos[key]]
            latent_out[key] = dict(zip(mem, (float(x) for x in z_raw)))
            # exact marginal: map within-system ranks to normal quantiles
            ranks = np.argsort(np.argsort(z_raw, kind="stable"), kind="stable")
            z = special.ndtri((ranks + 0.5) / len(mem))
            if ind.kind == RANK:
                # rank 1 goes to the highest latent score
                vals = {t: int(len(mem) - r) for t, r in zip(mem, ranks)}
            else:
                raw = np.round(_marginal(ind.distribution, z), ind.decimals)
                if not ind.higher_is_better:
                    raw = np.round(_marginal(ind.distribution, -z), ind.decimals)
                vals = {t: float(v) for t, v in zip(mem, raw)}
                if ind.kind == CLASS_A_TO_E:
                    vals = dict(distance_to_median_classes(
                        IndicatorSeries(sid, ind.name, vals)).values)
            keep = int(round(ind.coverage * len(mem)))
            if keep < len(mem):
                if ind.missing == "tail":
                    order = [mem[i] for i in np.argsort(-z_raw, kind="stable")]
                else:
                    order = [mem[i] for i in rng.permutation(len(mem))]
                for t in order[keep:]:
                    vals[t] = None
            columns[ind.name] = vals
        manifest = SystemManifest(
            sid, s.display_name, s.year,
            tuple(IndicatorDef(i.name, i.kind, i.higher_is_better) for i in s.indicators))
        records = []
        for t in sorted(mem):
            raw_name = names[t] if sid == spec.systems[0].system_id else _variant(rng, names[t])
            records.append(InstitutionRecord(
                t, raw_name, country_of[t],
                {i.name: columns[i.name][t] for i in s.indicators}))
        datasets.append(RankingDataset(manifest, tuple(records)))
    return SyntheticCorpus(tuple(datasets), dict(country_of), latent_out)


def generate_synthetic_corpus(seed: int, n_systems: Optional[int], spec: SyntheticSpec) -> list:
    """Datasets only; ``n_systems`` truncates the spec's system list if given."""
    if n_systems is not None:
        if not 1 <= n_systems <= len(spec.systems):
            raise ValidationError(f"n_systems must be in 1..{len(spec.systems)}")
        spec = SyntheticSpec(spec.systems[:n_systems], spec.countries, spec.shared_fraction,
                             tuple(p for p in spec.correlations
                                   if _sys(p.a) in _ids(spec, n_systems) and _sys(p.b) in _ids(spec, n_systems)),
                             {c: tuple(p for p in ps if _sys(p.a) in _ids(spec, n_systems)
                                       and _sys(p.b) in _ids(spec, n_systems))
                              for c, ps in spec.country_correlations.items()},
                             spec.campus_decoys, spec.city_names)
    return list(generate_synthetic(seed, spec).datasets)


def _sys(key: str) -> str:
    return key.split(":", 1)[0]


def _ids(spec, n):
    return {s.system_id for s in spec.systems[:n]}


def write_corpus(datasets: Sequence[RankingDataset], out_dir) -> list:
    """Write ``<system>.json`` + ``<system>.csv`` per dataset; returns the path pairs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for ds in datasets:
        m = out / f"{ds.system_id}.json"
        t = out / f"{ds.system_id}.csv"
        write_dataset(ds, m, t)
        paths.append((m, t))
    return paths
