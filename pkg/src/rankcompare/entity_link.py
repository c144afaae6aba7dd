"""Institution name normalization, thesaurus growth and cross-system linking.

Only exact matches on normalized names (with the same country) are linked
automatically. Anything merely similar, including names that differ only by
a campus qualifier such as "at Fayetteville", goes to a review queue.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

from .errors import LinkageConflictError, ParseError, ValidationError
from .ingest import RankingDataset, SystemManifest, check_corpus
from .series import IndicatorSeries

DEFAULT_THRESHOLD = 0.8
TSV_HEADER = ("variant", "canonical_id", "canonical_name", "country")


# -- normalization -----------------------------------------------------------

@dataclass(frozen=True)
class NormalizationRules:
    term_map: Mapping[str, str] = field(default_factory=dict)
    city_map: Mapping[str, str] = field(default_factory=dict)
    strip_punctuation: bool = True
    fold_diacritics: bool = True
    campus_markers: frozenset = frozenset()
    campus_cities: frozenset = frozenset()
    similarity_stopwords: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "term_map", MappingProxyType(dict(self.term_map)))
        object.__setattr__(self, "city_map", MappingProxyType(dict(self.city_map)))
        for name in ("campus_markers", "campus_cities", "similarity_stopwords"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        # substitutions must land on fixed points or normalization is not idempotent
        for table in (self.term_map, self.city_map):
            for key, value in table.items():
                if key != _clean(key, self) or " " in key:
                    raise ValidationError(f"rule key {key!r} is not a normalized token")
                for tok in value.split():
                    if tok != _clean(tok, self) or self._lookup(tok) != tok:
                        raise ValidationError(f"rule value {value!r} is not a fixed point")

    def _lookup(self, token: str) -> str:
        token = self.term_map.get(token, token)
        return self.city_map.get(token, token)

    @classmethod
    def from_json(cls, obj) -> "NormalizationRules":
        return cls(
            term_map=obj.get("term_map", {}),
            city_map=obj.get("city_map", {}),
            strip_punctuation=bool(obj.get("strip_punctuation", True)),
            fold_diacritics=bool(obj.get("fold_diacritics", True)),
            campus_markers=obj.get("campus_markers", ()),
            campus_cities=obj.get("campus_cities", ()),
            similarity_stopwords=obj.get("similarity_stopwords", ()),
        )

    def to_json(self):
        return {
            "term_map": dict(sorted(self.term_map.items())),
            "city_map": dict(sorted(self.city_map.items())),
            "strip_punctuation": self.strip_punctuation,
            "fold_diacritics": self.fold_diacritics,
            "campus_markers": sorted(self.campus_markers),
            "campus_cities": sorted(self.campus_cities),
            "similarity_stopwords": sorted(self.similarity_stopwords),
        }


def load_rules(path=None) -> NormalizationRules:
    """Read a rules file; ``None`` gives the bundled defaults."""
    if path is None:
        text = resources.files("rankcompare").joinpath("data/name_rules.json").read_text("utf-8")
        source = "<bundled rules>"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source, exc.lineno) from None
    return NormalizationRules.from_json(obj)


def _clean(text: str, rules: NormalizationRules) -> str:
    s = text.lower()
    if rules.fold_diacritics:
        s = unicodedata.normalize("NFKD", s)
        s = "".join(ch for ch in s if not unicodedata.combining(ch)).lower()
    s = s.replace("&", " and ")
    if rules.strip_punctuation:
        s = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in s)
    return " ".join(s.split())


def _normalize_once(text: str, rules: NormalizationRules) -> str:
    tokens = _clean(text, rules).split()
    return " ".join(t for tok in tokens for t in rules._lookup(tok).split())


def normalize_name(raw: str, rules: NormalizationRules) -> str:
    """Canonical comparison form of an institution name.

    Lowercases, folds diacritics, strips punctuation, applies the term and
    city tables token by token and collapses whitespace. Idempotent.
    """
    current = raw
    for _ in range(8):
        nxt = _normalize_once(current, rules)
        if nxt == current:
            break
        current = nxt
    return current


def similarity_tokens(normalized: str, rules: NormalizationRules) -> frozenset:
    return frozenset(t for t in normalized.split() if t not in rules.similarity_stopwords)


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def campus_stems(normalized: str, rules: NormalizationRules) -> frozenset:
    """Prefixes of the name that are followed by a campus/city qualifier."""
    tokens = normalized.split()
    stems = set()
    for i in range(1, len(tokens)):
        tail = tokens[i:]
        if tail[0] in rules.campus_markers:
            if len(tail) > 1:
                stems.add(" ".join(tokens[:i]))
        elif all(t in rules.campus_cities for t in tail):
            stems.add(" ".join(tokens[:i]))
    return frozenset(stems)


# -- thesaurus ---------------------------------------------------------------

def canonical_id_for(normalized: str, country: str) -> str:
    digest = hashlib.sha1(f"{normalized}\t{country}".encode("utf-8")).hexdigest()
    return "c" + digest[:12]


def singleton_id_for(system_id: str, local_id: str) -> str:
    digest = hashlib.sha1(f"{system_id}\t{local_id}".encode("utf-8")).hexdigest()
    return "s" + digest[:12]


@dataclass(frozen=True)
class Thesaurus:
    entries: Mapping[str, str] = field(default_factory=dict)
    canon: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        entries = dict(sorted(self.entries.items()))
        canon = {cid: tuple(v) for cid, v in sorted(self.canon.items())}
        for variant, cid in entries.items():
            if cid not in canon:
                raise ValidationError(f"thesaurus variant {variant!r} points to unknown id {cid}")
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(self, "canon", MappingProxyType(canon))

    def lookup(self, variant: str) -> Optional[str]:
        return self.entries.get(variant)

    def variants_of(self, cid: str) -> list:
        return sorted(v for v, c in self.entries.items() if c == cid)

    def __len__(self):
        return len(self.entries)

    def to_tsv(self) -> str:
        lines = ["\t".join(TSV_HEADER)]
        for variant, cid in self.entries.items():
            name, country = self.canon[cid]
            fields = (variant, cid, name, country)
            for f in fields:
                if "\t" in f or "\n" in f or "\r" in f:
                    raise ValidationError(f"thesaurus field {f!r} contains a tab or newline")
            lines.append("\t".join(fields))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str, source="<thesaurus>") -> "Thesaurus":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or tuple(lines[0].split("\t")) != TSV_HEADER:
            raise ParseError("missing thesaurus header", source, 1)
        entries = {}
        canon = {}
        prev = None
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", source, lineno)
            variant, cid, name, country = parts
            if prev is not None and variant <= prev:
                raise ParseError("variants must be unique and sorted", source, lineno)
            prev = variant
            if cid in canon and canon[cid] != (name, country):
                raise ParseError(f"canonical {cid} has inconsistent name/country", source, lineno)
            canon[cid] = (name, country)
            entries[variant] = cid
        return cls(entries, canon)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_tsv())

    @classmethod
    def load(cls, path) -> "Thesaurus":
        with open(path, encoding="utf-8", newline="") as fh:
            return cls.from_tsv(fh.read(), str(path))


@dataclass(frozen=True)
class MatchReport:
    auto_links: tuple = ()
    candidates: tuple = ()
    unlinked: tuple = ()

    def to_json(self) -> dict:
        return {
            "auto_links": list(self.auto_links),
            "candidates": list(self.candidates),
            "unlinked": list(self.unlinked),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


class _Index:
    """Token and campus-stem lookups over the thesaurus as it grows."""

    def __init__(self, rules):
        self.rules = rules
        self.postings = defaultdict(set)
        self.tokens = {}
        self.stem_to_variants = defaultdict(set)
        self.stems = {}

    def add(self, variant: str):
        toks = similarity_tokens(variant, self.rules)
        self.tokens[variant] = toks
        for t in toks:
            self.postings[t].add(variant)
        stems = campus_stems(variant, self.rules)
        self.stems[variant] = stems
        for s in stems:
            self.stem_to_variants[s].add(variant)

    def similar(self, variant: str, threshold: float):
        """Existing variants with token-set Jaccard >= threshold (prefix filtering)."""
        toks = similarity_tokens(variant, self.rules)
        if not toks:
            return []
        m = len(toks)
        need = math.ceil(threshold * m - 1e-9)
        probe_count = max(1, m - need + 1)
        probe = sorted(toks, key=lambda t: (len(self.postings.get(t, ())), t))[:probe_count]
        pool = set()
        for t in probe:
            pool |= self.postings.get(t, set())
        hits = []
        for other in pool:
            if other == variant:
                continue
            score = jaccard(toks, self.tokens[other])
            if score >= threshold:
                hits.append((other, score))
        return sorted(hits, key=lambda h: (-h[1], h[0]))

    def campus_related(self, variant: str):
        stems = campus_stems(variant, self.rules)
        related = set(self.stem_to_variants.get(variant, ()))
        for s in stems:
            if s in self.tokens:
                related.add(s)
            related |= self.stem_to_variants.get(s, set())
        related.discard(variant)
        return sorted(related)


def build_thesaurus(datasets: Sequence[RankingDataset], rules: NormalizationRules,
                    prior: Optional[Thesaurus] = None,
                    threshold: float = DEFAULT_THRESHOLD):
    """Grow a thesaurus system by system, in the order given.

    Returns ``(thesaurus, match_report)``. New names seed new canonical
    institutions; exact normalized matches with the same country link to
    an existing one. Similar names and campus variants become review
    candidates and are never merged.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"similarity threshold must be in (0, 1], got {threshold}")
    check_corpus(datasets)
    entries = dict(prior.entries) if prior else {}
    canon = dict(prior.canon) if prior else {}
    systems_of = defaultdict(set)
    index = _Index(rules)
    for variant in entries:
        index.add(variant)

    auto_links, candidates, unlinked = [], [], []

    for ds in datasets:
        sid = ds.system_id
        for rec in sorted(ds.records, key=lambda r: r.local_id):
            norm = normalize_name(rec.raw_name, rules)
            base = {"system_id": sid, "local_id": rec.local_id, "raw_name": rec.raw_name,
                    "variant": norm, "country": rec.country}
            cid = entries.get(norm)
            if cid is not None:
                name, country = canon[cid]
                if country != rec.country:
                    candidates.append({**base, "canonical_id": cid, "canonical_name": name,
                                       "matched_variant": norm, "similarity": 1.0,
                                       "reason": "country_conflict"})
                    unlinked.append({**base, "reason": "country_conflict"})
                elif sid in systems_of[cid]:
                    candidates.append({**base, "canonical_id": cid, "canonical_name": name,
                                       "matched_variant": norm, "similarity": 1.0,
                                       "reason": "duplicate_in_system"})
                    unlinked.append({**base, "reason": "duplicate_in_system"})
                else:
                    systems_of[cid].add(sid)
                    auto_links.append({**base, "canonical_id": cid, "canonical_name": name})
                continue

            seen_cids = set()
            for other, score in index.similar(norm, threshold):
                ocid = entries[other]
                if systems_of[ocid] == {sid}:
                    continue
                seen_cids.add((ocid, other))
                candidates.append({**base, "canonical_id": ocid, "canonical_name": canon[ocid][0],
                                   "matched_variant": other, "similarity": round(score, 6),
                                   "reason": "similar_name"})
            for other in index.campus_related(norm):
                ocid = entries[other]
                if systems_of[ocid] == {sid} or (ocid, other) in seen_cids:
                    continue
                score = jaccard(similarity_tokens(norm, rules), index.tokens[other])
                candidates.append({**base, "canonical_id": ocid, "canonical_name": canon[ocid][0],
                                   "matched_variant": other, "similarity": round(score, 6),
                                   "reason": "campus_qualifier"})

            new_cid = canonical_id_for(norm, rec.country)
            if new_cid in canon:
                raise LinkageConflictError(f"canonical id collision for {norm!r}")
            canon[new_cid] = (rec.raw_name.strip(), rec.country)
            entries[norm] = new_cid
            systems_of[new_cid].add(sid)
            index.add(norm)
            unlinked.append({**base, "reason": "new_canonical", "canonical_id": new_cid})

    key = lambda d: (d["system_id"], d["local_id"], d.get("matched_variant", ""))
    report = MatchReport(tuple(sorted(auto_links, key=key)),
                         tuple(sorted(candidates, key=key)),
                         tuple(sorted(unlinked, key=key)))
    return Thesaurus(entries, canon), report


# -- linked corpus -----------------------------------------------------------

@dataclass(frozen=True)
class CanonicalInstitution:
    id: str
    name: str
    country: str


@dataclass(frozen=True)
class LinkedCorpus:
    systems: tuple
    institutions: Mapping[str, CanonicalInstitution]
    presence: Mapping[str, frozenset]
    values: Mapping[tuple, object]
    provenance: Mapping[tuple, str]

    def system(self, system_id: str) -> SystemManifest:
        for m in self.systems:
            if m.system_id == system_id:
                return m
        raise KeyError(f"unknown system {system_id!r}")

    @property
    def system_ids(self):
        return tuple(m.system_id for m in self.systems)

    def members(self, system_id: str) -> list:
        self.system(system_id)
        return [cid for cid, sys in self.presence.items() if system_id in sys]

    def value(self, cid: str, system_id: str, indicator: str):
        return self.values.get((cid, system_id, indicator))

    def series(self, system_id: str, indicator: str) -> IndicatorSeries:
        """Values over every institution present in the system (missing kept)."""
        ind = self.system(system_id).indicator(indicator)
        vals = {cid: self.values.get((cid, system_id, indicator)) for cid in self.members(system_id)}
        return IndicatorSeries(system_id, indicator, vals, ind.kind, ind.higher_is_better)

    def name(self, cid: str) -> str:
        return self.institutions[cid].name

    def country(self, cid: str) -> str:
        return self.institutions[cid].country


def link(datasets: Sequence[RankingDataset], thesaurus: Thesaurus,
         rules: Optional[NormalizationRules] = None) -> LinkedCorpus:
    """Join datasets on the thesaurus. Unmatched records become singletons."""
    check_corpus(datasets)
    if rules is None:
        rules = load_rules()
    institutions = {}
    presence = defaultdict(set)
    values = {}
    provenance = {}
    for ds in datasets:
        sid = ds.system_id
        names = ds.manifest.indicator_names
        for rec in sorted(ds.records, key=lambda r: r.local_id):
            norm = normalize_name(rec.raw_name, rules)
            cid = thesaurus.lookup(norm)
            if cid is not None and thesaurus.canon[cid][1] == rec.country:
                inst = CanonicalInstitution(cid, thesaurus.canon[cid][0], rec.country)
            else:
                cid = singleton_id_for(sid, rec.local_id)
                inst = CanonicalInstitution(cid, rec.raw_name.strip(), rec.country)
            institutions.setdefault(cid, inst)
            if sid in presence[cid]:
                for n in names:
                    old = values[(cid, sid, n)]
                    new = rec.values.get(n)
                    if old != new:
                        raise LinkageConflictError(
                            f"{sid}: records {provenance[(cid, sid)]} and {rec.local_id} both link to "
                            f"{cid} with different {n!r} values ({old!r} vs {new!r})")
                continue
            presence[cid].add(sid)
            provenance[(cid, sid)] = rec.local_id
            for n in names:
                values[(cid, sid, n)] = rec.values.get(n)
    ids = sorted(institutions)
    return LinkedCorpus(
        systems=tuple(ds.manifest for ds in datasets),
        institutions=MappingProxyType({i: institutions[i] for i in ids}),
        presence=MappingProxyType({i: frozenset(presence[i]) for i in ids}),
        values=MappingProxyType(dict(sorted(values.items()))),
        provenance=MappingProxyType(dict(sorted(provenance.items()))),
    )


def link_datasets(datasets: Sequence[RankingDataset], rules: Optional[NormalizationRules] = None,
                  prior: Optional[Thesaurus] = None, threshold: float = DEFAULT_THRESHOLD):
    """build_thesaurus followed by link; returns (corpus, thesaurus, report)."""
    if rules is None:
        rules = load_rules()
    thesaurus, report = build_thesaurus(datasets, rules, prior, threshold)
    return link(datasets, thesaurus, rules), thesaurus, report
