"""Loading and writing ranking-system dumps.

A dataset is described by two files: a JSON manifest naming the system and
its indicators, and a UTF-8 CSV table with one row per institution::

    local_id,name,country,<indicator 1>,<indicator 2>,...

Empty cells (and the literals ``NA`` / ``n/a`` on input) are missing values.
Missing is never the same thing as zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Union

import pycountry

from .errors import ParseError, ValidationError

NUMERIC = "numeric"
CLASS_A_TO_E = "class_A_to_E"
RANK = "rank"
KINDS = (NUMERIC, CLASS_A_TO_E, RANK)
CLASS_LABELS = ("A", "B", "C", "D", "E")

MISSING_TOKENS = frozenset({"", "na", "n/a"})
FIXED_COLUMNS = ("local_id", "name", "country")

_TOKEN_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")

Value = Union[float, int, str, None]


@dataclass(frozen=True)
class IndicatorDef:
    name: str
    kind: str = NUMERIC
    higher_is_better: bool = True

    def __post_init__(self):
        if not self.name or self.name != self.name.strip():
            raise ValidationError(f"bad indicator name {self.name!r}")
        if self.name in FIXED_COLUMNS:
            raise ValidationError(f"indicator name {self.name!r} clashes with a fixed column")
        if self.kind not in KINDS:
            raise ValidationError(f"indicator {self.name!r}: unknown kind {self.kind!r}")

    def to_json(self):
        return {"name": self.name, "kind": self.kind, "higher_is_better": self.higher_is_better}


@dataclass(frozen=True)
class SystemManifest:
    system_id: str
    display_name: str
    year: int
    indicators: tuple = ()

    def __post_init__(self):
        if not self.system_id or not _TOKEN_RE.match(self.system_id):
            raise ValidationError(f"system_id must be a non-empty token, got {self.system_id!r}")
        object.__setattr__(self, "indicators", tuple(self.indicators))
        seen = set()
        for ind in self.indicators:
            if ind.name in seen:
                raise ValidationError(
                    f"system {self.system_id}: duplicate indicator {ind.name!r}")
            seen.add(ind.name)

    def indicator(self, name: str) -> IndicatorDef:
        for ind in self.indicators:
            if ind.name == name:
                return ind
        raise KeyError(f"{self.system_id} has no indicator {name!r}")

    @property
    def indicator_names(self):
        return tuple(ind.name for ind in self.indicators)

    def to_json(self):
        return {
            "system_id": self.system_id,
            "display_name": self.display_name,
            "year": self.year,
            "indicators": [ind.to_json() for ind in self.indicators],
        }

    @classmethod
    def from_json(cls, obj) -> "SystemManifest":
        if not isinstance(obj, dict):
            raise ValidationError("manifest must be a JSON object")
        missing = [k for k in ("system_id", "display_name", "year", "indicators") if k not in obj]
        if missing:
            raise ValidationError(f"manifest lacks field(s): {', '.join(missing)}")
        year = obj["year"]
        if isinstance(year, bool) or not isinstance(year, int):
            raise ValidationError(f"manifest year must be an integer, got {year!r}")
        if not isinstance(obj["indicators"], list):
            raise ValidationError("manifest indicators must be a list")
        indicators = []
        for item in obj["indicators"]:
            if not isinstance(item, dict) or "name" not in item:
                raise ValidationError(f"bad indicator entry {item!r}")
            kind = item.get("kind", NUMERIC)
            hib = item.get("higher_is_better", kind != RANK)
            if not isinstance(hib, bool):
                raise ValidationError(f"indicator {item['name']!r}: higher_is_better must be boolean")
            indicators.append(IndicatorDef(str(item["name"]), kind, hib))
        return cls(str(obj["system_id"]), str(obj["display_name"]), year, tuple(indicators))


@dataclass(frozen=True)
class InstitutionRecord:
    local_id: str
    raw_name: str
    country: str
    values: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not self.local_id or not self.local_id.strip():
            raise ValidationError("local_id must be non-empty")
        if not self.raw_name or not self.raw_name.strip():
            raise ValidationError(f"record {self.local_id}: name is empty")
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def value(self, indicator: str) -> Value:
        return self.values.get(indicator)

    def n_missing(self) -> int:
        return sum(1 for v in self.values.values() if v is None)


@dataclass(frozen=True)
class RankingDataset:
    manifest: SystemManifest
    records: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        declared = {ind.name: ind for ind in self.manifest.indicators}
        seen = set()
        for rec in self.records:
            if rec.local_id in seen:
                raise ValidationError(
                    f"system {self.system_id}: duplicate local_id {rec.local_id!r}")
            seen.add(rec.local_id)
            for name, value in rec.values.items():
                if name not in declared:
                    raise ValidationError(
                        f"system {self.system_id}: record {rec.local_id} has undeclared "
                        f"indicator {name!r}")
                _check_value(declared[name], value, rec.local_id)

    @property
    def system_id(self) -> str:
        return self.manifest.system_id

    def __len__(self):
        return len(self.records)

    def n_missing(self) -> int:
        names = self.manifest.indicator_names
        return sum(1 for rec in self.records for n in names if rec.values.get(n) is None)


def _check_value(ind: IndicatorDef, value, local_id):
    if value is None:
        return
    if ind.kind == NUMERIC:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ValidationError(f"record {local_id}: {ind.name} must be a finite number, got {value!r}")
    elif ind.kind == RANK:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ValidationError(f"record {local_id}: {ind.name} must be a positive integer rank, got {value!r}")
    elif value not in CLASS_LABELS:
        raise ValidationError(f"record {local_id}: {ind.name} must be one of A-E, got {value!r}")


# -- countries ---------------------------------------------------------------

@lru_cache(maxsize=1)
def country_aliases() -> Mapping[str, str]:
    text = resources.files("rankcompare").joinpath("data/country_aliases.json").read_text("utf-8")
    return MappingProxyType(json.loads(text))


def resolve_country(text: str) -> str:
    """Map an alpha-2/alpha-3 code or a known country name to ISO alpha-2.

    Raises ValidationError for anything unrecognised.
    """
    raw = text.strip()
    alias = country_aliases().get(raw.lower())
    if alias:
        return alias
    if len(raw) == 2 and raw.isalpha():
        hit = pycountry.countries.get(alpha_2=raw.upper())
        if hit is not None:
            return hit.alpha_2
        raise ValidationError(f"unknown country code {raw!r}")
    if len(raw) == 3 and raw.isalpha():
        hit = pycountry.countries.get(alpha_3=raw.upper())
        if hit is not None:
            return hit.alpha_2
    hit = pycountry.countries.get(name=raw)
    if hit is not None:
        return hit.alpha_2
    raise ValidationError(f"unknown country {raw!r}")


# -- cells -------------------------------------------------------------------

def parse_cell(ind: IndicatorDef, cell: str) -> Value:
    text = cell.strip()
    if text.lower() in MISSING_TOKENS:
        return None
    if ind.kind == NUMERIC:
        try:
            value = float(text)
        except ValueError:
            raise ValidationError(f"{ind.name}: not a number: {text!r}") from None
        if not math.isfinite(value):
            raise ValidationError(f"{ind.name}: non-finite value {text!r}")
        return value
    if ind.kind == RANK:
        try:
            value = int(text)
        except ValueError:
            raise ValidationError(f"{ind.name}: rank must be an integer, got {text!r}") from None
        if value < 1:
            raise ValidationError(f"{ind.name}: rank must be positive, got {value}")
        return value
    label = text.upper()
    if label not in CLASS_LABELS:
        raise ValidationError(f"{ind.name}: class must be A-E, got {text!r}")
    return label


def format_cell(value: Value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# -- files -------------------------------------------------------------------

def load_manifest(path) -> SystemManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}", path) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from None
    try:
        return SystemManifest.from_json(obj)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def parse_table(text: str, manifest: SystemManifest, source="<table>") -> RankingDataset:
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty table, header row required", source, 1) from None
    except csv.Error as exc:
        raise ParseError(str(exc), source, reader.line_num) from None
    header = [h.strip() for h in header]
    if header[:3] != list(FIXED_COLUMNS):
        raise ParseError(f"header must start with {','.join(FIXED_COLUMNS)}", source, 1)
    columns = header[3:]
    declared = {ind.name: ind for ind in manifest.indicators}
    undeclared = [c for c in columns if c not in declared]
    if undeclared:
        raise ValidationError(f"{source}: undeclared indicator column(s): {', '.join(undeclared)}")
    if len(set(columns)) != len(columns):
        raise ValidationError(f"{source}: duplicate indicator columns in header")
    absent = [name for name in declared if name not in columns]
    if absent:
        raise ValidationError(f"{source}: declared indicator(s) without a column: {', '.join(absent)}")

    records = []
    seen = {}
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise ParseError(str(exc), source, reader.line_num) from None
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", source, line)
        local_id, name, country = (c.strip() for c in row[:3])
        if local_id in seen:
            raise ValidationError(
                f"{source}:{line}: duplicate local_id {local_id!r} (first on line {seen[local_id]})")
        seen[local_id] = line
        try:
            values = {col: parse_cell(declared[col], cell) for col, cell in zip(columns, row[3:])}
            record = InstitutionRecord(local_id, name.strip(), resolve_country(country), values)
        except ValidationError as exc:
            raise ValidationError(f"{source}:{line}: {exc}") from None
        records.append(record)
    return RankingDataset(manifest, tuple(records))


def load_dataset(manifest_path, table_path) -> RankingDataset:
    manifest = load_manifest(manifest_path)
    table_path = Path(table_path)
    try:
        text = table_path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}", table_path) from None
    return parse_table(text, manifest, str(table_path))


def table_text(dataset: RankingDataset) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    names = dataset.manifest.indicator_names
    writer.writerow(FIXED_COLUMNS + names)
    for rec in dataset.records:
        writer.writerow([rec.local_id, rec.raw_name, rec.country]
                        + [format_cell(rec.values.get(n)) for n in names])
    return buf.getvalue()


def manifest_text(manifest: SystemManifest) -> str:
    return json.dumps(manifest.to_json(), indent=2, ensure_ascii=False) + "\n"


def write_dataset(dataset: RankingDataset, manifest_path, table_path) -> None:
    Path(manifest_path).write_text(manifest_text(dataset.manifest), encoding="utf-8")
    with open(table_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_text(dataset))


def check_corpus(datasets: Sequence[RankingDataset]) -> None:
    """System ids must be unique across the datasets of one analysis."""
    seen = set()
    for ds in datasets:
        if ds.system_id in seen:
            raise ValidationError(f"duplicate system_id {ds.system_id!r} in corpus")
        seen.add(ds.system_id)


def dataset_summary(dataset: RankingDataset) -> dict:
    names = dataset.manifest.indicator_names
    return {
        "system_id": dataset.system_id,
        "records": len(dataset),
        "indicators": len(names),
        "missing": dataset.n_missing(),
        "countries": len({r.country for r in dataset.records}),
    }

