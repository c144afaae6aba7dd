"""Pipeline configuration and orchestration: ingest -> link -> analyses -> files.

Config file (JSON); relative paths are resolved against the config's folder::

    {
      "datasets": [{"manifest": "ARWU.json", "table": "ARWU.csv"}, ...],
      "rules": null,                  # name rules file, null = bundled
      "thesaurus": null,              # prior thesaurus TSV
      "output_dir": "out",
      "format": "csv",                # text | csv | json
      "similarity_threshold": 0.8,
      "percentile_method": "hazen",
      "thresholds": [2.0, 1.25, 0.75, 0.25],
      "derived": [{"name": "UMR:teaching_score", "fields": ["UMR:t1", "UMR:t2"],
                   "min_fields": 2}],
      "analyses": {
        "overlap": {},
        "top_overlap": {"lists": ["ARWU:overall", "QS:overall"], "top_n": 100},
        "geo": {"min_count": 10, "top": 5},
        "missing": {},
        "skew": {"indicators": null, "adjusted": true, "class_indicators": []},
        "corr": {"indicators": null, "min_n": 3, "alpha": 0.001, "p_method": "auto"},
        "country_corr": {"a": "THE:citations", "b": "THE:research", "min_n": 11,
                         "scatter_countries": ["IT", "NL"]},
        "compare_pair": [{"a": "THE:research", "b": "QS:reputation", "k": 20,
                          "countries": null, "points": false}]
      }
    }
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import analyses as an
from .entity_link import (DEFAULT_THRESHOLD, LinkedCorpus, Thesaurus, build_thesaurus, link,
                          load_rules)
from .errors import ConfigError, RankCompareError
from .ingest import RankingDataset, check_corpus, dataset_summary, load_dataset
from .series import IndicatorSeries
from .report import EXTENSIONS, FORMATS, AnalysisReport, Column, render
from .stats import correlation_matrix
from .svg import scatter_svg
from .transforms import PERCENTILE_METHODS, ClassThresholds, teaching_score

log = logging.getLogger(__name__)

STEPS = ("ingest", "link", "overlap", "top_overlap", "geo", "missing", "skew", "corr",
         "country_corr", "compare_pair")
ANALYSES = STEPS[2:]


@dataclass(frozen=True)
class DatasetPaths:
    manifest: Path
    table: Path
    manifest_ref: str
    table_ref: str


@dataclass(frozen=True)
class PipelineConfig:
    datasets: tuple
    output_dir: Path
    rules: Optional[Path] = None
    thesaurus: Optional[Path] = None
    format: str = "csv"
    similarity_threshold: float = DEFAULT_THRESHOLD
    percentile_method: str = "hazen"
    thresholds: ClassThresholds = ClassThresholds()
    derived: tuple = ()
    analyses: Mapping = field(default_factory=dict)
    source: Mapping = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj, base_dir=".", output_dir=None) -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        base = Path(base_dir)

        def path_of(value, what):
            if not isinstance(value, str) or not value:
                raise ConfigError(f"{what} must be a non-empty path string")
            p = Path(value)
            return p if p.is_absolute() else base / p

        raw_sets = obj.get("datasets")
        if not isinstance(raw_sets, list) or not raw_sets:
            raise ConfigError("config needs a non-empty 'datasets' list")
        datasets = []
        for i, d in enumerate(raw_sets):
            if not isinstance(d, dict) or "manifest" not in d or "table" not in d:
                raise ConfigError(f"datasets[{i}] needs 'manifest' and 'table'")
            datasets.append(DatasetPaths(path_of(d["manifest"], f"datasets[{i}].manifest"),
                                         path_of(d["table"], f"datasets[{i}].table"),
                                         d["manifest"], d["table"]))
        out = output_dir if output_dir is not None else obj.get("output_dir", "out")
        out = Path(out) if output_dir is not None else path_of(out, "output_dir")
        fmt = obj.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {fmt!r}")
        sim = obj.get("similarity_threshold", DEFAULT_THRESHOLD)
        if not isinstance(sim, (int, float)) or not 0 < sim <= 1:
            raise ConfigError(f"similarity_threshold must be in (0, 1], got {sim!r}")
        method = obj.get("percentile_method", "hazen")
        if method not in PERCENTILE_METHODS:
            raise ConfigError(f"percentile_method must be one of {', '.join(PERCENTILE_METHODS)}")
        try:
            thresholds = ClassThresholds.from_sequence(obj.get("thresholds", [2.0, 1.25, 0.75, 0.25]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad thresholds: {exc}") from None
        analyses = obj.get("analyses", {})
        if not isinstance(analyses, dict):
            raise ConfigError("'analyses' must be an object")
        unknown = sorted(set(analyses) - set(ANALYSES))
        if unknown:
            raise ConfigError(f"unknown analyses: {', '.join(unknown)}")
        derived = obj.get("derived", [])
        for d in derived:
            if not isinstance(d, dict) or "name" not in d or not d.get("fields"):
                raise ConfigError(f"derived indicator needs 'name' and 'fields': {d!r}")
        cfg = cls(
            datasets=tuple(datasets),
            output_dir=out,
            rules=path_of(obj["rules"], "rules") if obj.get("rules") else None,
            thesaurus=path_of(obj["thesaurus"], "thesaurus") if obj.get("thesaurus") else None,
            format=fmt,
            similarity_threshold=float(sim),
            percentile_method=method,
            thresholds=thresholds,
            derived=tuple(derived),
            analyses=analyses,
            source=obj,
        )
        cfg.check_params()
        return cfg

    @classmethod
    def load(cls, path, output_dir=None) -> "PipelineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        return cls.from_json(obj, path.parent, output_dir)

    def check_params(self):
        a = self.analyses
        checks = [
            (a.get("top_overlap", {}).get("top_n", 100), 1, "top_overlap.top_n"),
            (a.get("country_corr", {}).get("min_n", 11), 3, "country_corr.min_n"),
            (a.get("corr", {}).get("min_n", 3), 3, "corr.min_n"),
            (a.get("geo", {}).get("top", 5), 1, "geo.top"),
            (a.get("geo", {}).get("min_count", 10), 0, "geo.min_count"),
        ]
        for item in a.get("compare_pair", []):
            checks.append((item.get("k", 20), 1, "compare_pair.k"))
        for value, lo, name in checks:
            if isinstance(value, bool) or not isinstance(value, int) or value < lo:
                raise ConfigError(f"{name} must be an integer >= {lo}, got {value!r}")
        alpha = a.get("corr", {}).get("alpha", 0.001)
        if not isinstance(alpha, (int, float)) or not 0 < alpha < 1:
            raise ConfigError(f"corr.alpha must be in (0, 1), got {alpha!r}")

    def check_paths(self):
        for d in self.datasets:
            for p in (d.manifest, d.table):
                if not p.is_file():
                    raise ConfigError(f"input file not found: {p}")
        for p in (self.rules, self.thesaurus):
            if p is not None and not p.is_file():
                raise ConfigError(f"input file not found: {p}")

    def with_overrides(self, output_dir=None, fmt=None, top_n=None, k=None, min_n=None,
                       alpha=None) -> "PipelineConfig":
        analyses = json.loads(json.dumps(self.analyses))
        if top_n is not None:
            analyses.setdefault("top_overlap", {})["top_n"] = top_n
        if k is not None:
            for item in analyses.get("compare_pair", []):
                item["k"] = k
        if min_n is not None:
            analyses.setdefault("country_corr", {})["min_n"] = min_n
            analyses.setdefault("corr", {})["min_n"] = min_n
        if alpha is not None:
            analyses.setdefault("corr", {})["alpha"] = alpha
        if fmt is not None and fmt not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        source = dict(self.source)
        source["analyses"] = analyses
        if fmt is not None:
            source["format"] = fmt
        cfg = replace(self, analyses=analyses, source=source,
                      output_dir=Path(output_dir) if output_dir is not None else self.output_dir,
                      format=fmt or self.format)
        cfg.check_params()
        return cfg

    def with_analyses(self, analyses: Mapping) -> "PipelineConfig":
        analyses = json.loads(json.dumps(analyses))
        unknown = sorted(set(analyses) - set(ANALYSES))
        if unknown:
            raise ConfigError(f"unknown analyses: {', '.join(unknown)}")
        cfg = replace(self, analyses=analyses, source={**self.source, "analyses": analyses})
        cfg.check_params()
        return cfg

    def config_hash(self) -> str:
        # output location does not affect results
        src = {k: v for k, v in self.source.items() if k != "output_dir"}
        return hashlib.sha256(json.dumps(src, sort_keys=True).encode("utf-8")).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_")


# -- report builders ---------------------------------------------------------

def ingest_report(datasets: Sequence[RankingDataset]) -> AnalysisReport:
    cols = [Column("system_id"), Column("records", "int"), Column("indicators", "int"),
            Column("missing", "int"), Column("countries", "int")]
    rows = []
    for ds in datasets:
        s = dataset_summary(ds)
        rows.append((s["system_id"], s["records"], s["indicators"], s["missing"], s["countries"]))
    return AnalysisReport("ingest_summary", cols, rows)


def canonical_report(corpus: LinkedCorpus) -> AnalysisReport:
    cols = [Column("canonical_id"), Column("name"), Column("country"), Column("systems"),
            Column("n_systems", "int")]
    order = {s: i for i, s in enumerate(corpus.system_ids)}
    rows = []
    for cid, inst in corpus.institutions.items():
        present = sorted(corpus.presence[cid], key=order.get)
        rows.append((cid, inst.name, inst.country, ";".join(present), len(present)))
    return AnalysisReport("canonical_institutions", cols, rows)


def overlap_report(m: an.OverlapMatrix) -> AnalysisReport:
    cols = [Column("system")] + [Column(s, "int") for s in m.systems]
    rows = [(s,) + tuple(r) for s, r in zip(m.systems, m.counts)]
    return AnalysisReport("overlap", cols, rows)


def top_list_report(corpus, lists) -> AnalysisReport:
    cols = [Column("list"), Column("position", "int"), Column("canonical_id"), Column("name"),
            Column("country"), Column("value", "float"), Column("boundary_tie_warning", "bool")]
    rows = []
    for tl in lists:
        for pos, cid in enumerate(tl.ids, start=1):
            v = corpus.value(cid, tl.system_id, tl.indicator)
            v = v if isinstance(v, (int, float)) else None
            rows.append((tl.label, pos, cid, corpus.name(cid), corpus.country(cid), v,
                         tl.boundary_tie_warning))
    return AnalysisReport("top_lists", cols, rows)


def top_overlap_reports(result: an.TopOverlap):
    cols = [Column("list")] + [Column(label, "int") for label in result.labels]
    matrix = AnalysisReport("top_overlap", cols,
                            [(label,) + tuple(r) for label, r in zip(result.labels, result.pairwise)])
    summary = AnalysisReport("top_overlap_summary", [Column("metric"), Column("value", "int")],
                             [("lists", len(result.labels)), ("union", result.union_count),
                              ("in_all", result.all_count)])
    return matrix, summary


def unique_report(uniques) -> AnalysisReport:
    cols = [Column("list"), Column("canonical_id"), Column("name"), Column("country"),
            Column("status_elsewhere"), Column("unlinked_elsewhere", "int")]
    rows = []
    for u in uniques:
        for e in u.entries:
            status = ";".join(f"{k}={v}" for k, v in e.status.items())
            rows.append((u.label, e.canonical_id, e.name, e.country, status,
                         sum(1 for v in e.status.values() if v == "unlinked")))
    return AnalysisReport("unique_in_top", cols, rows)


def unique_country_report(uniques) -> AnalysisReport:
    cols = [Column("list"), Column("country"), Column("unique_count", "int")]
    rows = [(u.label, c, n) for u in uniques for c, n in u.country_tally]
    return AnalysisReport("unique_in_top_countries", cols, rows)


def preference_reports(table: an.PreferenceTable):
    full = AnalysisReport(
        "preference",
        [Column("country"), Column("system"), Column("n_institutions", "int"), Column("preference", "float")],
        [(c, s, table.counts[i][j], table.preference[i][j])
         for i, c in enumerate(table.countries) for j, s in enumerate(table.systems)])
    top = AnalysisReport(
        "preference_top",
        [Column("system"), Column("position", "int"), Column("country"), Column("n_institutions", "int"),
         Column("preference", "float")],
        [(s, pos, c, n, p) for s in table.systems
         for pos, (c, n, p) in enumerate(table.top.get(s, ()), start=1)])
    return full, top


def missing_reports(rep: an.MissingReport):
    cov = AnalysisReport(
        "coverage",
        [Column("system_id"), Column("indicator"), Column("present", "int"), Column("non_missing", "int"),
         Column("coverage", "float")],
        [(r.system_id, r.indicator, r.present, r.non_missing, r.coverage) for r in rep.coverage])
    inst = AnalysisReport(
        "institution_coverage",
        [Column("canonical_id"), Column("name"), Column("available", "int"), Column("applicable", "int")],
        rep.institutions)
    return cov, inst


def skew_report(rows, adjusted: bool) -> AnalysisReport:
    return AnalysisReport(
        "skewness",
        [Column("indicator"), Column("n", "int"), Column("skewness", "float"), Column("reason")],
        [(r.label, r.n, r.skewness, r.reason) for r in rows],
        {"estimator": "G1 (adjusted)" if adjusted else "b1"})


def class_share_report(shares, thresholds: ClassThresholds) -> AnalysisReport:
    labels = ("A", "B", "C", "D", "E", "missing")
    return AnalysisReport(
        "class_shares",
        [Column("indicator")] + [Column(f"share_{k}", "float") for k in labels],
        [(label,) + tuple(s[k] for k in labels) for label, s in shares],
        {"thresholds": list(thresholds.as_tuple())})


def correlation_report(matrix) -> AnalysisReport:
    cols = [Column("row"), Column("col"), Column("n", "int"), Column("rho", "float"),
            Column("p_value", "float"), Column("p_method"), Column("band"), Column("significant", "bool"),
            Column("reason")]
    rows = []
    for c in matrix.cells:
        r = c.result
        rows.append((c.row, c.col, c.n, r.rho if r else None, r.p_value if r else None,
                     r.p_method if r else None, r.band if r else None, c.significant, c.reason))
    return AnalysisReport("correlations", cols, rows, {"alpha": matrix.alpha, "min_n": matrix.min_n})


def country_corr_report(res: an.CountryCorrelations) -> AnalysisReport:
    cols = [Column("country"), Column("n", "int"), Column("rho", "float"), Column("p_value", "float"),
            Column("band"), Column("included", "bool"), Column("reason")]
    rows = [(c, r.n, r.rho, r.p_value, r.band, True, "") for c, r in res.results.items()]
    rows += [(c, n, None, None, None, False, why) for c, (n, why) in res.excluded.items()]
    rows.sort(key=lambda r: (not r[5], -(r[2] if r[2] is not None else 0.0), r[0]))
    return AnalysisReport("country_correlations", cols, rows,
                          {"a": res.a, "b": res.b, "min_n": res.min_n})


def discrepancy_report(d: an.DiscrepancyList, kind: str) -> AnalysisReport:
    cols = [Column("list"), Column("position", "int"), Column("canonical_id"), Column("name"),
            Column("country"), Column("pr_a", "float"), Column("pr_b", "float"), Column("diff", "float")]
    rows = [("top", i, e.canonical_id, e.name, e.country, e.pr_a, e.pr_b, e.diff)
            for i, e in enumerate(d.top, start=1)]
    rows += [("bottom", i, e.canonical_id, e.name, e.country, e.pr_a, e.pr_b, e.diff)
             for i, e in enumerate(d.bottom, start=1)]
    meta = {"a": d.a, "b": d.b, "k": d.k, "n_pairs": d.n_pairs}
    if d.warning:
        meta["warning"] = d.warning
    return AnalysisReport(kind, cols, rows, meta)


def points_report(points, kind: str) -> AnalysisReport:
    cols = [Column("canonical_id"), Column("name"), Column("country"), Column("x", "float"),
            Column("y", "float"), Column("labeled", "bool")]
    return AnalysisReport(kind, cols, [(p.canonical_id, p.name, p.country, p.x, p.y, p.labeled)
                                       for p in points])


# -- orchestration -----------------------------------------------------------

@dataclass
class PipelineResult:
    reports: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    corpus: Optional[LinkedCorpus] = None


class _Writer:
    """Collects outputs; nothing touches disk until the whole run succeeded."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.pending = {}

    def add(self, name: str, text: str):
        if name in self.pending:
            raise RankCompareError(f"duplicate output name {name}")
        self.pending[name] = text

    def commit(self) -> list:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        try:
            for name in sorted(self.pending):
                path = self.out_dir / name
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(self.pending[name])
                written.append(path)
        except OSError:
            for p in written:
                p.unlink(missing_ok=True)
            raise
        return written


def _derived_series(cfg: PipelineConfig, corpus: LinkedCorpus) -> dict:
    out = {}
    for d in cfg.derived:
        system, name = an.parse_ref(d["name"])
        fields = [an.resolve(corpus, f) for f in d["fields"]]
        s = teaching_score(fields, int(d.get("min_fields", 2)), name)
        out[d["name"]] = IndicatorSeries(system, name, s.values, s.kind, s.higher_is_better)
    return out


def _default_refs(corpus, derived):
    refs = [f"{m.system_id}:{i.name}" for m in corpus.systems for i in m.indicators]
    return refs + list(derived)


def run_pipeline(config: PipelineConfig, steps: Optional[Sequence[str]] = None) -> PipelineResult:
    """Run ``steps`` (default: ingest, link and every configured analysis)."""
    config.check_paths()
    if steps is None:
        selected = [s for s in ANALYSES if s in config.analyses] or \
            ["overlap", "geo", "missing", "skew", "corr"]
        steps = ["ingest", "link"] + selected
    bad = [s for s in steps if s not in STEPS]
    if bad:
        raise ConfigError(f"unknown step(s): {', '.join(bad)}")

    inputs = {}
    for d in config.datasets:
        inputs[d.manifest_ref] = _sha256(d.manifest)
        inputs[d.table_ref] = _sha256(d.table)
    for p, key in ((config.rules, "rules"), (config.thesaurus, "thesaurus")):
        if p is not None:
            inputs[config.source[key]] = _sha256(p)
    meta = {"config_sha256": config.config_hash(), "inputs": dict(sorted(inputs.items()))}

    writer = _Writer(config.output_dir)
    result = PipelineResult()
    ext = EXTENSIONS[config.format]

    def put(report: AnalysisReport, name: Optional[str] = None):
        report = report.with_metadata(**meta)
        result.reports[report.kind] = report
        writer.add(f"{name or report.kind}.{ext}", render(report, config.format))

    datasets = [load_dataset(d.manifest, d.table) for d in config.datasets]
    check_corpus(datasets)
    if "ingest" in steps:
        put(ingest_report(datasets))
    if any(s != "ingest" for s in steps):
        _link_and_analyse(config, steps, datasets, writer, result, put)

    manifest = {
        "config_sha256": meta["config_sha256"],
        "inputs": meta["inputs"],
        "outputs": {name: hashlib.sha256(text.encode("utf-8")).hexdigest()
                    for name, text in sorted(writer.pending.items())},
    }
    writer.add("manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    result.files = writer.commit()
    return result


def _link_and_analyse(config, steps, datasets, writer, result, put):
    rules = load_rules(config.rules)
    prior = Thesaurus.load(config.thesaurus) if config.thesaurus else None
    thesaurus, match = build_thesaurus(datasets, rules, prior, config.similarity_threshold)
    corpus = link(datasets, thesaurus, rules)
    result.corpus = corpus
    log.info("linked %d records into %d institutions", sum(len(d) for d in datasets),
             len(corpus.institutions))
    if "link" in steps:
        writer.add("thesaurus.tsv", thesaurus.to_tsv())
        writer.add("match_report.json", match.dumps())
        put(canonical_report(corpus))

    derived = _derived_series(config, corpus)

    def ref(r):
        return derived.get(r, r)

    a = config.analyses
    if "overlap" in steps:
        put(overlap_report(an.overlap_matrix(corpus)))
    if "top_overlap" in steps:
        opts = a.get("top_overlap", {})
        n = opts.get("top_n", 100)
        specs = opts.get("lists") or [f"{m.system_id}:{m.indicators[0].name}"
                                      for m in corpus.systems if m.indicators]
        lists = [an.build_top_list(corpus, *an.parse_ref(s), n) for s in specs]
        put(top_list_report(corpus, lists))
        if len(lists) >= 2:
            for r in top_overlap_reports(an.top_overlap(lists)):
                put(r)
            uniques = an.unique_in_top(lists, corpus)
            put(unique_report(uniques))
            put(unique_country_report(uniques))
    if "geo" in steps:
        opts = a.get("geo", {})
        for r in preference_reports(an.preference_table(corpus, opts.get("min_count", 10), opts.get("top", 5))):
            put(r)
    if "missing" in steps:
        for r in missing_reports(an.missing_report(corpus)):
            put(r)
    if "skew" in steps:
        opts = a.get("skew", {})
        adjusted = bool(opts.get("adjusted", True))
        refs = [ref(r) for r in (opts.get("indicators") or _default_refs(corpus, derived))]
        put(skew_report(an.skewness_report(corpus, refs, adjusted), adjusted))
        class_refs = opts.get("class_indicators")
        if class_refs is None:
            class_refs = [f"{m.system_id}:{i.name}" for m in corpus.systems for i in m.indicators
                          if i.kind != "rank"]
        if class_refs:
            shares = an.class_share_report(corpus, [ref(r) for r in class_refs], config.thresholds)
            put(class_share_report(shares, config.thresholds))
    if "corr" in steps:
        opts = a.get("corr", {})
        refs = opts.get("indicators") or _default_refs(corpus, derived)
        series = [an.resolve(corpus, ref(r)) for r in refs]
        if len(series) >= 2:
            put(correlation_report(correlation_matrix(series, opts.get("min_n", 3),
                                                      opts.get("alpha", 0.001),
                                                      opts.get("p_method", "auto"))))
    if "country_corr" in steps:
        opts = a.get("country_corr")
        if not opts or "a" not in opts or "b" not in opts:
            raise ConfigError("country_corr needs indicator references 'a' and 'b'")
        res = an.per_country_correlation(corpus, ref(opts["a"]), ref(opts["b"]),
                                         opts.get("min_n", 11), opts.get("p_method", "auto"))
        put(country_corr_report(res))
        for country in opts.get("scatter_countries", []):
            pts = an.scatter_data(corpus, ref(opts["a"]), ref(opts["b"]), [country],
                                  label_rule="all")
            writer.add(f"country_scatter_{_safe(country)}.svg",
                       scatter_svg(pts, res.a, res.b, f"{res.b} vs {res.a}, {country}"))
    if "compare_pair" in steps:
        items = a.get("compare_pair")
        if not items:
            raise ConfigError("compare_pair needs at least one {'a', 'b'} entry")
        for i, item in enumerate(items, start=1):
            if "a" not in item or "b" not in item:
                raise ConfigError(f"compare_pair[{i - 1}] needs 'a' and 'b'")
            k = item.get("k", 20)
            countries = item.get("countries")
            d = an.discrepancy_lists(corpus, ref(item["a"]), ref(item["b"]), k, countries,
                                     config.percentile_method)
            kind = f"discrepancy_{i}"
            put(discrepancy_report(d, kind))
            pts = an.scatter_data(corpus, ref(item["a"]), ref(item["b"]), countries, label_rule=k,
                                  percentile=True, method=config.percentile_method)
            title = f"{d.b} vs {d.a} (percentile ranks)"
            writer.add(f"scatter_{i}.svg", scatter_svg(pts, d.a, d.b, title))
            if item.get("points"):
                put(points_report(pts, f"points_{i}"))
