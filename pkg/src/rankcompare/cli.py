"""Command-line entry point: ``rankcompare <subcommand> --config cfg.json``.

Exit codes: 0 ok, 1 analysis or data error, 2 usage/config error, 3 I/O error.
Failures print one JSON line ``{"error", "module", "message"}`` on stderr.
"""

from __future__ import annotations

import json
import logging
import sys
from importlib import resources
from pathlib import Path

import click

from .errors import ConfigError, RankCompareError
from .pipeline import PipelineConfig, run_pipeline
from .report import FORMATS, AnalysisReport, Column, emit_table

EXIT_OK, EXIT_ANALYSIS, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _fail(kind: str, module: str, message: str, code: int):
    line = json.dumps({"error": kind, "module": module, "message": message}, ensure_ascii=False)
    click.echo(line, err=True)
    sys.exit(code)


def _load(config, out, fmt, **overrides) -> PipelineConfig:
    cfg = PipelineConfig.load(config)
    return cfg.with_overrides(output_dir=out, fmt=fmt, **overrides)


def _report_summary(result):
    for path in result.files:
        click.echo(str(path))


def common(func):
    func = click.option("--format", "fmt", type=click.Choice(FORMATS),
                        help="Table format (default from config).")(func)
    func = click.option("--out", type=click.Path(file_okay=False),
                        help="Output directory (default from config).")(func)
    func = click.option("--config", required=True, type=click.Path(dir_okay=False),
                        help="Pipeline config JSON.")(func)
    return func


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Compare university ranking systems: link institutions, run analyses, emit reports."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


def _simple(name, steps, help_text):
    @cli.command(name, help=help_text)
    @common
    def cmd(config, out, fmt):
        _report_summary(run_pipeline(_load(config, out, fmt), steps))
    return cmd


_simple("ingest-check", ["ingest"], "Parse and validate every dataset; write a summary.")
_simple("link", ["link"], "Build the thesaurus, match report and canonical table.")
_simple("overlap", ["overlap"], "Pairwise institution overlap between systems.")
_simple("geo", ["geo"], "Country preference ratios per system.")
_simple("missing", ["missing"], "Indicator coverage and per-institution availability.")
_simple("skew", ["skew"], "Skewness and distance-to-median class shares.")
_simple("report-all", None, "Run every analysis selected in the config.")


@cli.command("top-overlap")
@common
@click.option("--top-n", type=int, help="List length N.")
def top_overlap_cmd(config, out, fmt, top_n):
    """Overlap of top-N lists and institutions unique to one list."""
    _report_summary(run_pipeline(_load(config, out, fmt, top_n=top_n), ["top_overlap"]))


@cli.command("corr")
@common
@click.option("--min-n", type=int, help="Minimum pairwise-complete n per cell.")
@click.option("--alpha", type=float, help="Significance level for flagging.")
def corr_cmd(config, out, fmt, min_n, alpha):
    """Spearman correlation matrix across indicators."""
    _report_summary(run_pipeline(_load(config, out, fmt, min_n=min_n, alpha=alpha), ["corr"]))


def _pair_override(cfg: PipelineConfig, section: str, a, b, many: bool) -> PipelineConfig:
    if a is None and b is None:
        return cfg
    if a is None or b is None:
        raise ConfigError("--a and --b must be given together")
    analyses = dict(cfg.analyses)
    if many:
        analyses[section] = [{"a": a, "b": b}]
    else:
        analyses[section] = {**analyses.get(section, {}), "a": a, "b": b}
    return cfg.with_analyses(analyses)


@cli.command("country-corr")
@common
@click.option("--min-n", type=int, help="Minimum institutions per country.")
@click.option("--a", "ind_a", help="First indicator, SYSTEM:name.")
@click.option("--b", "ind_b", help="Second indicator, SYSTEM:name.")
def country_corr_cmd(config, out, fmt, min_n, ind_a, ind_b):
    """Per-country Spearman correlation of one indicator pair, plus scatterplots."""
    cfg = _pair_override(_load(config, out, fmt), "country_corr", ind_a, ind_b, many=False)
    cfg = cfg.with_overrides(min_n=min_n)
    _report_summary(run_pipeline(cfg, ["country_corr"]))


@cli.command("compare-pair")
@common
@click.option("--k", type=int, help="Length of the top and bottom discrepancy lists.")
@click.option("--a", "ind_a", help="First indicator, SYSTEM:name.")
@click.option("--b", "ind_b", help="Second indicator, SYSTEM:name.")
@click.option("--points-out", type=click.Path(dir_okay=False),
              help="Also write all scatter points as CSV to this file.")
def compare_pair_cmd(config, out, fmt, k, ind_a, ind_b, points_out):
    """Percentile-rank scatter and top/bottom-k discrepancy lists per pair."""
    cfg = _pair_override(_load(config, out, fmt), "compare_pair", ind_a, ind_b, many=True)
    cfg = cfg.with_overrides(k=k)
    if points_out:
        analyses = json.loads(json.dumps(cfg.analyses))
        for item in analyses.get("compare_pair", []):
            item["points"] = True
        cfg = cfg.with_analyses(analyses)
    result = run_pipeline(cfg, ["compare_pair"])
    if points_out:
        rows, columns = [], None
        for i in range(1, len(cfg.analyses["compare_pair"]) + 1):
            rep = result.reports[f"points_{i}"]
            columns = (Column("pair", "int"),) + rep.columns
            rows.extend((i,) + r for r in rep.rows)
        emit_table(AnalysisReport("points", columns or (Column("pair", "int"),), rows), "csv", points_out)
    _report_summary(result)


@cli.command("synth")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=2016, show_default=True,
              help="RNG seed.")
@click.option("--spec", "spec_path", type=click.Path(dir_okay=False),
              help="Synthetic spec JSON (default: bundled five-system spec).")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
def synth_cmd(seed, spec_path, out):
    """Generate a seeded synthetic corpus and a matching config.json."""
    from .synthetic import SyntheticSpec, generate_synthetic, write_corpus

    data = resources.files("rankcompare") / "data"
    if spec_path:
        if not Path(spec_path).is_file():
            raise ConfigError(f"spec file not found: {spec_path}")
        spec = SyntheticSpec.load(spec_path)
    else:
        spec = SyntheticSpec.from_json(json.loads((data / "synthetic_spec.json").read_text("utf-8")))
    corpus = generate_synthetic(seed, spec)
    out_dir = Path(out)
    paths = write_corpus(corpus.datasets, out_dir)
    if spec_path:
        cfg = {"datasets": [{"manifest": m.name, "table": t.name} for m, t in paths],
               "output_dir": "out", "analyses": {"overlap": {}, "geo": {}, "missing": {}, "skew": {}}}
    else:
        cfg = json.loads((data / "synthetic_config.json").read_text("utf-8"))
    cfg_path = out_dir / "config.json"
    cfg_path.write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
    for m, t in paths:
        click.echo(str(m))
        click.echo(str(t))
    click.echo(str(cfg_path))


def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="rankcompare", standalone_mode=False)
    except click.exceptions.Abort:
        _fail("Abort", "cli_report", "aborted", EXIT_USAGE)
    except click.ClickException as exc:
        _fail(type(exc).__name__, "cli_report", exc.format_message(), EXIT_USAGE)
    except ConfigError as exc:
        _fail(type(exc).__name__, exc.module, str(exc), EXIT_USAGE)
    except RankCompareError as exc:
        _fail(type(exc).__name__, exc.module, str(exc), EXIT_ANALYSIS)
    except OSError as exc:
        _fail(type(exc).__name__, "cli_report", str(exc), EXIT_IO)
    sys.exit(rv if isinstance(rv, int) else EXIT_OK)


if __name__ == "__main__":
    main()
