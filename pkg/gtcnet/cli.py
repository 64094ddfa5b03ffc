# gtcnet/cli.py
"""Batch commands: count, table, verify, sample, report, corpus, cache-clear."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import click
from flask import current_app
from flask.cli import with_appcontext

from gtcnet import analysis, tables
from gtcnet.engine import gtc_totals
from gtcnet.middleware import handles_domain_errors
from gtcnet.newick import serialize
from gtcnet.oracle import KINDS, labelled_corpus, oracle_counts
from gtcnet.sampler import batch_header, sample_batch
from gtcnet.utils import atomic_write, csv_text, dumps
from gtcnet.verify import run_verification

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "newick")
REPORT_KINDS = ("asymptotics", "bounds", "limits", "moments")


# ================================
# RUN CONFIG
# ================================


@dataclass
class RunConfig:
    command: str
    max_n: Optional[int] = None
    trivariate_cap: Optional[int] = None
    seed: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"
    tolerances: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_options(cls, command: str, tolerance: Sequence[str] = (), **options) -> "RunConfig":
        allowed = tuple(current_app.config["TOLERANCES"])
        parsed: Dict[str, float] = {}
        for item in tolerance:
            key, sep, value = item.partition("=")
            if not sep:
                raise click.BadParameter(f"expected key=value, got {item!r}", param_hint="--tolerance")
            if key not in allowed:
                raise click.BadParameter(f"unknown tolerance {key!r}; known: {', '.join(allowed)}",
                                         param_hint="--tolerance")
            try:
                parsed[key] = float(value)
            except ValueError:
                raise click.BadParameter(f"{key} needs a number, got {value!r}", param_hint="--tolerance") from None
        for cap in ("max_n", "trivariate_cap"):
            if options.get(cap) is not None and options[cap] < 1:
                raise click.BadParameter(f"{cap} must be positive", param_hint=f"--{cap.replace('_', '-')}")
        seed = options.get("seed")
        if seed is None and current_app.config.get("DEFAULT_SEED") not in (None, ""):
            seed = int(current_app.config["DEFAULT_SEED"])
        return cls(command, options.get("max_n"), options.get("trivariate_cap"), seed,
                   options.get("output"), options.get("format") or "csv", parsed)


def parse_grid(text: str) -> List[int]:
    """``1:10`` (inclusive), ``1:10:3`` or ``50,100,200``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            grid = list(range(start, stop + 1, step))
        else:
            grid = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot read grid {text!r}", param_hint="--grid") from None
    if not grid or min(grid) < 1:
        raise click.BadParameter("grid needs sizes >= 1", param_hint="--grid")
    return grid


def emit(text: str, run: RunConfig) -> None:
    if run.output:
        atomic_write(run.output, text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _check_cap(n: int, key: str = "BIVARIATE_CAP") -> None:
    from gtcnet.exceptions import CapExceededError
    cap = int(current_app.config[key])
    if n > cap:
        raise CapExceededError(f"n={n} is above the cap {cap}", limit=cap, requested=n, hint=f"raise GTC_{key}")


# ================================
# COMMANDS
# ================================


@click.command("count")
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Network size.")
@click.option("--k", "k", type=click.IntRange(min=0), default=None, help="Only networks with k reticulations.")
@with_appcontext
@handles_domain_errors
def count_command(n: int, k: Optional[int]):
    """Print GTC_n (or GTC_{n,k})."""
    _check_cap(n)
    if k is None:
        click.echo(str(gtc_totals(n)[-1]))
    else:
        click.echo(str(tables.get_table(n, max_k=k).cell(n, k)))


@click.command("table")
@click.option("--max-n", type=int, required=True)
@click.option("--by", "by", type=click.Choice(["k", "k_i"]), default="k", show_default=True)
@click.option("--max-i", type=click.IntRange(min=0), default=None, help="Truncate the i index (k_i only).")
@click.option("--trivariate-cap", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@with_appcontext
@handles_domain_errors
def table_command(max_n: int, by: str, max_i: Optional[int], trivariate_cap: Optional[int], fmt: str,
                  output: Optional[str]):
    """Write the triangular count table."""
    run = RunConfig.from_options("table", max_n=max_n, trivariate_cap=trivariate_cap, output=output, format=fmt)
    table = tables.get_table(run.max_n, with_i=by == "k_i", max_i=max_i, trivariate_cap=run.trivariate_cap)
    emit(table.to_csv() if run.format == "csv" else dumps(table.to_dict()), run)


@click.command("verify")
@click.option("--level", type=click.Choice(["fast", "full"]), default="fast", show_default=True)
@click.option("--tolerance", multiple=True, metavar="KEY=VALUE", help="Override a trend tolerance.")
@click.option("--only", multiple=True, help="Run only the named criteria.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@with_appcontext
@handles_domain_errors
def verify_command(level: str, tolerance: Tuple[str, ...], only: Tuple[str, ...], output: Optional[str]):
    """Run the acceptance suite; exit 0 iff every criterion passes."""
    run = RunConfig.from_options("verify", tolerance=tolerance, output=output, format="json")
    report = run_verification(level, current_app.config, run.tolerances, only=only or None)
    emit(dumps(report.to_dict()) + "\n", run)
    if not report.passed:
        logger.warning(f"⚠️ Verification failed: {', '.join(report.failed)}")
        raise click.exceptions.Exit(1)


@click.command("sample")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--count", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["newick", "json"]), default="newick", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@with_appcontext
@handles_domain_errors
def sample_command(n: int, count: int, seed: Optional[int], fmt: str, output: Optional[str]):
    """Draw uniform random galled tree-child networks."""
    _check_cap(n)
    run = RunConfig.from_options("sample", max_n=n, seed=seed, output=output, format=fmt)
    records = [serialize(net, run.format) for net in sample_batch(n, count, run.seed)]
    lines = records
    if run.output:
        lines = [batch_header(n, run.seed, tables.table_version())] + records
    emit("\n".join(lines) + "\n", run)


@click.command("report")
@click.option("--kind", type=click.Choice(REPORT_KINDS), required=True)
@click.option("--grid", required=True, help="Sizes, e.g. 1:10 or 50,100,200.")
@click.option("--formula", multiple=True, help="Asymptotic formulas to report (asymptotics only).")
@click.option("--k", "k", type=click.IntRange(min=0), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@with_appcontext
@handles_domain_errors
def report_command(kind: str, grid: str, formula: Tuple[str, ...], k: Optional[int], fmt: str,
                   output: Optional[str]):
    """Convergence, bounds and limit-law reports along an n-grid."""
    sizes = parse_grid(grid)
    _check_cap(max(sizes))
    run = RunConfig.from_options("report", max_n=max(sizes), output=output, format=fmt)
    tol = current_app.config["TOLERANCES"]
    if kind == "bounds":
        report = analysis.sandwich_check(max(sizes), raise_on_failure=False)
        report.rows = [row for row in report.rows if row.n in set(sizes)]
        emit(report.to_csv() if run.format == "csv" else dumps(report.to_dict()), run)
        return
    if kind == "asymptotics":
        reports = []
        for name in formula or ("gtc_total",):
            exact = analysis.exact_values(name, sizes, k=k)
            reports.append(analysis.convergence_report(name, exact, sizes, k=k,
                                                       tolerance=tol["growth_deviation_max"]))
    elif kind == "moments":
        reports = analysis.moment_report(sizes, tol["mean_offset_max"], tol["variance_deviation_max"])
    else:
        _check_cap(max(sizes), "TRIVARIATE_CAP")
        i_cap = current_app.config["I_MARKER_CAP"]
        reports = analysis.limit_law_report(
            sizes, bivariate=tables.get_table(max(sizes)),
            joint=tables.get_table(max(sizes), with_i=True, max_i=i_cap),
            trivariate_cap=current_app.config["TRIVARIATE_CAP"], max_i=i_cap)
    if run.format == "csv":
        emit(analysis.reports_csv(reports), run)
    else:
        emit(dumps([r.to_dict() for r in reports]), run)


@click.command("corpus")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--kind", type=click.Choice(KINDS), default="gtc", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["newick", "json", "csv"]), default="newick", show_default=True,
              help="csv writes the n,k,i,count summary instead of the networks.")
@click.option("--long", "long_run", is_flag=True, help="Allow n = 5 (slow).")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@with_appcontext
@handles_domain_errors
def corpus_command(n: int, kind: str, fmt: str, long_run: bool, output: Optional[str]):
    """Export the exhaustive oracle corpus."""
    run = RunConfig.from_options("corpus", max_n=n, output=output, format=fmt)
    if run.format == "csv":
        counts = oracle_counts(n, kind, long_run=long_run)
        emit(csv_text(["n", "k", "i", "count"], [(n, k, i, c) for (k, i), c in counts.items()]), run)
        return
    nets = labelled_corpus(n, kind, long_run=long_run)
    emit("\n".join(serialize(net, run.format) for net in nets) + "\n", run)


@click.command("cache-clear")
@with_appcontext
@handles_domain_errors
def cache_clear_command():
    """Drop every cached table."""
    tables.clear()
    click.echo("cache cleared")


COMMANDS = (
    count_command, table_command, verify_command, sample_command, report_command, corpus_command,
    cache_clear_command,
)


def register_commands(app):
    for command in COMMANDS:
        app.cli.add_command(command)
