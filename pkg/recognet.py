import functools
import sys

import click

from endpoints.inference import SOLVERS, load_document, run_comparison, run_inference
from services.net_core_service import net_core_service
from utils.console import info
from utils.errors import RecognetError
from utils.report_format import ReportFormat

FORMATS = click.Choice(["text", "records"])


def handle_errors(command):
    """Every domain error exits 1 with a single `error=<CODE> message=...` line."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except RecognetError as e:
            click.echo(e.one_line(), err=True)
            sys.exit(1)

    return wrapper


def emit(report, output_format: str) -> None:
    if output_format == "records":
        click.echo(ReportFormat.to_records(report), nl=False)
    else:
        click.echo(ReportFormat.to_text(report), nl=False)


@click.group()
def recognet():
    """Inference for discrete recognition nets."""


@recognet.command()
@click.argument("path", type=click.Path(dir_okay=False))
@handle_errors
def validate(path):
    doc = load_document(path)
    structure = net_core_service.classify_structure(doc.net).value
    info(f"✅ {path}: {len(doc.net.nodes)} nodes, {len(doc.net.arcs)} arcs")
    click.echo(f"valid structure={structure}")


@recognet.command()
@click.argument("path", type=click.Path(dir_okay=False))
@handle_errors
def classify(path):
    doc = load_document(path)
    click.echo(net_core_service.classify_structure(doc.net).value)


@recognet.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--solver", "-s", type=click.Choice(SOLVERS + ("auto",)), default="auto", show_default=True)
@click.option("--query", "-q", "queries", multiple=True, help="Node to report; repeatable.")
@click.option("--orientation", type=click.Choice(["literal", "explicit"]), default="literal", show_default=True)
@click.option("--format", "output_format", type=FORMATS, default="text", show_default=True)
@handle_errors
def infer(path, solver, queries, orientation, output_format):
    doc = load_document(path)
    info(f"🔧 Running solver '{solver}' on {path}")
    emit(run_inference(doc, solver, queries, orientation), output_format)


@recognet.command()
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--solvers", required=True, help="Comma-separated solver names, e.g. eigen,exact.")
@click.option("--query", "-q", "queries", multiple=True, help="Node to compare; repeatable.")
@click.option("--orientation", type=click.Choice(["literal", "explicit"]), default="literal", show_default=True)
@click.option("--format", "output_format", type=FORMATS, default="text", show_default=True)
@handle_errors
def compare(path, solvers, queries, orientation, output_format):
    names = [s.strip() for s in solvers.split(",") if s.strip()]
    doc = load_document(path)
    info(f"🔧 Comparing {', '.join(names)} on {path}")
    emit(run_comparison(doc, names, queries, orientation), output_format)


if __name__ == "__main__":
    recognet()
