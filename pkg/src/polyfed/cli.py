"""Command line interface.

The CLI works against a catalog file on disk so commands compose across
processes: ``polyfed load`` ingests a fixture directory and saves the
catalog, ``polyfed query`` re-opens it (store data files are reloaded from
the data directory remembered inside the catalog) and runs one query.

Catalog path resolution: ``--catalog`` flag, then the POLYFED_CATALOG
environment variable, then ``./polyfed.catalog``.

Exit codes: 0 success, 1 usage, 2 query parse/validation problems,
3 execution or I/O failures.
"""

from __future__ import annotations

import os
import sys

import click

from .bench import run_benchmark
from .catalog import NodeKind
from .errors import (
    ParseError,
    PolyfedError,
    UnknownAttribute,
    UnknownEntity,
    UnknownWorkflow,
)
from .planner import plan, render_sql
from .query import parse, validate
from .workspace import Workspace

__all__ = ["cli", "main"]

DEFAULT_CATALOG = "polyfed.catalog"


def _catalog_path(explicit: str | None) -> str:
    return explicit or os.environ.get("POLYFED_CATALOG") or DEFAULT_CATALOG


@click.group()
def cli():
    """Federated queries over polystore schemas and workflow provenance."""


@cli.command()
@click.argument("fixture_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--catalog", "catalog_path", default=None, help="Catalog file to write.")
def load(fixture_dir, catalog_path):
    """Ingest a fixture directory and persist the catalog."""
    ws = Workspace.from_fixture_dir(fixture_dir)
    path = _catalog_path(catalog_path)
    ws.save(path)
    workflows = len(ws.catalog.nodes(NodeKind.WORKFLOW))
    click.echo(
        f"loaded {fixture_dir}: {len(ws.registry.gcs_entities())} entities, "
        f"{len(ws.registry.stores())} stores, {workflows} workflows -> {path}"
    )


@cli.command()
@click.argument("query_text", required=False)
@click.option(
    "-e",
    "--explain",
    is_flag=True,
    help="Print the federated SQL instead of executing.",
)
@click.option("--catalog", "catalog_path", default=None, help="Catalog file to read.")
def query(query_text, explain, catalog_path):
    """Run one query, from the argument or stdin."""
    text = query_text if query_text is not None else sys.stdin.read()
    ws = Workspace.load(_catalog_path(catalog_path))
    if explain:
        parsed = parse(text)
        validate(parsed, ws.registry, ws.recorder)
        click.echo(render_sql(plan(parsed, ws.registry, ws.recorder)))
        return
    result = ws.run(text)
    click.echo("\t".join(result.columns))
    for row in result.rows:
        click.echo("\t".join(str(value) for value in row))


@cli.command()
@click.option("--catalog", "catalog_path", default=None, help="Catalog file to read.")
def shell(catalog_path):
    """Line-oriented query loop; 'exit', 'quit', or EOF ends it."""
    ws = Workspace.load(_catalog_path(catalog_path))
    click.echo("one query per line; exit with 'quit'")
    while True:
        try:
            line = input("polyfed> ")
        except EOFError:
            break
        line = line.strip()
        if not line:
            continue
        if line in ("quit", "exit", r"\q"):
            break
        try:
            result = ws.run(line)
        except PolyfedError as exc:
            click.echo(f"error: {exc}", err=True)
            continue
        click.echo("\t".join(result.columns))
        for row in result.rows:
            click.echo("\t".join(str(value) for value in row))
        click.echo(f"({len(result.rows)} rows)")


@cli.command()
@click.option(
    "--batches",
    default="1,10,50,100",
    show_default=True,
    help="Comma-separated batch counts.",
)
@click.option("--runs", default=5, show_default=True, type=int, help="Timed runs per point.")
@click.option("--warmup", default=3, show_default=True, type=int, help="Discarded runs per point.")
@click.option("--sleep", "sleep_between", is_flag=True, help="Sleep 1s between timed runs.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option(
    "--csv",
    "csv_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Also write the report as a CSV data file.",
)
def bench(batches, runs, warmup, sleep_between, seed, csv_path):
    """Run the batch/timing benchmark and print the report."""
    try:
        counts = [int(part) for part in batches.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError("--batches wants comma-separated integers")
    try:
        report = run_benchmark(
            counts, runs, warmup=warmup, sleep_between=sleep_between, seed=seed
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    for line in report.report_lines():
        click.echo(line)
    if csv_path:
        report.write_csv(csv_path)
        click.echo(f"wrote {csv_path}", err=True)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--catalog", "catalog_path", default=None, help="Catalog persistence path.")
def serve(host, port, catalog_path):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(catalog_path=_catalog_path(catalog_path))
    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ParseError, UnknownEntity, UnknownAttribute, UnknownWorkflow) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except PolyfedError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
