"""Operator CLI: ingest, analyze, query, stats, serve, export.

Exit codes: 0 success, 1 operational failure, 2 usage error. Environment
variables (SMAC_STORE, SMAC_BIND, SMAC_MAX_ROWS, SMAC_CORS_ORIGIN)
override the corresponding flags. Data goes to stdout, diagnostics to
stderr.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click

from . import api, ingest as ingest_mod, query as query_mod, store as store_mod
from .metrics import InvalidEncoding, analyze

CSV_HEADER = ["file", "pragma", "sloc", "functions", "events", "modifiers",
              "payable", "mapping", "addressVars"]


def _env_or(flag_value, env_name):
    return os.environ.get(env_name, flag_value)


def _open_store(path) -> store_mod.CorpusStore:
    if path is None:
        raise click.UsageError("--store is required (or set SMAC_STORE)")
    return store_mod.CorpusStore(path)


def _make_explorer(spec: str) -> ingest_mod.ExplorerClient:
    if spec.startswith("fixture:"):
        return ingest_mod.FixtureExplorer(spec[len("fixture:"):])
    return ingest_mod.HttpExplorer(spec)


@click.group()
def main():
    """Smart-contract corpus toolkit."""


@main.command("ingest")
@click.option("--store", "store_path", default=None)
@click.option("--explorer", required=True, help="base URL or fixture:DIR")
@click.option("--from-block", type=int, required=True)
@click.option("--to-block", type=int, required=True)
@click.option("--rate", type=float, default=2.0, show_default=True,
              help="max explorer requests per second")
@click.option("--daily-cap", type=int, default=None,
              help="max explorer requests per UTC day")
def ingest_cmd(store_path, explorer, from_block, to_block, rate, daily_cap):
    """Scan a block range and store verified contracts."""
    store_path = _env_or(store_path, "SMAC_STORE")
    if from_block > to_block:
        raise click.UsageError("--from-block must not exceed --to-block")
    store = _open_store(store_path)
    throttle = ingest_mod.Throttle(ingest_mod.RateLimit(rate, daily_cap))
    try:
        report = ingest_mod.scan_blocks(_make_explorer(explorer),
                                        from_block, to_block, throttle, store)
    except store_mod.StorageFailure as exc:
        click.echo(f"storage failure: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(report.to_dict(), indent=2))


@main.command("analyze")
@click.argument("paths", nargs=-1, required=True,
                type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
def analyze_cmd(paths, fmt):
    """Print one intrinsic-metric record per source file."""
    records, failed = [], False
    for path in paths:
        try:
            vector = analyze(path.read_bytes())
        except (InvalidEncoding, OSError) as exc:
            click.echo(f"{path}: {exc}", err=True)
            failed = True
            continue
        records.append({"file": str(path), **vector.to_dict()})
    if fmt == "csv":
        writer = csv.DictWriter(sys.stdout, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(records)
    else:
        click.echo(json.dumps(records, indent=2))
    if failed:
        sys.exit(1)


@main.command("query")
@click.argument("query_text")
@click.option("--store", "store_path", default=None)
@click.option("--var", "variables", multiple=True, metavar="NAME=VALUE")
def query_cmd(query_text, store_path, variables):
    """Run a metrics query; prints the same envelope as POST /graphql."""
    store = _open_store(_env_or(store_path, "SMAC_STORE"))
    bindings = {}
    for item in variables:
        name, sep, raw = item.partition("=")
        if not sep:
            raise click.UsageError(f"--var needs NAME=VALUE, got {item!r}")
        try:
            bindings[name] = json.loads(raw)
        except ValueError:
            bindings[name] = raw
    envelope = query_mod.run_request(store, query_text, bindings)
    click.echo(query_mod.render_response(envelope))
    if "errors" in envelope:
        for err in envelope["errors"]:
            click.echo(err["message"], err=True)
        sys.exit(1)


@main.command("stats")
@click.option("--store", "store_path", default=None)
def stats_cmd(store_path):
    """Print per-day ingest counts."""
    store = _open_store(_env_or(store_path, "SMAC_STORE"))
    click.echo(json.dumps(api.daily_counts_payload(store), indent=2))


@main.command("serve")
@click.option("--store", "store_path", default=None)
@click.option("--bind", default="127.0.0.1:8080", show_default=True)
@click.option("--max-rows", type=int, default=1000, show_default=True)
@click.option("--cors-origin", default="*", show_default=True)
def serve_cmd(store_path, bind, max_rows, cors_origin):
    """Serve the HTTP API until interrupted."""
    import uvicorn

    config = api.ServiceConfig.from_env(
        store_path=_env_or(store_path, "SMAC_STORE"),
        bind_address=bind, max_result_rows=max_rows,
        cors_allowed_origin=cors_origin)
    if config.store_path is None:
        raise click.UsageError("--store is required (or set SMAC_STORE)")
    app = api.create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


@main.command("export")
@click.option("--store", "store_path", default=None)
@click.option("--addresses", "addresses_file", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="file with one contract address per line")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def export_cmd(store_path, addresses_file, out_dir):
    """Materialize artifacts + metadata for listed addresses (shard layout)."""
    store = _open_store(_env_or(store_path, "SMAC_STORE"))
    out_dir.mkdir(parents=True, exist_ok=True)
    missing = []
    for line in addresses_file.read_text().splitlines():
        raw = line.strip()
        if not raw:
            continue
        try:
            address = store_mod.normalize_address(raw)
            doc, artifacts = store.get(address)
        except (store_mod.BadAddress, store_mod.NotFound):
            missing.append(raw)
            continue
        contents = {"sol": artifacts.source, "abi": artifacts.abi,
                    "bytecode": artifacts.bytecode}
        for extension in store_mod.ARTIFACT_EXTENSIONS:
            target = out_dir / store_mod.shard_path(address, extension)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(contents[extension], encoding="utf-8")
        meta = out_dir / "meta" / f"{address}.json"
        meta.parent.mkdir(parents=True, exist_ok=True)
        meta.write_text(json.dumps(doc.to_dict(), indent=2))
    if missing:
        for raw in missing:
            click.echo(f"missing: {raw}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
