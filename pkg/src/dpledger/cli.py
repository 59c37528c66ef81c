"""Operator entry points: serve, ingest-check, query, audit, experiments.

Exit codes: 2 bad configuration or dataset, 3 listen port unavailable,
4 unknown query type (one-shot query), 5 insufficient budget (one-shot
query), 1 any other failure.
"""

from __future__ import annotations

import json
import socket
import sys

import click

from . import accountant, experiment
from .dp_core import _log_term
from .errors import DpLedgerError, StorageError
from .ledger import Ledger, verify_file
from .service import build_registry, build_service, load_config, load_dataset

# Agreement required between the summed per-record charges and the loss
# recomputed from the ledger structure.
AUDIT_RTOL = 1e-9


@click.group()
def main():
    """Privacy-budget query service with noise reuse and a hash-chained ledger."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def serve(config_path: str):
    """Run the HTTP service described by a YAML config file."""
    import uvicorn

    from .webapp import create_app

    try:
        config = load_config(config_path)
        service = build_service(config)
    except DpLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((config.listen_host, config.listen_port))
    except OSError as exc:
        click.echo(
            f"error: cannot listen on {config.listen_host}:{config.listen_port}: {exc}",
            err=True,
        )
        sys.exit(3)
    finally:
        probe.close()

    app = create_app(service)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")


@main.command("ingest-check")
@click.option("--config", "config_path", required=True, type=click.Path())
def ingest_check(config_path: str):
    """Validate the configured CSV against its schema and print a summary."""
    try:
        config = load_config(config_path)
        dataset = load_dataset(config)
        registry = build_registry(config, dataset)
    except DpLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"rows: {dataset.row_count}")
    click.echo(f"content_hash: {dataset.content_hash.hex()}")
    for spec in registry.specs():
        click.echo(f"query type {spec.name}: sensitivity {spec.sensitivity!r}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--runs", type=int, default=1, show_default=True)
def simulate(config_path: str, out_path: str, seed: int | None, runs: int):
    """Compare reuse answering against the naive baseline on a sampled stream."""
    try:
        config = experiment.load_sim_config(config_path)
        results = experiment.run_experiment(config, runs, seed=seed)
    except DpLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    experiment.write_simulation_csv(results, out_path)
    summary = experiment.summarize(results)
    click.echo(json.dumps(summary, indent=2))


@main.command("utility-sweep")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--delta", type=float, default=1e-5, show_default=True)
@click.option("--eps-min", type=float, default=1.0, show_default=True)
@click.option("--eps-max", type=float, default=8.0, show_default=True)
@click.option("--steps", type=int, default=71, show_default=True)
def utility_sweep(
    config_path: str,
    out_path: str,
    delta: float,
    eps_min: float,
    eps_max: float,
    steps: int,
):
    """Tabulate noise scale and accuracy half-width per query type over epsilon."""
    try:
        config = load_config(config_path)
        dataset = load_dataset(config)
        registry = build_registry(config, dataset)
        header, rows = experiment.utility_sweep_rows(
            registry.specs(), delta, eps_min, eps_max, steps
        )
    except DpLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    experiment.write_utility_csv(header, rows, out_path)
    click.echo(f"wrote {len(rows)} rows to {out_path}")


@main.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path())
@click.option("--config", "config_path", required=True, type=click.Path())
def audit(ledger_path: str, config_path: str):
    """Verify the record chain and cross-check charges against a replay."""
    try:
        config = load_config(config_path)
        dataset = load_dataset(config)
        registry = build_registry(config, dataset)
    except DpLedgerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    verdict = verify_file(ledger_path)
    if not verdict.ok:
        click.echo(f"chain verification FAILED at record {verdict.first_bad_index}")
        sys.exit(1)
    click.echo("chain verification ok")

    try:
        ledger = Ledger(ledger_path)
    except StorageError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    records = [r for r in ledger if r.dataset_hash == dataset.content_hash]
    foreign = len(ledger) - len(records)
    if foreign:
        click.echo(f"note: {foreign} records belong to a different dataset")

    sensitivities = {s.name: s.sensitivity for s in registry.specs()}
    try:
        loss = accountant.total_loss_variance_ours(records, sensitivities)
    except DpLedgerError as exc:
        click.echo(f"history replay FAILED: {exc}")
        sys.exit(1)
    charged = sum(r.eps_squared_cost for r in records)
    expected = _log_term(config.delta_budget) * loss
    scale = max(abs(charged), abs(expected), 1.0)
    click.echo(f"charged eps^2 total:    {charged!r}")
    click.echo(f"recomputed eps^2 total: {expected!r}")
    if abs(charged - expected) > AUDIT_RTOL * scale:
        click.echo("accounting consistency FAILED")
        sys.exit(1)
    remaining = config.epsilon_budget**2 - charged
    click.echo(f"accounting consistency ok; remaining eps^2: {remaining!r}")


@main.command()
@click.option("--url", required=True)
@click.option("--type", "query_type", required=True)
@click.option("--epsilon", "--eps", type=float, required=True)
@click.option("--delta", type=float, required=True)
@click.option("--sigma", type=float, default=None)
def query(url: str, query_type: str, epsilon: float, delta: float, sigma: float | None):
    """Submit one query to a running service and print the response."""
    import httpx

    body = {"query_type": query_type, "epsilon": epsilon, "delta": delta}
    if sigma is not None:
        body["sigma"] = sigma
    try:
        response = httpx.post(f"{url.rstrip('/')}/query", json=body, timeout=30.0)
    except httpx.HTTPError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    payload = response.json()
    click.echo(json.dumps(payload, indent=2))
    if response.status_code == 200:
        return
    if response.status_code == 404:
        sys.exit(4)
    if response.status_code == 409:
        remaining = payload.get("eps_squared_remaining")
        click.echo(f"remaining eps^2: {remaining!r}", err=True)
        sys.exit(5)
    sys.exit(1)


if __name__ == "__main__":
    main()
