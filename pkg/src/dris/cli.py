"""Command-line entry points.

`serve` runs one node as an HTTP service; the other commands are thin clients
that talk to running nodes, plus `sim` which runs entirely in-process.
Exit codes: 0 ok, 1 usage, 2 runtime/transport failure.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click

from .broker import BrokerNode
from .clock import SystemClock
from .errors import DrisError
from .harvest import HarvestNode
from .naming import parse_domain
from .org import OrgNode, documents_from_directory
from .service import create_app
from .sim import SimConfig, compare_strategies
from .transport import DrisClient, HttpTransport

INGEST_CHUNK = 200


def _make_transport():
    return HttpTransport()


@click.group()
def cli():
    """Hierarchical federated search nodes and client tools."""


@cli.command()
@click.option("--role", type=click.Choice(["org", "mid", "broker"]), required=True)
@click.option("--domain", "domain_text", required=True, help="Dotted domain of this node.")
@click.option("--listen", default="127.0.0.1:8300", show_default=True, help="host:port to bind.")
@click.option("--parent", "parent_endpoint", default=None, help="Parent endpoint to register with at startup.")
@click.option("--snapshot", "snapshot_path", default=None, type=click.Path(), help="State file loaded at startup and saved at shutdown.")
@click.option("--harvest-period", type=int, default=None, help="Mid nodes: harvest all children every N seconds.")
def serve(role, domain_text, listen, parent_endpoint, snapshot_path, harvest_period):
    """Run one node as an HTTP service."""
    import uvicorn

    domain = parse_domain(domain_text)
    clock = SystemClock()
    transport = _make_transport()
    if role == "org":
        node = OrgNode(domain, clock)
    elif role == "mid":
        node = HarvestNode(domain, clock, transport)
    else:
        node = BrokerNode(domain, clock, transport)
    if snapshot_path and os.path.exists(snapshot_path) and hasattr(node, "load_snapshot"):
        node.load_snapshot(snapshot_path)
    host, _, port_text = listen.partition(":")
    host = host or "127.0.0.1"
    port = int(port_text or "8300")
    app = create_app(
        node,
        snapshot_path=snapshot_path,
        parent_endpoint=parent_endpoint,
        own_endpoint=f"http://{host}:{port}",
        harvest_period=harvest_period,
        register_client=DrisClient(transport),
    )
    uvicorn.run(app, host=host, port=port)


@cli.command()
@click.option("--endpoint", required=True, help="Org node to load documents into.")
@click.option("--dir", "directory", required=True, type=click.Path(exists=True, file_okay=False))
def ingest(endpoint, directory):
    """Load a directory of UTF-8 text files, one file per document."""
    docs = documents_from_directory(directory)
    client = DrisClient(_make_transport())
    total = 0
    for start in range(0, len(docs), INGEST_CHUNK):
        total += client.ingest(endpoint, docs[start : start + INGEST_CHUNK])
    click.echo(f"ingested {total} documents into {endpoint}")


@cli.command()
@click.option("--endpoint", required=True, help="Mid node to drive.")
@click.option("--once", is_flag=True, help="Run a single harvest round and exit.")
@click.option("--period", type=int, default=60, show_default=True, help="Seconds between rounds when looping.")
def harvest(endpoint, once, period):
    """Trigger harvest rounds on a mid node."""
    client = DrisClient(_make_transport())
    while True:
        for report in client.trigger_harvest(endpoint):
            status = "ok" if report.ok else f"failed:{report.error}"
            click.echo(
                f"{report.child}: new={report.new} updated={report.updated} bytes={report.bytes} {status}"
            )
        if once:
            break
        time.sleep(period)


@cli.command()
@click.option("--endpoint", required=True)
@click.option("--q", "query_text", required=True)
@click.option("-k", "k", type=int, default=10, show_default=True)
def query(endpoint, query_text, k):
    """Search a node and print the ranked hits."""
    client = DrisClient(_make_transport())
    hits = client.search(endpoint, query_text, k)
    if not hits:
        click.echo("no hits")
        return
    for rank, hit in enumerate(hits, 1):
        click.echo(f"{rank:2d}. {hit.score:.6f} {hit.source} {hit.identifier} {hit.title}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "csv_path", default=None, type=click.Path())
def sim(config_path, csv_path):
    """Compare harvesting strategies on a deterministic simulated topology."""
    with open(config_path, encoding="utf-8") as fh:
        raw = json.load(fh)
    config = SimConfig.from_dict(raw)
    compare_strategies(config, csv_path=csv_path)


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except DrisError as exc:
        click.echo(f"error {exc.code}: {exc.message}", err=True)
        sys.exit(2)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    return 0


if __name__ == "__main__":
    main()
