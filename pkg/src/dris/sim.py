"""Deterministic three-layer simulation.

Builds broker <- mids <- org nodes in one process over the in-process
transport (every hop still serialized through the wire JSON, so payload byte
counts are real), drives a simulated clock through harvest periods with
document churn, and measures coverage, staleness, and transfer traffic for
the two harvesting strategies:

* METADATA_HARVEST - incremental, cursor-driven pulls of metadata records.
* FULL_DOWNLOAD    - every period re-downloads every document with its whole
  body as payload, the way a crawler that re-fetches pages would; indexing is
  unchanged, only the transferred bytes differ.

Identical config and seed give byte-identical metrics, logs, and CSV output.
Staleness is measured at harvest-tick boundaries, not continuously.
"""

from __future__ import annotations

import bisect
import dataclasses
import random
import sys
from dataclasses import dataclass, field

from .broker import BrokerNode
from .clock import SimClock
from .handlers import NodeHandler
from .harvest import HarvestNode
from .models import Document
from .naming import parse_domain, service_url
from .org import OrgNode
from .transport import DrisClient, LocalTransport

FULL_DOWNLOAD = "FULL_DOWNLOAD"
METADATA_HARVEST = "METADATA_HARVEST"
STRATEGIES = (FULL_DOWNLOAD, METADATA_HARVEST)

ZIPF_EXPONENT = 1.1
CSV_HEADER = "strategy,coverage,staleness_mean,staleness_max,traffic_bytes,queries_ok"


@dataclass
class SimConfig:
    seed: int = 1
    org_nodes: int = 4
    docs_per_org: int = 50
    vocab_size: int = 1000
    doc_length: int = 100
    harvest_period: int = 60
    churn_rate: int = 1
    query_count: int = 20
    strategy: str = METADATA_HARVEST
    periods: int = 10

    def validate(self) -> None:
        for name in ("org_nodes", "docs_per_org", "vocab_size", "doc_length", "harvest_period", "query_count", "periods"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.churn_rate < 0:
            raise ValueError("churn_rate must be >= 0")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")

    @classmethod
    def from_dict(cls, raw: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        config = cls(**raw)
        config.validate()
        return config


@dataclass
class Metrics:
    coverage: float
    staleness_mean: float
    staleness_max: int
    traffic_bytes: int
    queries_ok: int


class ZipfSampler:
    """Rank-frequency sampler: p(rank) proportional to rank**-s."""

    def __init__(self, vocab_size: int, exponent: float = ZIPF_EXPONENT):
        cumulative: list[float] = []
        total = 0.0
        for rank in range(1, vocab_size + 1):
            total += rank ** -exponent
            cumulative.append(total)
        self._cumulative = cumulative
        self._total = total

    def draw(self, rng: random.Random) -> int:
        point = rng.random() * self._total
        index = bisect.bisect_left(self._cumulative, point)
        return min(index, len(self._cumulative) - 1)


def org_domains(count: int) -> list[str]:
    """Even indexes live under edu.cn, odd under com.cn."""
    return [f"u{i}.edu.cn" if i % 2 == 0 else f"c{i}.com.cn" for i in range(count)]


def gen_corpus(config: SimConfig) -> dict[str, list[Document]]:
    """Synthetic corpus: Zipf-drawn bodies over w0..w{V-1}, plus one globally
    unique title token per document as an exact retrieval witness."""
    rng = random.Random(config.seed)
    sampler = ZipfSampler(config.vocab_size)
    corpus: dict[str, list[Document]] = {}
    uniq = 0
    for domain in org_domains(config.org_nodes):
        docs = []
        for j in range(config.docs_per_org):
            body = " ".join(f"w{sampler.draw(rng)}" for _ in range(config.doc_length))
            docs.append(
                Document(identifier=f"d{j:04d}", kind="webpage", title=f"uniq{uniq}", body=body)
            )
            uniq += 1
        corpus[domain] = docs
    return corpus


@dataclass
class SimWorld:
    config: SimConfig
    clock: SimClock
    transport: LocalTransport
    client: DrisClient
    broker: BrokerNode
    mids: list[HarvestNode]
    orgs: list[OrgNode]
    corpus: dict[str, list[Document]]
    endpoints: dict[str, str]
    mid_of: dict[str, int]
    log: list[str] = field(default_factory=list)


def build_world(config: SimConfig) -> SimWorld:
    """Topology: broker cn <- mids edu.cn, com.cn <- org nodes; every node is
    reachable at its conventional service URL; all registrations and the
    corpus ingest go over the wire."""
    config.validate()
    clock = SimClock(0)
    transport = LocalTransport()
    client = DrisClient(transport)

    broker = BrokerNode(parse_domain("cn"), clock, transport, parallelism=1)
    mids = [
        HarvestNode(parse_domain("edu.cn"), clock, transport),
        HarvestNode(parse_domain("com.cn"), clock, transport),
    ]
    corpus = gen_corpus(config)
    orgs = [OrgNode(parse_domain(domain), clock) for domain in corpus]

    nodes = [broker, *mids, *orgs]
    endpoints = {node.domain.text: service_url(node.domain) for node in nodes}
    for node in nodes:
        transport.register_node(endpoints[node.domain.text], NodeHandler(node))

    for org in orgs:
        client.ingest(endpoints[org.domain.text], corpus[org.domain.text])

    mid_index = {mid.domain.text: i for i, mid in enumerate(mids)}
    mid_of = {}
    for org in orgs:
        parent = org.domain.parent().text
        mid_of[org.domain.text] = mid_index[parent]
        client.register(
            endpoints[parent],
            org.domain.text,
            endpoints[org.domain.text],
            org.collection_description(),
        )
    for mid in mids:
        client.register(
            endpoints[broker.domain.text],
            mid.domain.text,
            endpoints[mid.domain.text],
            mid.aggregate_collection(),
        )

    world = SimWorld(
        config=config,
        clock=clock,
        transport=transport,
        client=client,
        broker=broker,
        mids=mids,
        orgs=orgs,
        corpus=corpus,
        endpoints=endpoints,
        mid_of=mid_of,
    )
    world.log.append(
        f"t=0 built topology orgs={config.org_nodes} docs={config.org_nodes * config.docs_per_org}"
    )
    return world


def run_sim(config: SimConfig) -> Metrics:
    metrics, _ = run_sim_detailed(config)
    return metrics


def run_sim_detailed(config: SimConfig) -> tuple[Metrics, SimWorld]:
    world = build_world(config)
    rng = random.Random(f"{config.seed}/events")
    full = config.strategy == FULL_DOWNLOAD
    period = config.harvest_period
    traffic = 0
    samples: list[int] = []
    # Every (mid, source, identifier, modified-at) still waiting to be seen
    # upstream; resolved at the first tick where the union holds that version
    # or a newer one.
    pending: list[tuple[int, str, str, int]] = [
        (world.mid_of[org.domain.text], org.domain.text, doc.identifier, 0)
        for org in world.orgs
        for doc in world.corpus[org.domain.text]
    ]

    for p in range(1, config.periods + 1):
        churn_at = (p - 1) * period + period // 2
        world.clock.advance_to(churn_at)
        if config.churn_rate > 0:
            for org in world.orgs:
                docs = world.corpus[org.domain.text]
                count = min(config.churn_rate, len(docs))
                for index in sorted(rng.sample(range(len(docs)), count)):
                    doc = docs[index]
                    org.ingest(dataclasses.replace(doc, datestamp=None))
                    pending.append(
                        (world.mid_of[org.domain.text], org.domain.text, doc.identifier, churn_at)
                    )
                    world.log.append(f"t={churn_at} churn {org.domain.text}/{doc.identifier}")

        tick = p * period
        world.clock.advance_to(tick)
        for mid in world.mids:
            for report in mid.run_harvest_round(full=full):
                traffic += report.bytes
                world.log.append(
                    f"t={tick} harvest mid={mid.domain.text} child={report.child}"
                    f" new={report.new} updated={report.updated} bytes={report.bytes} ok={report.ok}"
                )

        unresolved = []
        for entry in pending:
            mid_i, source, identifier, modified_at = entry
            record = world.mids[mid_i].get_record(source, identifier)
            if record is not None and record.datestamp >= modified_at:
                samples.append(tick - modified_at)
            else:
                unresolved.append(entry)
        pending = unresolved

        for mid in world.mids:
            world.client.register(
                world.endpoints[world.broker.domain.text],
                mid.domain.text,
                world.endpoints[mid.domain.text],
                mid.aggregate_collection(),
            )

    # Queries enter at the broker over the wire, like any client would.
    broker_endpoint = world.endpoints[world.broker.domain.text]
    covered = 0
    total = 0
    queries_ok = 0
    for org in world.orgs:
        for doc in world.corpus[org.domain.text]:
            total += 1
            response = world.client.search_raw(broker_endpoint, doc.title, k=10)
            if not response.partial:
                queries_ok += 1
            if any(
                h.source == org.domain.text and h.id == doc.identifier
                for h in response.hits
            ):
                covered += 1
    sampler = ZipfSampler(config.vocab_size)
    for _ in range(config.query_count):
        response = world.client.search_raw(broker_endpoint, f"w{sampler.draw(rng)}", k=10)
        if not response.partial:
            queries_ok += 1

    metrics = Metrics(
        coverage=covered / total,
        staleness_mean=sum(samples) / len(samples) if samples else 0.0,
        staleness_max=max(samples) if samples else 0,
        traffic_bytes=traffic,
        queries_ok=queries_ok,
    )
    world.log.append(
        f"t={world.clock.now()} done coverage={metrics.coverage!r}"
        f" staleness_mean={metrics.staleness_mean!r} staleness_max={metrics.staleness_max}"
        f" traffic_bytes={metrics.traffic_bytes} queries_ok={metrics.queries_ok}"
    )
    return metrics, world


def render_report(config: SimConfig, results: list[tuple[str, Metrics]]) -> str:
    lines = [
        f"simulation: seed={config.seed} orgs={config.org_nodes} docs/org={config.docs_per_org}"
        f" period={config.harvest_period}s periods={config.periods} churn={config.churn_rate}/org/period",
        "note: staleness is measured at harvest-tick boundaries, not continuously",
        f"{'strategy':<18} {'coverage':>9} {'staleness_mean':>15} {'staleness_max':>14} {'traffic_bytes':>14} {'queries_ok':>11}",
    ]
    for strategy, m in results:
        lines.append(
            f"{strategy:<18} {m.coverage:>9} {m.staleness_mean:>15} {m.staleness_max:>14} {m.traffic_bytes:>14} {m.queries_ok:>11}"
        )
    return "\n".join(lines)


def csv_rows(results: list[tuple[str, Metrics]]) -> str:
    lines = [CSV_HEADER]
    for strategy, m in results:
        lines.append(
            f"{strategy},{m.coverage},{m.staleness_mean},{m.staleness_max},{m.traffic_bytes},{m.queries_ok}"
        )
    return "\n".join(lines) + "\n"


def compare_strategies(
    config: SimConfig, csv_path: str | None = None, out=None
) -> list[tuple[str, Metrics]]:
    """Run both strategies on the same seed; print the comparison table and
    optionally write it as CSV. Values are the Metrics verbatim."""
    out = sys.stdout if out is None else out
    results = []
    for strategy in STRATEGIES:
        cfg = dataclasses.replace(config, strategy=strategy)
        results.append((strategy, run_sim(cfg)))
    print(render_report(config, results), file=out)
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_rows(results))
    return results
