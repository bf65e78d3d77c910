"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line; tolerances are pinned here and
nowhere else. The whole module runs in-process with no network access.
"""

import dataclasses
import json
import random
import string
from contextlib import contextmanager

from helpers import FIXTURE_QUERIES, brute_force_bm25, make_fixture_docs

from dris import (
    BrokerNode,
    Document,
    HarvestNode,
    OrgNode,
    SimClock,
    class_name,
    parse_domain,
    service_url,
)
from dris.cli import main as cli_main
from dris.handlers import NodeHandler
from dris.sim import FULL_DOWNLOAD, METADATA_HARVEST, SimConfig, run_sim
from dris.transport import LocalTransport


@contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} {name}: FAIL")
        raise
    print(f"ACCEPTANCE {number} {name}: PASS")


# -- 1: naming conformance ------------------------------------------------------


def test_acceptance_1_naming_conformance():
    with criterion(1, "naming-conformance"):
        hust = parse_domain("hust.edu.cn")
        assert class_name(hust) == "DRIS.cn.edu.hust"
        assert service_url(hust) == "http://DRIS.hust.edu.cn"

        rng = random.Random(160301)
        for _ in range(1000):
            labels = []
            for _ in range(rng.randint(1, 8)):
                n = rng.randint(1, 15)
                chars = [rng.choice(string.ascii_lowercase + string.digits) for _ in range(n)]
                if n > 2 and rng.random() < 0.25:
                    chars[rng.randint(1, n - 2)] = "-"
                labels.append("".join(chars))
            text = ".".join(labels)
            domain = parse_domain(text)
            assert domain.text == text
            assert parse_domain(domain.text) == domain


# -- 2: ranking oracle -----------------------------------------------------------


def test_acceptance_2_bm25_matches_brute_force_oracle():
    with criterion(2, "bm25-ranking-oracle"):
        docs = make_fixture_docs(20)
        node = OrgNode(parse_domain("hust.edu.cn"), SimClock(0))
        for doc in docs:
            node.ingest(doc)
        assert len(FIXTURE_QUERIES) == 5
        for query in FIXTURE_QUERIES:
            expected = brute_force_bm25(docs, query)
            got = {h.identifier: h.score for h in node.search(query, k=20).hits}
            assert set(got) == set(expected)
            for ident, score in expected.items():
                assert abs(got[ident] - score) < 1e-9


# -- 3: harvest correctness ---------------------------------------------------------


def _wire_mid(org_count=1, docs_per_org=50):
    clock = SimClock(0)
    transport = LocalTransport()
    mid = HarvestNode(parse_domain("edu.cn"), clock, transport)
    orgs = []
    for i in range(org_count):
        org = OrgNode(parse_domain(f"u{i}.edu.cn"), clock)
        for j in range(docs_per_org):
            org.ingest(Document(f"d{j:04d}", "webpage", f"title {i} {j}", f"body {i} {j}"))
        transport.register_node(service_url(org.domain), NodeHandler(org))
        mid.registry.register(org.domain, service_url(org.domain), org.collection_description())
        orgs.append(org)
    return clock, transport, mid, orgs


def test_acceptance_3a_harvest_idempotence():
    with criterion(3, "harvest-idempotence"):
        clock, _, mid, (org,) = _wire_mid()
        clock.advance(30)
        mid.harvest_once(org.domain)
        before = json.dumps(mid.snapshot_state()["union_records"], sort_keys=True)
        clock.advance(30)
        report = mid.harvest_once(org.domain)
        after = json.dumps(mid.snapshot_state()["union_records"], sort_keys=True)
        assert report.new == 0 and report.updated == 0
        assert before == after


def test_acceptance_3b_partition_completeness():
    with criterion(3, "harvest-partition-completeness"):
        # same child harvested split [0,t1)+[t1,t2) by one mid, whole [0,t2) by another
        clock = SimClock(0)
        transport = LocalTransport()
        org = OrgNode(parse_domain("u0.edu.cn"), clock)
        rng = random.Random(31)
        for j in range(200):
            org.ingest(Document(f"d{j:04d}", "webpage", f"t{j}", "b", datestamp=rng.randrange(0, 900)))
        transport.register_node(service_url(org.domain), NodeHandler(org))

        split_mid = HarvestNode(parse_domain("edu.cn"), clock, transport)
        whole_mid = HarvestNode(parse_domain("edu.cn"), clock, transport)
        for mid in (split_mid, whole_mid):
            mid.registry.register(org.domain, service_url(org.domain), org.collection_description())

        clock.advance_to(rng.randrange(100, 800))
        split_mid.harvest_once(org.domain)  # [0, t1)
        clock.advance_to(1000)
        split_mid.harvest_once(org.domain)  # [t1, 1000)
        whole_mid.harvest_once(org.domain)  # [0, 1000)

        split_records = split_mid.snapshot_state()["union_records"]
        whole_records = whole_mid.snapshot_state()["union_records"]
        assert len(split_records) == len(whole_records) == 200
        assert split_records == whole_records


def test_acceptance_3c_failure_leaves_cursor_unmoved():
    with criterion(3, "harvest-failure-safety"):
        clock, transport, mid, (org,) = _wire_mid(docs_per_org=250)
        clock.advance(10)
        mid.harvest_once(org.domain)
        assert mid.cursor_for(org.domain) == 10

        for j in range(250, 400):
            org.ingest(Document(f"d{j:04d}", "webpage", f"t{j}", "b"))
        clock.advance(10)

        calls = {"n": 0}
        real = transport.request

        def mid_pass_failure(method, endpoint, path, params, body, timeout_ms):
            if path == "/dris/records":
                calls["n"] += 1
                if calls["n"] == 2:  # after the first page of this pass
                    raise Exception("simulated transport drop")
            return real(method, endpoint, path, params, body, timeout_ms)

        transport.request = mid_pass_failure
        try:
            report = mid.harvest_once(org.domain)
        finally:
            transport.request = real
        assert report.ok is False
        assert mid.cursor_for(org.domain) == 10


# -- 4: end-to-end coverage -----------------------------------------------------------


def test_acceptance_4_full_coverage_after_one_round():
    with criterion(4, "end-to-end-coverage"):
        config = SimConfig(seed=2, org_nodes=4, docs_per_org=50, churn_rate=0, periods=1)
        metrics = run_sim(config)
        assert metrics.coverage == 1.0


# -- 5: freshness bound -----------------------------------------------------------------


def test_acceptance_5_staleness_bounded_by_two_periods():
    with criterion(5, "freshness-bound"):
        config = SimConfig(seed=3, churn_rate=2, harvest_period=60, periods=10)
        metrics = run_sim(config)
        assert metrics.staleness_max <= 2 * config.harvest_period
        assert metrics.staleness_max > 0


# -- 6: traffic direction ------------------------------------------------------------------


def test_acceptance_6_metadata_traffic_under_half_of_full_download():
    with criterion(6, "traffic-direction"):
        config = SimConfig(seed=4)  # default corpus
        meta = run_sim(dataclasses.replace(config, strategy=METADATA_HARVEST))
        full = run_sim(dataclasses.replace(config, strategy=FULL_DOWNLOAD))
        assert meta.traffic_bytes > 0
        assert meta.traffic_bytes < 0.5 * full.traffic_bytes


# -- 7: broker robustness ----------------------------------------------------------------------


def test_acceptance_7_broker_survives_child_timeout():
    with criterion(7, "broker-robustness"):
        clock = SimClock(0)
        transport = LocalTransport()
        broker = BrokerNode(parse_domain("cn"), clock, transport, parallelism=1)
        for i in range(3):
            org = OrgNode(parse_domain(f"m{i}.cn"), clock)
            for j in range(4):
                org.ingest(Document(f"d{j}", "webpage", f"grid topic {i} {j}", f"grid body {j}"))
            transport.register_node(service_url(org.domain), NodeHandler(org))
            broker.registry.register(org.domain, service_url(org.domain), org.collection_description())

        transport.faults[service_url(parse_domain("m1.cn"))] = "TIMEOUT"
        merged = broker.search("grid", k=10)
        assert merged.partial is True
        assert merged.per_child["m1.cn"] == {"error": "TIMEOUT"}
        assert merged.per_child["m0.cn"]["hits"] > 0
        assert merged.per_child["m2.cn"]["hits"] > 0

        # excluding the dead child a priori yields the identical merged order
        healthy = [e for e in broker.registry.children() if e.domain.text != "m1.cn"]
        outcomes = broker.fan_out("grid", healthy, k=10)
        baseline = BrokerNode.merge(outcomes, k=10, query="grid")
        assert [(h.source, h.identifier, h.normalized_score) for h in merged.hits] == [
            (h.source, h.identifier, h.normalized_score) for h in baseline.hits
        ]


# -- 8: determinism -----------------------------------------------------------------------------


def test_acceptance_8_sim_cli_csv_byte_identical(tmp_path):
    with criterion(8, "sim-determinism"):
        config = {
            "seed": 9,
            "org_nodes": 4,
            "docs_per_org": 25,
            "vocab_size": 500,
            "doc_length": 80,
            "harvest_period": 45,
            "churn_rate": 1,
            "query_count": 10,
            "strategy": "METADATA_HARVEST",
            "periods": 4,
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config), encoding="utf-8")
        first, second = tmp_path / "run1.csv", tmp_path / "run2.csv"
        assert cli_main(["sim", "--config", str(config_path), "--csv", str(first)]) == 0
        assert cli_main(["sim", "--config", str(config_path), "--csv", str(second)]) == 0
        data = first.read_bytes()
        assert data == second.read_bytes()
        assert len(data.decode().strip().split("\n")) == 3
