"""Role-aware request handling shared by the in-process transport and the
HTTP service, so live serving and simulation run the same logic."""

from __future__ import annotations

from pydantic import BaseModel

from .broker import BrokerNode
from .errors import BAD_DATESTAMP, BAD_QUERY, NOT_FOUND, DrisError
from .harvest import HarvestNode
from .models import MergedResult, ResultList
from .org import OrgNode
from .wire import (
    BATCH_DEFAULT,
    BrokerHitMsg,
    BrokerSearchResponseMsg,
    ChildMsg,
    ChildrenResponseMsg,
    CollectionMsg,
    HarvestRoundResponseMsg,
    IngestRequestMsg,
    IngestResponseMsg,
    RecordsResponseMsg,
    RegisterRequestMsg,
    RegisterResponseMsg,
    SearchResponseMsg,
    batch_to_msg,
    collection_to_msg,
    decode,
    format_datestamp,
    hit_to_msg,
    msg_to_collection,
    msg_to_document,
    parse_datestamp,
    report_to_msg,
)
from .naming import parse_domain

Node = OrgNode | HarvestNode | BrokerNode


def result_to_msg(result: ResultList) -> SearchResponseMsg:
    return SearchResponseMsg(
        query=result.query,
        k=result.k,
        partial=result.partial,
        hits=[hit_to_msg(h) for h in result.hits],
    )


def merged_to_msg(result: MergedResult) -> BrokerSearchResponseMsg:
    return BrokerSearchResponseMsg(
        query=result.query,
        k=result.k,
        partial=result.partial,
        hits=[
            BrokerHitMsg(
                source=h.source,
                id=h.identifier,
                title=h.title,
                kind=h.kind,
                score=h.normalized_score,
                raw_score=h.raw_score,
            )
            for h in result.hits
        ],
        per_child=result.per_child,
    )


def _int_param(params: dict, name: str, default: int) -> int:
    raw = params.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise DrisError(BAD_QUERY, f"{name} must be an integer") from None


class NodeHandler:
    """Dispatches wire requests to a node and renders wire responses."""

    def __init__(self, node: Node):
        self.node = node

    # -- typed operations, one per endpoint --------------------------------

    def search(self, q: str | None, k: int = 10, kind: str | None = None) -> BaseModel:
        if q is None:
            raise DrisError(BAD_QUERY, "missing query parameter q")
        if isinstance(self.node, BrokerNode):
            return merged_to_msg(self.node.search(q, k))
        if isinstance(self.node, OrgNode):
            return result_to_msg(self.node.search(q, k, kind=kind or None))
        return result_to_msg(self.node.search(q, k))

    def records(
        self,
        from_text: str | None,
        until_text: str | None,
        token: str | None = None,
        batch: int = BATCH_DEFAULT,
        full: bool = False,
    ) -> RecordsResponseMsg:
        if from_text is None or until_text is None:
            raise DrisError(BAD_DATESTAMP, "from and until are required")
        from_ts = parse_datestamp(from_text)
        until_ts = parse_datestamp(until_text)
        if isinstance(self.node, OrgNode):
            batch_result = self.node.list_records(from_ts, until_ts, token=token, batch=batch, full=full)
        elif isinstance(self.node, HarvestNode):
            batch_result = self.node.list_records(from_ts, until_ts, token=token, batch=batch)
        else:
            raise DrisError(NOT_FOUND, "this node does not serve records")
        return batch_to_msg(batch_result)

    def collection(self) -> CollectionMsg:
        if isinstance(self.node, OrgNode):
            return collection_to_msg(self.node.collection_description())
        return collection_to_msg(self.node.aggregate_collection())

    def register(self, request: RegisterRequestMsg) -> RegisterResponseMsg:
        child = parse_domain(request.domain)
        self.node.registry.register(child, request.endpoint, msg_to_collection(request.collection))
        return RegisterResponseMsg(ok=True)

    def children(self) -> ChildrenResponseMsg:
        return ChildrenResponseMsg(
            children=[
                ChildMsg(
                    domain=entry.domain.text,
                    endpoint=entry.endpoint,
                    registered_at=format_datestamp(entry.registered_at),
                )
                for entry in self.node.registry.children()
            ]
        )

    def ingest(self, request: IngestRequestMsg) -> IngestResponseMsg:
        docs = [msg_to_document(msg) for msg in request.documents]
        return IngestResponseMsg(ingested=self.node.ingest_many(docs))

    def harvest_round(self) -> HarvestRoundResponseMsg:
        reports = self.node.run_harvest_round()
        return HarvestRoundResponseMsg(reports=[report_to_msg(r) for r in reports])

    # -- raw dispatch (in-process transport) --------------------------------

    def handle(self, method: str, path: str, params: dict[str, str], body: bytes | None) -> BaseModel:
        role = self.node.role
        route = (method.upper(), path)
        if route == ("GET", "/dris/search"):
            return self.search(
                params.get("q"), _int_param(params, "k", 10), params.get("kind") or None
            )
        if route == ("GET", "/dris/records") and role in ("org", "mid"):
            return self.records(
                params.get("from"),
                params.get("until"),
                token=params.get("token") or None,
                batch=_int_param(params, "batch", BATCH_DEFAULT),
                full=params.get("full") in ("1", "true"),
            )
        if route == ("GET", "/dris/collection"):
            return self.collection()
        if route == ("POST", "/dris/register") and role in ("mid", "broker"):
            return self.register(decode(RegisterRequestMsg, body or b"", code=BAD_QUERY))
        if route == ("GET", "/dris/children") and role in ("mid", "broker"):
            return self.children()
        if route == ("POST", "/dris/ingest") and role == "org":
            return self.ingest(decode(IngestRequestMsg, body or b"", code=BAD_QUERY))
        if route == ("POST", "/dris/harvest") and role == "mid":
            return self.harvest_round()
        raise DrisError(NOT_FOUND, f"{method} {path} is not served by a {role} node")
