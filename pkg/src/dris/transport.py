"""Transport between nodes.

LocalTransport wires nodes together in one process but still serializes every
request through the exact wire JSON, so payload byte counts are real and the
codecs are exercised; HttpTransport is the drop-in live equivalent. DrisClient
is the typed client both the CLI and the upper-layer nodes use.
"""

from __future__ import annotations

from typing import Protocol

import httpx

from .errors import INTERNAL, NOT_FOUND, TIMEOUT, DrisError
from .models import CollectionDescription, Document, HarvestBatch, Hit
from .wire import (
    BATCH_DEFAULT,
    ChildMsg,
    ChildrenResponseMsg,
    CollectionMsg,
    ErrorResponseMsg,
    HarvestReportMsg,
    HarvestRoundResponseMsg,
    IngestRequestMsg,
    IngestResponseMsg,
    RecordsResponseMsg,
    RegisterRequestMsg,
    RegisterResponseMsg,
    SearchResponseMsg,
    collection_to_msg,
    decode,
    document_to_msg,
    encode,
    format_datestamp,
    msg_to_batch,
    msg_to_collection,
    msg_to_hit,
)

DEFAULT_TIMEOUT_MS = 2000


class Transport(Protocol):
    def request(
        self,
        method: str,
        endpoint: str,
        path: str,
        params: dict[str, str] | None,
        body: bytes | None,
        timeout_ms: int,
    ) -> bytes:
        """Perform one request; returns the response payload bytes or raises
        DrisError (TIMEOUT on timeouts, decoded wire code on error replies)."""
        ...


class LocalTransport:
    """In-process transport keyed by endpoint URL.

    faults maps an endpoint to an error code; matching requests fail with that
    code without reaching the node, which is how tests and the simulation
    model timeouts and downed children deterministically.
    """

    def __init__(self):
        self._handlers: dict[str, object] = {}
        self.faults: dict[str, str] = {}

    def register_node(self, endpoint: str, handler) -> None:
        self._handlers[endpoint.rstrip("/")] = handler

    def request(self, method, endpoint, path, params, body, timeout_ms) -> bytes:
        endpoint = endpoint.rstrip("/")
        fault = self.faults.get(endpoint)
        if fault is not None:
            raise DrisError(fault, f"injected {fault} for {endpoint}")
        handler = self._handlers.get(endpoint)
        if handler is None:
            raise DrisError(NOT_FOUND, f"no service reachable at {endpoint}")
        try:
            response = handler.handle(method, path, params or {}, body)
        except DrisError as exc:
            # Round-trip the error envelope exactly as an HTTP server would.
            envelope = decode(ErrorResponseMsg, encode(ErrorResponseMsg.model_validate(exc.to_wire())))
            raise DrisError(envelope.error.code, envelope.error.message) from None
        except Exception as exc:
            # what a live server's catch-all 500 handler would emit
            raise DrisError(INTERNAL, "internal error") from exc
        return encode(response)


class HttpTransport:
    def __init__(self, client: httpx.Client | None = None):
        self._client = client or httpx.Client()

    def request(self, method, endpoint, path, params, body, timeout_ms) -> bytes:
        url = endpoint.rstrip("/") + path
        headers = {"content-type": "application/json"} if body is not None else None
        try:
            response = self._client.request(
                method,
                url,
                params=params,
                content=body,
                headers=headers,
                timeout=timeout_ms / 1000.0,
            )
        except httpx.TimeoutException as exc:
            raise DrisError(TIMEOUT, f"request to {url} timed out") from exc
        except httpx.HTTPError as exc:
            raise DrisError(INTERNAL, f"transport failure for {url}: {exc}") from exc
        if response.status_code >= 300:
            try:
                envelope = ErrorResponseMsg.model_validate_json(response.content)
                raise DrisError(envelope.error.code, envelope.error.message)
            except DrisError:
                raise
            except Exception:
                raise DrisError(INTERNAL, f"unexpected {response.status_code} from {url}") from None
        return response.content


class DrisClient:
    """Typed client over a transport; decodes wire messages into core values."""

    def __init__(self, transport: Transport, timeout_ms: int = DEFAULT_TIMEOUT_MS):
        self.transport = transport
        self.timeout_ms = timeout_ms

    def _get(self, endpoint: str, path: str, params: dict[str, str], timeout_ms: int | None = None) -> bytes:
        return self.transport.request("GET", endpoint, path, params, None, timeout_ms or self.timeout_ms)

    def _post(self, endpoint: str, path: str, body: bytes, timeout_ms: int | None = None) -> bytes:
        return self.transport.request("POST", endpoint, path, None, body, timeout_ms or self.timeout_ms)

    def search(self, endpoint: str, query: str, k: int = 10, timeout_ms: int | None = None) -> list[Hit]:
        payload = self._get(endpoint, "/dris/search", {"q": query, "k": str(k)}, timeout_ms)
        message = decode(SearchResponseMsg, payload)
        return [msg_to_hit(h) for h in message.hits]

    def search_raw(self, endpoint: str, query: str, k: int = 10) -> SearchResponseMsg:
        return decode(SearchResponseMsg, self._get(endpoint, "/dris/search", {"q": query, "k": str(k)}))

    def records(
        self,
        endpoint: str,
        from_ts: int,
        until_ts: int,
        token: str | None = None,
        batch: int = BATCH_DEFAULT,
        full: bool = False,
    ) -> tuple[HarvestBatch, int]:
        """Fetch one harvest page; returns the batch and its payload size."""
        params = {
            "from": format_datestamp(from_ts),
            "until": format_datestamp(until_ts),
            "batch": str(batch),
        }
        if token is not None:
            params["token"] = token
        if full:
            params["full"] = "1"
        payload = self._get(endpoint, "/dris/records", params)
        return msg_to_batch(decode(RecordsResponseMsg, payload)), len(payload)

    def collection(self, endpoint: str) -> CollectionDescription:
        payload = self._get(endpoint, "/dris/collection", {})
        return msg_to_collection(decode(CollectionMsg, payload))

    def register(self, endpoint: str, domain: str, node_endpoint: str, collection: CollectionDescription) -> bool:
        request = RegisterRequestMsg(
            domain=domain, endpoint=node_endpoint, collection=collection_to_msg(collection)
        )
        payload = self._post(endpoint, "/dris/register", encode(request))
        return decode(RegisterResponseMsg, payload).ok

    def children(self, endpoint: str) -> list[ChildMsg]:
        payload = self._get(endpoint, "/dris/children", {})
        return decode(ChildrenResponseMsg, payload).children

    def ingest(self, endpoint: str, docs: list[Document]) -> int:
        request = IngestRequestMsg(documents=[document_to_msg(d) for d in docs])
        payload = self._post(endpoint, "/dris/ingest", encode(request))
        return decode(IngestResponseMsg, payload).ingested

    def trigger_harvest(self, endpoint: str) -> list[HarvestReportMsg]:
        payload = self._post(endpoint, "/dris/harvest", b"{}")
        return decode(HarvestRoundResponseMsg, payload).reports
