"""FastAPI application wrapping one node.

Every error, including request validation and unknown routes, is rendered as
the protocol envelope {"error": {"code", "message"}} so clients can rely on
one failure shape.
"""

from __future__ import annotations

import logging
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import BAD_QUERY, INTERNAL, NOT_FOUND, DrisError
from .handlers import Node, NodeHandler
from .harvest import HarvestNode
from .org import OrgNode
from .transport import DrisClient
from .wire import (
    BATCH_DEFAULT,
    BrokerSearchResponseMsg,
    ChildrenResponseMsg,
    CollectionMsg,
    HarvestRoundResponseMsg,
    IngestRequestMsg,
    IngestResponseMsg,
    RecordsResponseMsg,
    RegisterRequestMsg,
    RegisterResponseMsg,
    SearchResponseMsg,
)

log = logging.getLogger("dris.service")


def create_app(
    node: Node,
    snapshot_path: str | None = None,
    parent_endpoint: str | None = None,
    own_endpoint: str | None = None,
    harvest_period: int | None = None,
    register_client: DrisClient | None = None,
) -> FastAPI:
    handler = NodeHandler(node)
    stop_harvester = threading.Event()
    threads: list[threading.Thread] = []

    def _register_upstream() -> None:
        client = register_client
        if client is None and hasattr(node, "client"):
            client = node.client
        if client is None:
            log.warning("no client available to register with %s", parent_endpoint)
            return
        try:
            collection = (
                node.collection_description()
                if isinstance(node, OrgNode)
                else node.aggregate_collection()
            )
            client.register(parent_endpoint, node.domain.text, own_endpoint or "", collection)
            log.info("registered %s with parent %s", node.domain.text, parent_endpoint)
        except Exception as exc:
            log.warning("registration with %s failed: %s", parent_endpoint, exc)

    def _harvest_loop() -> None:
        while not stop_harvester.wait(harvest_period):
            try:
                node.run_harvest_round()
            except Exception as exc:
                log.warning("scheduled harvest round failed: %s", exc)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if parent_endpoint:
            _register_upstream()
        if harvest_period and isinstance(node, HarvestNode):
            worker = threading.Thread(target=_harvest_loop, name="dris-harvester", daemon=True)
            worker.start()
            threads.append(worker)
        yield
        stop_harvester.set()
        for worker in threads:
            worker.join(timeout=2)
        if snapshot_path and hasattr(node, "save_snapshot"):
            node.save_snapshot(snapshot_path)

    app = FastAPI(title=f"DRIS {node.role} node {node.domain.text}", lifespan=lifespan)
    app.state.node = node

    @app.exception_handler(DrisError)
    async def dris_error_handler(request: Request, exc: DrisError):
        return JSONResponse(status_code=exc.http_status, content=exc.to_wire())

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        detail = DrisError(BAD_QUERY, f"invalid request ({where}: {first.get('msg', 'invalid')})")
        return JSONResponse(status_code=400, content=detail.to_wire())

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = NOT_FOUND if exc.status_code in (404, 405) else INTERNAL
        detail = DrisError(code, str(exc.detail))
        return JSONResponse(status_code=exc.status_code, content=detail.to_wire())

    @app.exception_handler(Exception)
    async def unexpected_error_handler(request: Request, exc: Exception):
        log.exception("unhandled error for %s", request.url.path)
        return JSONResponse(status_code=500, content=DrisError(INTERNAL, "internal error").to_wire())

    role = node.role

    if role == "broker":

        @app.get("/dris/search", response_model=BrokerSearchResponseMsg)
        def broker_search(q: str, k: int = 10):
            return handler.search(q, k)

    else:

        @app.get("/dris/search", response_model=SearchResponseMsg)
        def search(q: str, k: int = 10, kind: str | None = None):
            return handler.search(q, k, kind)

    @app.get("/dris/collection", response_model=CollectionMsg)
    def collection():
        return handler.collection()

    if role in ("org", "mid"):

        @app.get("/dris/records", response_model=RecordsResponseMsg)
        def records(
            request: Request,
            token: str | None = None,
            batch: int = BATCH_DEFAULT,
            full: bool = False,
        ):
            return handler.records(
                request.query_params.get("from"),
                request.query_params.get("until"),
                token=token,
                batch=batch,
                full=full,
            )

    if role in ("mid", "broker"):

        @app.post("/dris/register", response_model=RegisterResponseMsg)
        def register(body: RegisterRequestMsg):
            return handler.register(body)

        @app.get("/dris/children", response_model=ChildrenResponseMsg)
        def children():
            return handler.children()

    if role == "org":

        @app.post("/dris/ingest", response_model=IngestResponseMsg)
        def ingest(body: IngestRequestMsg):
            return handler.ingest(body)

    if role == "mid":

        @app.post("/dris/harvest", response_model=HarvestRoundResponseMsg)
        def harvest():
            return handler.harvest_round()

    return app
