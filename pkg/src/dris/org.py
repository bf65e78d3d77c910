"""Organization-layer node: the leaf full-text search system.

Holds whole documents, serves ranked BM25 search over title+body, answers
incremental metadata harvests, and summarizes itself as a collection
description. Documents upsert by identifier; there are no deletions.
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading

from .clock import Clock
from .errors import BAD_DATESTAMP, BAD_QUERY, DrisError
from .indexing import InvertedIndex, rank_top_k, tokenize, top_terms
from .models import CollectionDescription, Document, HarvestBatch, Hit, MetadataRecord, ResultList
from .naming import RESOURCE_KINDS, DomainName, NodeRegistry, parse_domain
from .paging import HarvestPager
from .wire import (
    BATCH_DEFAULT,
    BATCH_MAX,
    BATCH_MIN,
    CollectionMsg,
    DocumentMsg,
    collection_to_msg,
    document_to_msg,
    format_datestamp,
    msg_to_collection,
    msg_to_document,
    parse_datestamp,
)

DESCRIPTION_LIMIT = 200
COLLECTION_TERM_LIMIT = 1000

_KIND_BY_EXTENSION = {".html": "webpage", ".htm": "webpage", ".pdf": "pdf"}


def _check_batch(batch: int) -> int:
    if not (BATCH_MIN <= batch <= BATCH_MAX):
        raise DrisError(BAD_QUERY, f"batch must be in [{BATCH_MIN}, {BATCH_MAX}]")
    return batch


class OrgNode:
    role = "org"

    def __init__(self, domain: DomainName, clock: Clock):
        self.domain = domain
        self.clock = clock
        self.registry = NodeRegistry(domain, clock)
        self._documents: dict[str, Document] = {}
        self._index = InvertedIndex()
        self._pager = HarvestPager(scope=domain.text)
        self._lock = threading.RLock()

    # -- ingest ------------------------------------------------------------

    @staticmethod
    def _indexed_tokens(doc: Document) -> list[str]:
        return tokenize(doc.title + " " + doc.body)

    def ingest(self, doc: Document) -> None:
        """Upsert by identifier; replaces postings and refreshes the datestamp."""
        if not doc.identifier:
            raise DrisError(BAD_QUERY, "document identifier must be non-empty")
        if doc.kind not in RESOURCE_KINDS:
            raise DrisError(BAD_QUERY, f"unknown resource kind {doc.kind!r}")
        stamped = dataclasses.replace(
            doc, datestamp=doc.datestamp if doc.datestamp is not None else self.clock.now()
        )
        with self._lock:
            old = self._documents.get(stamped.identifier)
            if old is not None:
                self._index.remove(stamped.identifier, self._indexed_tokens(old))
            self._index.add(stamped.identifier, self._indexed_tokens(stamped))
            self._documents[stamped.identifier] = stamped

    def ingest_many(self, docs: list[Document]) -> int:
        for doc in docs:
            self.ingest(doc)
        return len(docs)

    @property
    def doc_count(self) -> int:
        return len(self._documents)

    def get_document(self, identifier: str) -> Document | None:
        with self._lock:
            return self._documents.get(identifier)

    # -- search ------------------------------------------------------------

    def search(self, query: str, k: int = 10, kind: str | None = None) -> ResultList:
        if k < 1:
            raise DrisError(BAD_QUERY, "k must be >= 1")
        if kind is not None and kind not in RESOURCE_KINDS:
            raise DrisError(BAD_QUERY, f"unknown resource kind {kind!r}")
        tokens = tokenize(query)
        if not tokens:
            raise DrisError(BAD_QUERY, "query has no searchable tokens")
        with self._lock:
            scores = self._index.bm25(tokens)
            if kind is not None:
                scores = {i: s for i, s in scores.items() if self._documents[i].kind == kind}
            ranked = rank_top_k(scores, k, tie_key=lambda doc_id: (doc_id,))
            hits = [
                Hit(
                    source=self.domain.text,
                    identifier=doc_id,
                    title=self._documents[doc_id].title,
                    kind=self._documents[doc_id].kind,
                    score=score,
                )
                for doc_id, score in ranked
            ]
        return ResultList(query=query, k=k, partial=False, hits=hits)

    # -- harvest surface ----------------------------------------------------

    def extract_metadata(self, doc: Document) -> MetadataRecord:
        datestamp = doc.datestamp if doc.datestamp is not None else self.clock.now()
        return MetadataRecord(
            identifier=doc.identifier,
            source=self.domain.text,
            kind=doc.kind,
            title=doc.title,
            description=doc.body[:DESCRIPTION_LIMIT],
            datestamp=datestamp,
        )

    def _extract_full(self, doc: Document) -> MetadataRecord:
        """Full-body variant used to model download-everything transfer."""
        record = self.extract_metadata(doc)
        return dataclasses.replace(record, description=doc.body)

    def list_records(
        self,
        from_ts: int,
        until_ts: int,
        token: str | None = None,
        batch: int = BATCH_DEFAULT,
        full: bool = False,
    ) -> HarvestBatch:
        """Records with from <= datestamp < until, (datestamp, identifier)
        ascending, paged under a per-pass snapshot."""
        _check_batch(batch)
        if from_ts > until_ts:
            raise DrisError(BAD_DATESTAMP, "from must not be after until")
        extract = self._extract_full if full else self.extract_metadata

        def build_rows(snapshot: int) -> list[MetadataRecord]:
            with self._lock:
                docs = [
                    doc
                    for doc in self._documents.values()
                    if from_ts <= doc.datestamp < until_ts and doc.datestamp <= snapshot
                ]
                docs.sort(key=lambda d: (d.datestamp, d.identifier))
                return [extract(d) for d in docs]

        return self._pager.page(
            from_ts, until_ts, token, batch, self.clock.now(), build_rows, pass_tag="full" if full else ""
        )

    def collection_description(self) -> CollectionDescription:
        with self._lock:
            kinds: dict[str, int] = {}
            for doc in self._documents.values():
                kinds[doc.kind] = kinds.get(doc.kind, 0) + 1
            terms = top_terms(self._index.term_document_frequencies(), COLLECTION_TERM_LIMIT)
            return CollectionDescription(
                domain=self.domain,
                doc_count=len(self._documents),
                kinds=dict(sorted(kinds.items())),
                terms=terms,
                generated_at=self.clock.now(),
            )

    # -- persistence ---------------------------------------------------------

    def snapshot_state(self) -> dict:
        with self._lock:
            documents = [
                document_to_msg(self._documents[key]).model_dump()
                for key in sorted(self._documents)
            ]
            registry = [
                {
                    "domain": entry.domain.text,
                    "endpoint": entry.endpoint,
                    "collection": collection_to_msg(entry.collection).model_dump(),
                    "registered_at": format_datestamp(entry.registered_at),
                }
                for entry in self.registry.children()
            ]
        return {
            "format": "dris-snapshot-1",
            "role": self.role,
            "domain": self.domain.text,
            "documents": documents,
            "registry": registry,
        }

    def load_state(self, state: dict) -> None:
        """Rebuild documents and registry from a snapshot; the index is
        reconstructed rather than persisted."""
        with self._lock:
            self._documents.clear()
            self._index = InvertedIndex()
            for raw in state.get("documents", []):
                doc = msg_to_document(DocumentMsg.model_validate(raw))
                self._index.add(doc.identifier, self._indexed_tokens(doc))
                self._documents[doc.identifier] = doc
            _load_registry(self.registry, state.get("registry", []))

    def save_snapshot(self, path: str) -> None:
        _write_snapshot(path, self.snapshot_state())

    def load_snapshot(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            self.load_state(json.load(fh))


def _load_registry(registry: NodeRegistry, entries: list[dict]) -> None:
    for raw in entries:
        registry.register(
            parse_domain(raw["domain"]),
            raw["endpoint"],
            msg_to_collection(CollectionMsg.model_validate(raw["collection"])),
        )
        entry = registry.get(parse_domain(raw["domain"]))
        entry.registered_at = parse_datestamp(raw["registered_at"])


def _write_snapshot(path: str, state: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(state, fh, sort_keys=True)
    os.replace(tmp, path)


def documents_from_directory(root: str) -> list[Document]:
    """Directory loader: one UTF-8 text file per document, identifier is the
    relative path, kind inferred from the extension."""
    docs = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            rel = os.path.relpath(full, root).replace(os.sep, "/")
            with open(full, "r", encoding="utf-8") as fh:
                body = fh.read()
            ext = os.path.splitext(name)[1].lower()
            title = next((line.strip() for line in body.splitlines() if line.strip()), rel)
            docs.append(
                Document(
                    identifier=rel,
                    kind=_KIND_BY_EXTENSION.get(ext, "webpage"),
                    title=title[:120],
                    body=body,
                )
            )
    return docs
