"""Sub-Internet-layer node: harvests child metadata into a union index.

Each registered child has a datestamp cursor; a harvest pass pulls the
half-open window [cursor, now) page by page, upserts records keyed by
(source, identifier), and advances the cursor only once the final page has
been applied. The union index holds metadata only, never document bodies.
"""

from __future__ import annotations

import dataclasses
import json
import threading

from .clock import Clock
from .errors import BAD_DATESTAMP, BAD_QUERY, BAD_TOKEN, INTERNAL, NOT_FOUND, DrisError
from .indexing import InvertedIndex, rank_top_k, tokenize, top_terms
from .models import (
    CollectionDescription,
    HarvestBatch,
    HarvestReport,
    Hit,
    MetadataRecord,
    ResultList,
)
from .naming import DomainName, NodeRegistry
from .org import COLLECTION_TERM_LIMIT, DESCRIPTION_LIMIT, _check_batch, _load_registry, _write_snapshot
from .paging import HarvestPager
from .transport import DrisClient, Transport
from .wire import (
    BATCH_DEFAULT,
    MetadataRecordMsg,
    collection_to_msg,
    format_datestamp,
    msg_to_record,
    parse_datestamp,
    record_to_msg,
)

HARVEST_PAGE_SIZE = BATCH_DEFAULT


class HarvestNode:
    role = "mid"

    def __init__(self, domain: DomainName, clock: Clock, transport: Transport):
        self.domain = domain
        self.clock = clock
        self.registry = NodeRegistry(domain, clock)
        self.client = DrisClient(transport)
        self._records: dict[tuple[str, str], MetadataRecord] = {}
        self._index = InvertedIndex()
        self._cursors: dict[str, int] = {}
        self._pager = HarvestPager(scope=domain.text)
        self._lock = threading.RLock()

    # -- union state ---------------------------------------------------------

    @staticmethod
    def _record_tokens(record: MetadataRecord) -> list[str]:
        return tokenize(record.title + " " + record.description)

    @property
    def record_count(self) -> int:
        return len(self._records)

    def get_record(self, source: str, identifier: str) -> MetadataRecord | None:
        with self._lock:
            return self._records.get((source, identifier))

    def cursor_for(self, child: DomainName) -> int:
        return self._cursors.get(child.text, 0)

    def _upsert(self, record: MetadataRecord) -> bool:
        """Apply one harvested record; returns True when the key was new."""
        key = (record.source, record.identifier)
        old = self._records.get(key)
        if old is not None:
            self._index.remove(key, self._record_tokens(old))
        self._index.add(key, self._record_tokens(record))
        self._records[key] = record
        return old is None

    # -- harvesting ----------------------------------------------------------

    def harvest_once(self, child: DomainName, full: bool = False) -> HarvestReport:
        """One incremental pass against one child. On transport failure the
        cursor stays put; on a rejected token the pass restarts from the
        cursor once. full passes re-pull everything with whole-body payloads
        and leave the cursor alone (the union still stores metadata only)."""
        entry = self.registry.get(child)
        if entry is None:
            raise DrisError(NOT_FOUND, f"{child.text!r} is not a registered child")
        report = HarvestReport(child=child.text)
        seen_keys: set[tuple[str, str]] = set()
        restarts = 0
        while True:
            from_ts = 0 if full else self._cursors.get(child.text, 0)
            until_ts = self.clock.now()
            token: str | None = None
            try:
                while True:
                    batch, payload_bytes = self.client.records(
                        self.registry.resolve(child),
                        from_ts,
                        until_ts,
                        token=token,
                        batch=HARVEST_PAGE_SIZE,
                        full=full,
                    )
                    report.bytes += payload_bytes
                    with self._lock:
                        for record in batch.records:
                            if full:
                                record = _as_metadata(record)
                            key = (record.source, record.identifier)
                            was_new = self._upsert(record)
                            if key not in seen_keys:
                                seen_keys.add(key)
                                if was_new:
                                    report.new += 1
                                else:
                                    report.updated += 1
                        if batch.complete and not full:
                            self._cursors[child.text] = until_ts
                    if batch.complete:
                        return report
                    token = batch.token
            except DrisError as exc:
                if exc.code == BAD_TOKEN and restarts == 0:
                    restarts += 1
                    continue
                report.ok = False
                report.error = exc.code
                return report
            except Exception:
                # out-of-contract transport failure: same safety as TIMEOUT
                report.ok = False
                report.error = INTERNAL
                return report

    def run_harvest_round(self, full: bool = False) -> list[HarvestReport]:
        """Harvest every registered child; one child's failure never touches
        the others."""
        reports = []
        for entry in self.registry.children():
            try:
                reports.append(self.harvest_once(entry.domain, full=full))
            except Exception as exc:  # pragma: no cover - defensive isolation
                code = exc.code if isinstance(exc, DrisError) else INTERNAL
                reports.append(HarvestReport(child=entry.domain.text, ok=False, error=code))
        return reports

    # -- query surface ---------------------------------------------------------

    def search(self, query: str, k: int = 10) -> ResultList:
        if k < 1:
            raise DrisError(BAD_QUERY, "k must be >= 1")
        tokens = tokenize(query)
        if not tokens:
            raise DrisError(BAD_QUERY, "query has no searchable tokens")
        with self._lock:
            scores = self._index.bm25(tokens)
            ranked = rank_top_k(scores, k, tie_key=lambda key: key)
            hits = [
                Hit(
                    source=key[0],
                    identifier=key[1],
                    title=self._records[key].title,
                    kind=self._records[key].kind,
                    score=score,
                )
                for key, score in ranked
            ]
        return ResultList(query=query, k=k, partial=False, hits=hits)

    def aggregate_collection(self) -> CollectionDescription:
        with self._lock:
            kinds: dict[str, int] = {}
            for record in self._records.values():
                kinds[record.kind] = kinds.get(record.kind, 0) + 1
            terms = top_terms(self._index.term_document_frequencies(), COLLECTION_TERM_LIMIT)
            return CollectionDescription(
                domain=self.domain,
                doc_count=len(self._records),
                kinds=dict(sorted(kinds.items())),
                terms=terms,
                generated_at=self.clock.now(),
            )

    def list_records(
        self, from_ts: int, until_ts: int, token: str | None = None, batch: int = BATCH_DEFAULT
    ) -> HarvestBatch:
        """Re-expose union records so a parent node could harvest this one."""
        _check_batch(batch)
        if from_ts > until_ts:
            raise DrisError(BAD_DATESTAMP, "from must not be after until")

        def build_rows(snapshot: int) -> list[MetadataRecord]:
            with self._lock:
                rows = [
                    record
                    for record in self._records.values()
                    if from_ts <= record.datestamp < until_ts and record.datestamp <= snapshot
                ]
                rows.sort(key=lambda r: (r.datestamp, r.source, r.identifier))
                return rows

        return self._pager.page(from_ts, until_ts, token, batch, self.clock.now(), build_rows)

    # -- persistence ---------------------------------------------------------

    def snapshot_state(self) -> dict:
        with self._lock:
            records = [
                record_to_msg(self._records[key]).model_dump()
                for key in sorted(self._records)
            ]
            cursors = {child: format_datestamp(ts) for child, ts in sorted(self._cursors.items())}
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
            "union_records": records,
            "cursors": cursors,
            "registry": registry,
        }

    def load_state(self, state: dict) -> None:
        with self._lock:
            self._records.clear()
            self._index = InvertedIndex()
            for raw in state.get("union_records", []):
                self._upsert(msg_to_record(MetadataRecordMsg.model_validate(raw)))
            self._cursors = {
                child: parse_datestamp(text) for child, text in state.get("cursors", {}).items()
            }
            _load_registry(self.registry, state.get("registry", []))

    def save_snapshot(self, path: str) -> None:
        _write_snapshot(path, self.snapshot_state())

    def load_snapshot(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            self.load_state(json.load(fh))


def _as_metadata(record: MetadataRecord) -> MetadataRecord:
    """Reduce a full-body transfer back to the metadata form before indexing."""
    if len(record.description) <= DESCRIPTION_LIMIT:
        return record
    return dataclasses.replace(record, description=record.description[:DESCRIPTION_LIMIT])


class HarvestSchedule:
    """Period-driven harvesting: every registered child, every tick."""

    def __init__(self, node: HarvestNode, period: int):
        if period < 1:
            raise ValueError("period must be >= 1 second")
        self.node = node
        self.period = period
        self._next_due: int | None = None

    def start(self, now: int) -> None:
        self._next_due = now + self.period

    def run_due(self, now: int) -> list[HarvestReport]:
        """Run every tick that has come due; returns the concatenated reports."""
        if self._next_due is None:
            self.start(now)
        reports: list[HarvestReport] = []
        while self._next_due is not None and self._next_due <= now:
            reports.extend(self.node.run_harvest_round())
            self._next_due += self.period
        return reports
