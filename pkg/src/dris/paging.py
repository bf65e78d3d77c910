"""Stable pagination for incremental record harvests.

The first request of a pass freezes the eligible records under a snapshot
datestamp and materializes the sorted list server-side; continuation tokens
carry (snapshot, offset) and index into that frozen list. Upserts that land
between pages therefore cannot shift positions, so one pass never skips or
duplicates a record. A continuation whose pass has been evicted (node restart,
too many concurrent passes) is rejected as an expired token; the harvester
restarts that pass from its cursor.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Callable

from .errors import BAD_TOKEN, DrisError
from .models import HarvestBatch, MetadataRecord
from .wire import mint_token, parse_token

MAX_ACTIVE_PASSES = 16


class HarvestPager:
    def __init__(self, scope: str, max_passes: int = MAX_ACTIVE_PASSES):
        self._scope = scope
        self._max_passes = max_passes
        self._passes: OrderedDict[tuple, list[MetadataRecord]] = OrderedDict()
        self._lock = threading.Lock()

    def page(
        self,
        from_ts: int,
        until_ts: int,
        token: str | None,
        batch: int,
        now: int,
        build_rows: Callable[[int], list[MetadataRecord]],
        pass_tag: str = "",
    ) -> HarvestBatch:
        """Serve one page. build_rows(snapshot) must return every record with
        from <= datestamp < until and datestamp <= snapshot, fully sorted.
        pass_tag separates passes that build different row contents over the
        same window (e.g. full-body versus metadata payloads)."""
        if token is None:
            snapshot = now
            rows = build_rows(snapshot)
            key = (snapshot, from_ts, until_ts, pass_tag)
            if len(rows) <= batch:
                return HarvestBatch(records=rows, token=None, complete=True)
            with self._lock:
                self._passes[key] = rows
                self._passes.move_to_end(key)
                while len(self._passes) > self._max_passes:
                    self._passes.popitem(last=False)
            return HarvestBatch(records=rows[:batch], token=mint_token(snapshot, batch, self._scope), complete=False)

        snapshot, offset = parse_token(token, self._scope)
        key = (snapshot, from_ts, until_ts, pass_tag)
        with self._lock:
            rows = self._passes.get(key)
            if rows is not None:
                self._passes.move_to_end(key)
        if rows is None:
            raise DrisError(BAD_TOKEN, "token does not match an active harvest pass")
        if offset >= len(rows):
            raise DrisError(BAD_TOKEN, "token offset is out of range")
        page = rows[offset : offset + batch]
        if offset + batch >= len(rows):
            with self._lock:
                self._passes.pop(key, None)
            return HarvestBatch(records=page, token=None, complete=True)
        return HarvestBatch(records=page, token=mint_token(snapshot, offset + batch, self._scope), complete=False)
