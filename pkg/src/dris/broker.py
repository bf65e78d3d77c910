"""Country-layer broker: collection selection, fan-out, and result fusion.

The broker stores nothing but its children's collection descriptions. A query
is routed to the children whose term statistics suggest they can answer it,
dispatched concurrently, and the per-child rankings are fused after per-child
min-max score normalization. One slow or dead child never fails the query.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .clock import Clock
from .errors import BAD_QUERY, INTERNAL, DrisError
from .indexing import tokenize, top_terms
from .models import CollectionDescription, Hit, MergedHit, MergedResult
from .naming import DomainName, NodeRegistry, RegistryEntry
from .org import COLLECTION_TERM_LIMIT
from .transport import DrisClient, Transport

DEFAULT_MAX_COLLECTIONS = 10
DEFAULT_TIMEOUT_MS = 2000
DEFAULT_PARALLELISM = 16


@dataclass
class ChildOutcome:
    hits: list[Hit] | None = None
    error: str | None = None


class BrokerNode:
    role = "broker"

    def __init__(
        self,
        domain: DomainName,
        clock: Clock,
        transport: Transport,
        max_collections: int = DEFAULT_MAX_COLLECTIONS,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        parallelism: int = DEFAULT_PARALLELISM,
    ):
        self.domain = domain
        self.clock = clock
        self.registry = NodeRegistry(domain, clock)
        self.client = DrisClient(transport)
        self.max_collections = max_collections
        self.timeout_ms = timeout_ms
        self.parallelism = max(1, parallelism)
        self.health: dict[str, bool] = {}
        self._health_lock = threading.Lock()

    # -- collection selection --------------------------------------------------

    def select_collections(self, query: str, max_n: int | None = None) -> list[RegistryEntry]:
        """Rank children by summed ln(1 + df) over the query's unique tokens.
        Children scoring zero are dropped; if nobody scores, every child is
        returned so rare terms outside the stored statistics still get asked."""
        max_n = self.max_collections if max_n is None else max_n
        if max_n < 1:
            raise DrisError(BAD_QUERY, "max_n must be >= 1")
        tokens = tokenize(query)
        if not tokens:
            raise DrisError(BAD_QUERY, "query has no searchable tokens")
        unique = sorted(set(tokens))
        entries = self.registry.children()
        scored: list[tuple[float, RegistryEntry]] = []
        for entry in entries:
            terms = entry.collection.terms
            score = sum(math.log(1.0 + terms.get(t, 0)) for t in unique)
            if score > 0.0:
                scored.append((score, entry))
        if not scored:
            return entries
        scored.sort(key=lambda item: (-item[0], item[1].domain.text))
        return [entry for _, entry in scored[:max_n]]

    # -- fan-out ----------------------------------------------------------------

    def fan_out(
        self,
        query: str,
        children: list[RegistryEntry],
        k: int,
        timeout_ms: int | None = None,
    ) -> dict[str, ChildOutcome]:
        timeout = self.timeout_ms if timeout_ms is None else timeout_ms

        def one(entry: RegistryEntry) -> tuple[str, ChildOutcome]:
            try:
                hits = self.client.search(entry.endpoint, query, k, timeout_ms=timeout)
                outcome = ChildOutcome(hits=hits)
            except DrisError as exc:
                outcome = ChildOutcome(error=exc.code)
            except Exception:
                outcome = ChildOutcome(error=INTERNAL)
            with self._health_lock:
                self.health[entry.domain.text] = outcome.error is None
            return entry.domain.text, outcome

        if self.parallelism == 1 or len(children) <= 1:
            results = [one(entry) for entry in children]
        else:
            with ThreadPoolExecutor(max_workers=min(self.parallelism, len(children))) as pool:
                results = list(pool.map(one, children))
        return dict(results)

    # -- merge -------------------------------------------------------------------

    @staticmethod
    def merge(outcomes: dict[str, ChildOutcome], k: int, query: str = "") -> MergedResult:
        """Min-max normalize each child's scores to [0,1] (constant lists map
        to 1.0), dedupe on (source, identifier) keeping the best normalized
        score, then order by (normalized desc, source asc, identifier asc)."""
        per_child: dict[str, dict] = {}
        best: dict[tuple[str, str], MergedHit] = {}
        partial = False
        for child in sorted(outcomes):
            outcome = outcomes[child]
            if outcome.error is not None:
                per_child[child] = {"error": outcome.error}
                partial = True
                continue
            hits = outcome.hits or []
            per_child[child] = {"hits": len(hits)}
            if not hits:
                continue
            lo = min(h.score for h in hits)
            hi = max(h.score for h in hits)
            for hit in hits:
                normalized = 1.0 if hi <= lo else (hit.score - lo) / (hi - lo)
                key = (hit.source, hit.identifier)
                candidate = MergedHit(
                    source=hit.source,
                    identifier=hit.identifier,
                    title=hit.title,
                    kind=hit.kind,
                    raw_score=hit.score,
                    normalized_score=normalized,
                )
                current = best.get(key)
                if current is None or candidate.normalized_score > current.normalized_score:
                    best[key] = candidate
        ordered = sorted(
            best.values(), key=lambda h: (-h.normalized_score, h.source, h.identifier)
        )
        return MergedResult(query=query, k=k, partial=partial, hits=ordered[:k], per_child=per_child)

    # -- end-to-end ----------------------------------------------------------------

    def search(self, query: str, k: int = 10, timeout_ms: int | None = None) -> MergedResult:
        if k < 1:
            raise DrisError(BAD_QUERY, "k must be >= 1")
        selected = self.select_collections(query)
        outcomes = self.fan_out(query, selected, k, timeout_ms=timeout_ms)
        return self.merge(outcomes, k, query=query)

    def aggregate_collection(self) -> CollectionDescription:
        """Sum the stored child descriptions; per-term frequencies add because
        children index disjoint collections."""
        doc_count = 0
        kinds: dict[str, int] = {}
        term_sums: dict[str, int] = {}
        for entry in self.registry.children():
            cd = entry.collection
            doc_count += cd.doc_count
            for kind, count in cd.kinds.items():
                kinds[kind] = kinds.get(kind, 0) + count
            for term, df in cd.terms.items():
                term_sums[term] = term_sums.get(term, 0) + df
        return CollectionDescription(
            domain=self.domain,
            doc_count=doc_count,
            kinds=dict(sorted(kinds.items())),
            terms=top_terms(term_sums, COLLECTION_TERM_LIMIT),
            generated_at=self.clock.now(),
        )
