"""Core value types passed between node roles."""

from __future__ import annotations

from dataclasses import dataclass, field

from .naming import DomainName


@dataclass
class Document:
    """A full-text item held at a leaf node. datestamp is epoch seconds (last
    modification); when None the node stamps it at ingest time."""

    identifier: str
    kind: str
    title: str
    body: str
    datestamp: int | None = None


@dataclass(frozen=True)
class MetadataRecord:
    """Harvested descriptive surrogate of a document."""

    identifier: str
    source: str
    kind: str
    title: str
    description: str
    datestamp: int


@dataclass
class CollectionDescription:
    """Per-node statistical summary stored upstream instead of the data itself."""

    domain: DomainName
    doc_count: int
    kinds: dict[str, int]
    terms: dict[str, int]
    generated_at: int


def empty_collection(domain: DomainName, generated_at: int = 0) -> CollectionDescription:
    return CollectionDescription(domain=domain, doc_count=0, kinds={}, terms={}, generated_at=generated_at)


@dataclass(frozen=True)
class Hit:
    source: str
    identifier: str
    title: str
    kind: str
    score: float


@dataclass
class ResultList:
    query: str
    k: int
    partial: bool
    hits: list[Hit]


@dataclass
class HarvestBatch:
    """One page of a harvest response plus its continuation cursor."""

    records: list[MetadataRecord]
    token: str | None
    complete: bool


@dataclass
class HarvestReport:
    """Outcome of one harvest pass against one child."""

    child: str
    new: int = 0
    updated: int = 0
    bytes: int = 0
    ok: bool = True
    error: str | None = None


@dataclass(frozen=True)
class MergedHit:
    source: str
    identifier: str
    title: str
    kind: str
    raw_score: float
    normalized_score: float


@dataclass
class MergedResult:
    """Fused ranking across children, with per-child outcome attribution."""

    query: str
    k: int
    partial: bool
    hits: list[MergedHit]
    per_child: dict[str, dict] = field(default_factory=dict)
