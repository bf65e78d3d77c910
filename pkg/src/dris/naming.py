"""Domain names, the DRIS class-name / URL conventions, and child registries.

A node's identity is its dotted domain name. The label count decides which
layer of the fabric the node sits on, and each non-leaf node keeps a registry
of its direct children (one extra label, same suffix).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterator

from .clock import Clock
from .errors import BAD_DOMAIN, BAD_QUERY, NOT_CHILD, DrisError

if TYPE_CHECKING:
    from .models import CollectionDescription

MAX_LABELS = 8
MAX_LABEL_LEN = 63
_LABEL_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789-")

RESOURCE_KINDS = ("webpage", "ftp", "video", "pdf", "picture", "database")


class Layer(Enum):
    COUNTRY = 1
    SUB_INTERNET = 2
    ORGANIZATION = 3


@dataclass(frozen=True)
class DomainName:
    """A validated dotted name; canonical form is lowercase labels joined by '.'."""

    labels: tuple[str, ...]

    @property
    def text(self) -> str:
        return ".".join(self.labels)

    def __str__(self) -> str:
        return self.text

    def parent(self) -> "DomainName":
        if len(self.labels) < 2:
            raise DrisError(BAD_DOMAIN, f"{self.text!r} has no parent")
        return DomainName(self.labels[1:])

    def is_child_of(self, other: "DomainName") -> bool:
        """True when self is a strict one-level child of other."""
        return len(self.labels) == len(other.labels) + 1 and self.labels[1:] == other.labels


def _check_label(label: str, raw: str) -> str:
    if not label:
        raise DrisError(BAD_DOMAIN, f"empty label in {raw!r}")
    if len(label) > MAX_LABEL_LEN:
        raise DrisError(BAD_DOMAIN, f"label longer than {MAX_LABEL_LEN} chars in {raw!r}")
    if label[0] == "-" or label[-1] == "-":
        raise DrisError(BAD_DOMAIN, f"label may not start or end with '-' in {raw!r}")
    if not set(label) <= _LABEL_CHARS:
        raise DrisError(BAD_DOMAIN, f"illegal character in {raw!r}")
    return label


def parse_domain(raw: str) -> DomainName:
    """Parse case-insensitively into canonical lowercase form."""
    lowered = raw.lower()
    labels = lowered.split(".")
    if len(labels) > MAX_LABELS:
        raise DrisError(BAD_DOMAIN, f"more than {MAX_LABELS} labels in {raw!r}")
    return DomainName(tuple(_check_label(label, raw) for label in labels))


def class_name(domain: DomainName) -> str:
    """Class name under the shared namespace: 'DRIS.' + labels reversed."""
    return "DRIS." + ".".join(reversed(domain.labels))


def service_url(domain: DomainName) -> str:
    """Conventional service location: 'http://DRIS.' + the domain itself."""
    return "http://DRIS." + domain.text


def layer_of(domain: DomainName) -> Layer:
    n = len(domain.labels)
    if n == 1:
        return Layer.COUNTRY
    if n == 2:
        return Layer.SUB_INTERNET
    return Layer.ORGANIZATION


def resource_class(domain: DomainName, kind: str) -> str:
    """Per-resource-kind class name, e.g. webpage search under a node."""
    if kind not in RESOURCE_KINDS:
        raise DrisError(BAD_QUERY, f"unknown resource kind {kind!r}")
    return f"{class_name(domain)}.{kind}"


@dataclass
class RegistryEntry:
    domain: DomainName
    endpoint: str
    collection: "CollectionDescription"
    registered_at: int


class NodeRegistry:
    """Direct-child index kept by a non-leaf node.

    Only strict one-level children of the owner may register; registration is
    an upsert keyed by domain. Reads and writes share one lock so entries are
    updated atomically.
    """

    def __init__(self, owner: DomainName, clock: Clock):
        self.owner = owner
        self._clock = clock
        self._entries: dict[str, RegistryEntry] = {}
        self._lock = threading.RLock()

    def register(self, child: DomainName, endpoint: str, collection: "CollectionDescription") -> None:
        if not child.is_child_of(self.owner):
            raise DrisError(NOT_CHILD, f"{child.text!r} is not a direct child of {self.owner.text!r}")
        if collection.domain != child:
            raise DrisError(BAD_DOMAIN, f"collection domain {collection.domain.text!r} does not match {child.text!r}")
        with self._lock:
            self._entries[child.text] = RegistryEntry(
                domain=child,
                endpoint=endpoint,
                collection=collection,
                registered_at=self._clock.now(),
            )

    def resolve(self, domain: DomainName) -> str:
        """Registered endpoint when present, else the URL convention."""
        with self._lock:
            entry = self._entries.get(domain.text)
        return entry.endpoint if entry is not None else service_url(domain)

    def get(self, domain: DomainName) -> RegistryEntry | None:
        with self._lock:
            return self._entries.get(domain.text)

    def children(self) -> list[RegistryEntry]:
        """Entries sorted by domain text."""
        with self._lock:
            return [self._entries[key] for key in sorted(self._entries)]

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, domain: DomainName) -> bool:
        return domain.text in self._entries

    def __iter__(self) -> Iterator[RegistryEntry]:
        return iter(self.children())
