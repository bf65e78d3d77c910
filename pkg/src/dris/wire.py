"""HTTP+JSON wire contract shared by every node role.

Defines the datestamp text form, the opaque resumption token, and the pydantic
message models for each endpoint. Codecs are pure: encode then decode returns
an equal model, unknown JSON fields are ignored, missing required fields fail.
"""

from __future__ import annotations

import base64
import calendar
import hashlib
import re
from datetime import datetime, timezone

from pydantic import BaseModel, ValidationError

from .errors import BAD_DATESTAMP, BAD_TOKEN, INTERNAL, DrisError
from .models import (
    CollectionDescription,
    Document,
    HarvestBatch,
    HarvestReport,
    Hit,
    MetadataRecord,
)
from .naming import parse_domain

BATCH_DEFAULT = 100
BATCH_MIN = 1
BATCH_MAX = 10000

# ---------------------------------------------------------------------------
# Datestamps: UTC second granularity, "YYYY-MM-DDThh:mm:ssZ", half-open ranges.

_DATESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_DATESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"


def parse_datestamp(text: str) -> int:
    """Strictly parse wire text to epoch seconds; rejects anything non-canonical."""
    if not _DATESTAMP_RE.match(text):
        raise DrisError(BAD_DATESTAMP, f"not a datestamp: {text!r}")
    try:
        parsed = datetime.strptime(text, _DATESTAMP_FMT)
    except ValueError:
        raise DrisError(BAD_DATESTAMP, f"not a real calendar instant: {text!r}") from None
    return calendar.timegm(parsed.timetuple())


def format_datestamp(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime(_DATESTAMP_FMT)


# ---------------------------------------------------------------------------
# Resumption tokens: URL-safe text carrying (snapshot datestamp, offset),
# scoped to the minting node and tamper-evident via a truncated digest.

_TOKEN_SALT = "dris-resumption-v1"


def _token_digest(payload: str) -> str:
    return hashlib.sha256(f"{_TOKEN_SALT}:{payload}".encode("utf-8")).hexdigest()[:12]


def mint_token(snapshot: int, offset: int, scope: str = "") -> str:
    if offset < 0:
        raise ValueError("offset must be >= 0")
    payload = f"{scope}|{snapshot}|{offset}"
    raw = f"{payload}|{_token_digest(payload)}"
    return base64.urlsafe_b64encode(raw.encode("utf-8")).decode("ascii").rstrip("=")


def parse_token(token: str, scope: str = "") -> tuple[int, int]:
    """Recover (snapshot, offset); rejects tampered or foreign tokens."""
    try:
        padded = token + "=" * (-len(token) % 4)
        raw = base64.urlsafe_b64decode(padded.encode("ascii")).decode("utf-8")
    except Exception:
        raise DrisError(BAD_TOKEN, "token is not decodable") from None
    parts = raw.rsplit("|", 3)
    if len(parts) != 4:
        raise DrisError(BAD_TOKEN, "token has wrong shape")
    token_scope, snapshot_text, offset_text, digest = parts
    if _token_digest(f"{token_scope}|{snapshot_text}|{offset_text}") != digest:
        raise DrisError(BAD_TOKEN, "token digest mismatch")
    if token_scope != scope:
        raise DrisError(BAD_TOKEN, f"token was minted by {token_scope!r}")
    try:
        snapshot, offset = int(snapshot_text), int(offset_text)
    except ValueError:
        raise DrisError(BAD_TOKEN, "token fields are not integers") from None
    if offset < 0:
        raise DrisError(BAD_TOKEN, "token offset is negative")
    return snapshot, offset


# ---------------------------------------------------------------------------
# Message schemas. Field names and orders are normative for the protocol.


class SearchHitMsg(BaseModel):
    source: str
    id: str
    title: str
    kind: str
    score: float


class SearchResponseMsg(BaseModel):
    query: str
    k: int
    partial: bool
    hits: list[SearchHitMsg]


class MetadataRecordMsg(BaseModel):
    identifier: str
    source: str
    kind: str
    title: str
    description: str
    datestamp: str


class RecordsResponseMsg(BaseModel):
    records: list[MetadataRecordMsg]
    token: str | None
    complete: bool


class CollectionMsg(BaseModel):
    domain: str
    doc_count: int
    kinds: dict[str, int]
    terms: dict[str, int]
    generated_at: str


class RegisterRequestMsg(BaseModel):
    domain: str
    endpoint: str
    collection: CollectionMsg


class RegisterResponseMsg(BaseModel):
    ok: bool


class ChildMsg(BaseModel):
    domain: str
    endpoint: str
    registered_at: str


class ChildrenResponseMsg(BaseModel):
    children: list[ChildMsg]


class DocumentMsg(BaseModel):
    identifier: str
    kind: str
    title: str
    body: str
    datestamp: str | None = None


class IngestRequestMsg(BaseModel):
    documents: list[DocumentMsg]


class IngestResponseMsg(BaseModel):
    ingested: int


class BrokerHitMsg(BaseModel):
    source: str
    id: str
    title: str
    kind: str
    score: float
    raw_score: float


class BrokerSearchResponseMsg(BaseModel):
    query: str
    k: int
    partial: bool
    hits: list[BrokerHitMsg]
    per_child: dict[str, dict]


class HarvestReportMsg(BaseModel):
    child: str
    new: int
    updated: int
    bytes: int
    ok: bool
    error: str | None


class HarvestRoundResponseMsg(BaseModel):
    reports: list[HarvestReportMsg]


class ErrorDetailMsg(BaseModel):
    code: str
    message: str


class ErrorResponseMsg(BaseModel):
    error: ErrorDetailMsg


def encode(message: BaseModel) -> bytes:
    return message.model_dump_json().encode("utf-8")


def decode(model_cls: type, data: bytes, code: str = INTERNAL):
    try:
        return model_cls.model_validate_json(data)
    except ValidationError as exc:
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise DrisError(code, f"malformed {model_cls.__name__} ({where}: {first.get('msg', 'invalid')})") from None


# ---------------------------------------------------------------------------
# Conversions between wire messages and core values.


def record_to_msg(record: MetadataRecord) -> MetadataRecordMsg:
    return MetadataRecordMsg(
        identifier=record.identifier,
        source=record.source,
        kind=record.kind,
        title=record.title,
        description=record.description,
        datestamp=format_datestamp(record.datestamp),
    )


def msg_to_record(msg: MetadataRecordMsg) -> MetadataRecord:
    return MetadataRecord(
        identifier=msg.identifier,
        source=msg.source,
        kind=msg.kind,
        title=msg.title,
        description=msg.description,
        datestamp=parse_datestamp(msg.datestamp),
    )


def batch_to_msg(batch: HarvestBatch) -> RecordsResponseMsg:
    return RecordsResponseMsg(
        records=[record_to_msg(r) for r in batch.records],
        token=batch.token,
        complete=batch.complete,
    )


def msg_to_batch(msg: RecordsResponseMsg) -> HarvestBatch:
    return HarvestBatch(
        records=[msg_to_record(r) for r in msg.records],
        token=msg.token,
        complete=msg.complete,
    )


def collection_to_msg(cd: CollectionDescription) -> CollectionMsg:
    return CollectionMsg(
        domain=cd.domain.text,
        doc_count=cd.doc_count,
        kinds=dict(cd.kinds),
        terms=dict(cd.terms),
        generated_at=format_datestamp(cd.generated_at),
    )


def msg_to_collection(msg: CollectionMsg) -> CollectionDescription:
    return CollectionDescription(
        domain=parse_domain(msg.domain),
        doc_count=msg.doc_count,
        kinds=dict(msg.kinds),
        terms=dict(msg.terms),
        generated_at=parse_datestamp(msg.generated_at),
    )


def hit_to_msg(hit: Hit) -> SearchHitMsg:
    return SearchHitMsg(source=hit.source, id=hit.identifier, title=hit.title, kind=hit.kind, score=hit.score)


def msg_to_hit(msg: SearchHitMsg) -> Hit:
    return Hit(source=msg.source, identifier=msg.id, title=msg.title, kind=msg.kind, score=msg.score)


def document_to_msg(doc: Document) -> DocumentMsg:
    return DocumentMsg(
        identifier=doc.identifier,
        kind=doc.kind,
        title=doc.title,
        body=doc.body,
        datestamp=None if doc.datestamp is None else format_datestamp(doc.datestamp),
    )


def msg_to_document(msg: DocumentMsg) -> Document:
    return Document(
        identifier=msg.identifier,
        kind=msg.kind,
        title=msg.title,
        body=msg.body,
        datestamp=None if msg.datestamp is None else parse_datestamp(msg.datestamp),
    )


def report_to_msg(report: HarvestReport) -> HarvestReportMsg:
    return HarvestReportMsg(
        child=report.child,
        new=report.new,
        updated=report.updated,
        bytes=report.bytes,
        ok=report.ok,
        error=report.error,
    )
