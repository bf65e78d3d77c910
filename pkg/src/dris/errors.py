"""Protocol error codes shared by every DRIS node role.

Every failing request, local or remote, surfaces as a :class:`DrisError`
carrying one of the wire codes below; HTTP servers map the code to a status
and serialize the ``{"error": {"code", "message"}}`` envelope.
"""

from __future__ import annotations

BAD_QUERY = "BAD_QUERY"
BAD_DOMAIN = "BAD_DOMAIN"
BAD_DATESTAMP = "BAD_DATESTAMP"
BAD_TOKEN = "BAD_TOKEN"
NOT_CHILD = "NOT_CHILD"
NOT_FOUND = "NOT_FOUND"
TIMEOUT = "TIMEOUT"
INTERNAL = "INTERNAL"

WIRE_CODES = frozenset({
    BAD_QUERY,
    BAD_DOMAIN,
    BAD_DATESTAMP,
    BAD_TOKEN,
    NOT_CHILD,
    NOT_FOUND,
    TIMEOUT,
    INTERNAL,
})

HTTP_STATUS = {
    BAD_QUERY: 400,
    BAD_DOMAIN: 400,
    BAD_DATESTAMP: 400,
    BAD_TOKEN: 400,
    NOT_CHILD: 400,
    NOT_FOUND: 404,
    TIMEOUT: 504,
    INTERNAL: 500,
}


class DrisError(Exception):
    """A protocol-level failure with a wire error code."""

    def __init__(self, code: str, message: str):
        if code not in WIRE_CODES:
            code = INTERNAL
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message

    def to_wire(self) -> dict:
        return {"error": {"code": self.code, "message": self.message}}

    @property
    def http_status(self) -> int:
        return HTTP_STATUS[self.code]
