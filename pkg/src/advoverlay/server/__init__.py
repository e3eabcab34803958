from .app import create_app
from .protocol import (
    ALL_TYPES,
    CLIENT_TYPES,
    CONFIG_FIELDS,
    FRAME_ENCODING,
    PAYLOAD_SCHEMAS,
    SERVER_TYPES,
    WIRE_MESSAGE_SCHEMA,
    MalformedMessage,
    canonical_json,
    make_message,
    parse_client_message,
)
from .session import DEFAULT_ITERS_PER_FRAME, DEFAULT_MAX_FRAME_BYTES, SessionCore

__all__ = [
    "create_app",
    "ALL_TYPES",
    "CLIENT_TYPES",
    "CONFIG_FIELDS",
    "FRAME_ENCODING",
    "PAYLOAD_SCHEMAS",
    "SERVER_TYPES",
    "WIRE_MESSAGE_SCHEMA",
    "MalformedMessage",
    "canonical_json",
    "make_message",
    "parse_client_message",
    "DEFAULT_ITERS_PER_FRAME",
    "DEFAULT_MAX_FRAME_BYTES",
    "SessionCore",
]
