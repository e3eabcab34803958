"""Wire protocol: message envelope, payload schemas, canonical encoding.

Every message is a JSON object {type, session_id, sequence, payload}.
Client-to-server types: frame, mask_update, config_update. Server-to-client
types: detections, adv_frame, stats, error, plus mask_update/config_update
echoes that acknowledge the applied state. Responses carry the originating
frame's sequence number as payload.frame_seq.
"""

from __future__ import annotations

import json

CLIENT_TYPES = ("frame", "mask_update", "config_update")
SERVER_TYPES = ("detections", "adv_frame", "stats", "error", "mask_update", "config_update")
ALL_TYPES = ("frame", "mask_update", "config_update", "detections", "adv_frame", "stats", "error")

FRAME_ENCODING = "png-base64"

CONFIG_FIELDS = (
    "mode", "target_class", "xi", "alpha", "iterations", "monochrome",
    "channel_source", "application", "monochrome_signed", "iters_per_frame",
)

_RECT_SCHEMA = {
    "type": "object",
    "required": ["x", "y", "w", "h"],
    "properties": {
        "x": {"type": "integer"},
        "y": {"type": "integer"},
        "w": {"type": "integer", "minimum": 0},
        "h": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

_BOX_SCHEMA = {
    "type": "object",
    "required": ["class_id", "score", "x", "y", "w", "h"],
    "properties": {
        "class_id": {"type": "integer", "minimum": 1},
        "score": {"type": "number", "minimum": 0, "maximum": 1},
        "x": {"type": "number"},
        "y": {"type": "number"},
        "w": {"type": "number", "exclusiveMinimum": 0},
        "h": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

_FRAME_PAYLOAD = {
    "type": "object",
    "required": ["width", "height", "encoding", "data"],
    "properties": {
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
        "encoding": {"const": FRAME_ENCODING},
        "data": {"type": "string"},
        "frame_seq": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

PAYLOAD_SCHEMAS = {
    "frame": _FRAME_PAYLOAD,
    "adv_frame": _FRAME_PAYLOAD,
    "mask_update": {
        "type": "object",
        "required": ["rects"],
        "properties": {"rects": {"type": "array", "items": _RECT_SCHEMA}},
        "additionalProperties": False,
    },
    "config_update": {
        "type": "object",
        "properties": {
            "mode": {"enum": ["one-targeted", "multi-targeted", "multi-untargeted"]},
            "target_class": {"type": ["integer", "null"]},
            "xi": {"type": "number"},
            "alpha": {"type": "number"},
            "iterations": {"type": "integer"},
            "monochrome": {"type": "boolean"},
            "channel_source": {"enum": ["red", "green", "blue", "average"]},
            "application": {"enum": ["filter", "patch", "overlay"]},
            "monochrome_signed": {"type": "boolean"},
            "iters_per_frame": {"type": "integer"},
        },
        "additionalProperties": False,
    },
    "detections": {
        "type": "object",
        "required": ["benign_count", "boxes", "attack_ms", "frame_seq"],
        "properties": {
            "benign_count": {"type": "integer", "minimum": 0},
            "boxes": {"type": "array", "items": _BOX_SCHEMA},
            "attack_ms": {"type": "number", "minimum": 0},
            "frame_seq": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
    "stats": {
        "type": "object",
        "required": ["loss", "iterations_total", "success", "frame_seq"],
        "properties": {
            "loss": {"type": "number"},
            "iterations_total": {"type": "integer", "minimum": 0},
            "success": {"type": "boolean"},
            "frame_seq": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
    "error": {
        "type": "object",
        "required": ["code", "message"],
        "properties": {
            "code": {"type": "string"},
            "message": {"type": "string"},
            "frame_seq": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
}

WIRE_MESSAGE_SCHEMA = {
    "type": "object",
    "required": ["type", "session_id", "sequence", "payload"],
    "properties": {
        "type": {"enum": list(ALL_TYPES)},
        "session_id": {"type": "string", "minLength": 1},
        "sequence": {"type": "integer", "minimum": 1},
        "payload": {"type": "object"},
    },
    "additionalProperties": False,
    "allOf": [
        {
            "if": {"properties": {"type": {"const": t}}},
            "then": {"properties": {"payload": schema}},
        }
        for t, schema in PAYLOAD_SCHEMAS.items()
    ],
}


def canonical_json(message: dict) -> str:
    """Stable byte encoding: sorted keys, no whitespace."""
    return json.dumps(message, sort_keys=True, separators=(",", ":"))


def make_message(msg_type: str, session_id: str, sequence: int, payload: dict) -> dict:
    return {
        "type": msg_type,
        "session_id": session_id,
        "sequence": sequence,
        "payload": payload,
    }


class MalformedMessage(ValueError):
    pass


def parse_client_message(text: str) -> dict:
    """Parse and structurally validate an inbound message. Raises MalformedMessage."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedMessage(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise MalformedMessage("message must be a JSON object")
    for key in ("type", "session_id", "sequence", "payload"):
        if key not in obj:
            raise MalformedMessage(f"missing field {key!r}")
    if obj["type"] not in CLIENT_TYPES:
        raise MalformedMessage(f"unknown client message type {obj['type']!r}")
    if not isinstance(obj["session_id"], str) or not obj["session_id"]:
        raise MalformedMessage("session_id must be a non-empty string")
    if not isinstance(obj["sequence"], int) or obj["sequence"] < 1:
        raise MalformedMessage("sequence must be a positive integer")
    if not isinstance(obj["payload"], dict):
        raise MalformedMessage("payload must be an object")
    extras = set(obj) - {"type", "session_id", "sequence", "payload"}
    if extras:
        raise MalformedMessage(f"unexpected fields {sorted(extras)}")
    return obj
