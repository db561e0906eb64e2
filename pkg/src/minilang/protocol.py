"""Wire message schema: newline-delimited JSON objects.

Three directions share one envelope: requests carry `id` + `command`,
responses echo the request `id`, events carry an `event` name and no id.
Serialization is canonical (sorted keys, no whitespace) so transcripts are
byte-stable.
"""

import json

from .session import COMMANDS

EVENTS = {"stopped", "output", "terminated"}
STOP_REASONS = {"entry", "match", "step", "fault", "stopped"}
TERMINATE_REASONS = {"completed", "stopped"}


class ProtocolError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def encode(message):
    """Canonical single-line encoding of one protocol message."""
    return json.dumps(message, separators=(",", ":"), sort_keys=True) + "\n"


def decode(line):
    if isinstance(line, bytes):
        line = line.decode("utf-8", errors="replace")
    line = line.strip()
    try:
        message = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError("bad_request", f"not valid JSON: {e}") from e
    if not isinstance(message, dict):
        raise ProtocolError("bad_request", "message must be a JSON object")
    return message


def validate_request(message):
    """Check the request envelope; returns (id, command, body)."""
    if message.get("type", "request") != "request":
        raise ProtocolError("bad_request", "expected a request")
    req_id = message.get("id")
    if not isinstance(req_id, int) or isinstance(req_id, bool):
        raise ProtocolError("bad_request", "request id must be an integer")
    command = message.get("command")
    if not isinstance(command, str):
        raise ProtocolError("bad_request", "request command must be a string")
    body = message.get("body", {})
    if not isinstance(body, dict):
        raise ProtocolError("bad_request", "request body must be an object")
    if command not in COMMANDS:
        raise ProtocolError("bad_request", f"unknown command {command!r}")
    return req_id, command, body


def error_response(req_id, code, message):
    return {"type": "response", "id": req_id if isinstance(req_id, int) else 0,
            "ok": False, "error": code, "message": message}
