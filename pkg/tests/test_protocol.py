import json
from importlib import resources

import jsonschema
import pytest

from minilang import protocol
from minilang.session import COMMANDS


def schema():
    text = resources.files("minilang").joinpath("protocol_schema.json").read_text()
    return json.loads(text)


def test_encode_is_canonical_single_line():
    out = protocol.encode({"b": 1, "a": {"z": 2, "y": 3}})
    assert out == '{"a":{"y":3,"z":2},"b":1}\n'


def test_round_trip_identity():
    samples = [
        {"type": "request", "id": 1, "command": "find",
         "body": {"text": "x", "matchCase": False}},
        {"type": "response", "id": 1, "ok": True},
        {"type": "event", "event": "stopped",
         "body": {"reason": "match", "siteId": 0, "value": "x",
                  "function": "main", "unit": "main", "line": 1,
                  "kind": "Const", "matchCount": 1}},
    ]
    for message in samples:
        assert protocol.decode(protocol.encode(message)) == message


def test_decode_rejects_garbage():
    with pytest.raises(protocol.ProtocolError) as e:
        protocol.decode("not json\n")
    assert e.value.code == "bad_request"
    with pytest.raises(protocol.ProtocolError):
        protocol.decode("[1,2,3]\n")


def test_decode_accepts_bytes():
    assert protocol.decode(b'{"id":1}\n') == {"id": 1}


def test_validate_request_happy_path():
    rid, command, body = protocol.validate_request(
        {"type": "request", "id": 7, "command": "stackTrace"})
    assert (rid, command, body) == (7, "stackTrace", {})


def test_validate_request_rejections():
    bad = [
        {"type": "event", "event": "stopped", "body": {}},
        {"type": "request", "command": "launch"},                # no id
        {"type": "request", "id": True, "command": "launch"},    # bool id
        {"type": "request", "id": 1, "command": "selfDestruct"},
        {"type": "request", "id": 1, "command": "find", "body": "text"},
        {"type": "request", "id": 1},
    ]
    for message in bad:
        with pytest.raises(protocol.ProtocolError) as e:
            protocol.validate_request(message)
        assert e.value.code == "bad_request"


def test_error_response_shape():
    resp = protocol.error_response(3, "bad_state", "not paused")
    assert resp == {"type": "response", "id": 3, "ok": False,
                    "error": "bad_state", "message": "not paused"}
    # unparseable requests may have no usable id; fall back to 0
    assert protocol.error_response(None, "bad_request", "x")["id"] == 0


# --- schema file ------------------------------------------------------------

def test_schema_commands_match_implementation():
    defs = schema()["$defs"]
    assert set(defs["request"]["properties"]["command"]["enum"]) == COMMANDS
    assert set(defs["event"]["properties"]["event"]["enum"]) == protocol.EVENTS
    assert set(defs["stopReason"]["enum"]) == protocol.STOP_REASONS
    assert set(defs["terminateReason"]["enum"]) == protocol.TERMINATE_REASONS


def test_schema_validates_live_traffic():
    validator = jsonschema.Draft202012Validator(schema())
    messages = [
        {"type": "request", "id": 1, "command": "launch"},
        {"type": "request", "id": 2, "command": "find", "body": {"text": "t"}},
        {"type": "response", "id": 2, "ok": True},
        {"type": "response", "id": 3, "ok": False, "error": "bad_state",
         "message": "target is not paused"},
        {"type": "event", "event": "output", "body": {"text": "hi\n"}},
        {"type": "event", "event": "terminated", "body": {"reason": "completed"}},
    ]
    for message in messages:
        validator.validate(message)
    with pytest.raises(jsonschema.ValidationError):
        validator.validate({"type": "request", "id": 1, "command": "nope"})
    with pytest.raises(jsonschema.ValidationError):
        validator.validate({"type": "event", "event": "stopped"})


# --- golden wire transcript -------------------------------------------------

def wire_transcript():
    """Run the documented find/findNext/stackTrace/continue walk and return
    the full outgoing wire text, responses and events interleaved."""
    import queue
    from pathlib import Path

    from minilang.compiler import compile_source
    from minilang.frontend import SourceUnit
    from minilang.instrument import ScopePattern, instrument
    from minilang.session import DebugSession

    src = 'fn main() { let var = "text";\nvar = upper(var); }\n'
    units = [SourceUnit.from_text(src, "main", "main.mls")]
    image = instrument(compile_source(units), ScopePattern("*"))
    session = DebugSession(image, sources=units, poll_interval=50)
    lines = []
    stops = queue.Queue()

    def listen(message):
        lines.append(protocol.encode(message))
        if message.get("event") in ("stopped", "terminated"):
            stops.put(message)

    session.add_listener(listen)
    thread = session.start_thread()
    script = [
        ("find", {"text": "text", "matchCase": False}),
        ("findNext", {}),
        ("stackTrace", {}),
        ("findNext", {}),
        ("continue", {}),
    ]
    for i, (command, body) in enumerate(script, start=1):
        cmd = session.submit(command, body, id=i).wait(10)
        assert cmd.ok, (command, cmd.message)
        if command != "stackTrace":
            stops.get(timeout=10)
    thread.join(timeout=5)
    return "".join(lines)


def test_wire_transcript_matches_golden():
    from pathlib import Path
    golden = Path(__file__).parent / "golden" / "two_line_wire.ndjson"
    assert wire_transcript() == golden.read_text()


def test_wire_transcript_messages_are_schema_valid():
    validator = jsonschema.Draft202012Validator(schema())
    for line in wire_transcript().splitlines():
        validator.validate(json.loads(line))
