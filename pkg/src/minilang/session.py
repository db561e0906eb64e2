"""Debug-session state machine and runtime string matching.

The session owns the active query and the VM.  Commands arrive through an
ordered mailbox and are drained by the VM thread at poll points, so a
command enqueued before a poll point is visible at that poll point and a
capture is only ever evaluated against one query version.

Responses and events are emitted to listeners on the VM thread, in order.
"""

from collections import deque
from dataclasses import dataclass, field
import re
import threading

from .bytecode import site_lookup
from .errors import EmptyQuery, InvalidRegex
from .vm import VM, DEFAULT_POLL_INTERVAL

NOT_STARTED = "NotStarted"
RUNNING = "Running"
PAUSED_AT_MATCH = "PausedAtMatch"
PAUSED_AT_STEP = "PausedAtStep"
TERMINATED = "Terminated"

PAUSED_STATES = (PAUSED_AT_MATCH, PAUSED_AT_STEP)

BAD_REQUEST = "bad_request"
BAD_STATE = "bad_state"

COMMANDS = {"launch", "find", "findNext", "continue", "stepIn", "stepOver",
            "stepOut", "pause", "stackTrace", "variables", "source", "stop"}


@dataclass
class Query:
    text: str
    match_case: bool = True
    whole_word: bool = False
    regex: bool = False
    skip_repeated_site: bool = False

    def __post_init__(self):
        if not self.text:
            raise EmptyQuery("query text must not be empty")
        self._pattern = None
        if self.regex:
            flags = 0 if self.match_case else re.IGNORECASE
            try:
                self._pattern = re.compile(self.text, flags)
            except re.error as e:
                raise InvalidRegex(f"bad regular expression: {e}") from e


def _whole_word_contains(haystack, needle):
    start = 0
    while True:
        i = haystack.find(needle, start)
        if i < 0:
            return False
        before = haystack[i - 1] if i > 0 else ""
        j = i + len(needle)
        after = haystack[j] if j < len(haystack) else ""
        if not before.isalnum() and not after.isalnum():
            return True
        start = i + 1


def matches(value, query):
    """Containment test with the familiar text-search options."""
    if query.regex:
        return query._pattern.search(value) is not None
    text = query.text
    if not query.match_case:
        text = text.lower()
        value = value.lower()
    if query.whole_word:
        return _whole_word_contains(value, text)
    return text in value


@dataclass(frozen=True)
class CaptureEvent:
    site: object
    value: str
    sequence_no: int


class Command:
    __slots__ = ("name", "body", "id", "ok", "result", "error", "message", "done")

    def __init__(self, name, body=None, id=None):
        self.name = name
        self.body = body or {}
        self.id = id
        self.ok = None
        self.result = None
        self.error = None
        self.message = None
        self.done = threading.Event()

    def wait(self, timeout=None):
        self.done.wait(timeout)
        return self


def query_from_body(body):
    return Query(
        text=body.get("text", ""),
        match_case=bool(body.get("matchCase", True)),
        whole_word=bool(body.get("wholeWord", False)),
        regex=bool(body.get("regex", False)),
        skip_repeated_site=bool(body.get("skipRepeats", False)),
    )


class DebugSession:
    """State machine over {NotStarted, Running, PausedAtMatch, PausedAtStep,
    Terminated}; also serves as the VM's hooks object."""

    def __init__(self, image, sources=None, input_lines=None,
                 poll_interval=DEFAULT_POLL_INTERVAL):
        self.image = image
        self.sources = sources or []            # [SourceUnit]
        self.vm = VM(image, hooks=self, input_lines=input_lines,
                     poll_interval=poll_interval)
        self.state = NOT_STARTED
        self.active_query = None
        self.searching = False
        self.last_match_site = None
        self.match_count = 0
        self.capture_active = False
        self.pending = deque()
        self._cond = threading.Condition()
        self._listeners = []
        self._seq = 0

    # --- client side ------------------------------------------------------

    def add_listener(self, fn):
        self._listeners.append(fn)

    def submit(self, name, body=None, id=None):
        """Enqueue a command; the reply arrives via listeners and cmd.wait()."""
        cmd = Command(name, body, id)
        with self._cond:
            if self.state == TERMINATED:
                self._reject(cmd, BAD_STATE, "session is over")
                return cmd
            self.pending.append(cmd)
            self._cond.notify_all()
        return cmd

    def call(self, name, body=None, timeout=10.0):
        """Synchronous convenience wrapper around submit()."""
        cmd = self.submit(name, body).wait(timeout)
        return cmd

    def start_thread(self):
        thread = threading.Thread(target=self.run, daemon=True)
        thread.start()
        return thread

    # --- emission (VM thread) ---------------------------------------------

    def _emit(self, message):
        for fn in self._listeners:
            fn(message)

    def _reply(self, cmd, body=None):
        cmd.ok = True
        cmd.result = body
        message = {"type": "response", "id": cmd.id, "ok": True}
        if body is not None:
            message["body"] = body
        if cmd.id is not None:
            self._emit(message)
        cmd.done.set()

    def _reject(self, cmd, error, message):
        cmd.ok = False
        cmd.error = error
        cmd.message = message
        if cmd.id is not None:
            self._emit({"type": "response", "id": cmd.id, "ok": False,
                        "error": error, "message": message})
        cmd.done.set()

    def _event(self, name, body):
        self._emit({"type": "event", "event": name, "body": body})

    # --- main loop (VM thread) --------------------------------------------

    def run(self):
        while self.state != TERMINATED:
            if self.state == RUNNING:
                self._handle_stop(self.vm.run())
            else:
                self._dispatch(self._next_command())
        with self._cond:
            leftovers = list(self.pending)
            self.pending.clear()
        for cmd in leftovers:
            self._reject(cmd, BAD_STATE, "session is over")

    def _next_command(self):
        with self._cond:
            while not self.pending:
                self._cond.wait()
            return self.pending.popleft()

    # --- VM hooks ---------------------------------------------------------

    def drain(self):
        """Process commands at a poll point while the target is running."""
        verdict = None
        while True:
            with self._cond:
                if not self.pending:
                    return verdict
                cmd = self.pending.popleft()
            v = self._dispatch_running(cmd)
            if v == "stop" or verdict is None:
                verdict = v or verdict

    def on_capture(self, site_id, value):
        query = self.active_query
        if query is None:
            return False
        self._seq += 1
        if not matches(value, query):
            return False
        if query.skip_repeated_site and site_id == self.last_match_site:
            return False
        return True

    def on_output(self, text):
        self._event("output", {"text": text})

    # --- command handling -------------------------------------------------

    def _set_query(self, cmd):
        try:
            query = query_from_body(cmd.body)
        except (EmptyQuery, InvalidRegex) as e:
            self._reject(cmd, BAD_REQUEST, str(e))
            return None
        self.active_query = query
        self.searching = True
        self.capture_active = True
        self.last_match_site = None
        return query

    def _dispatch_running(self, cmd):
        """Commands that are legal while the target is running."""
        if cmd.name == "find":
            if self._set_query(cmd) is None:
                return None
            self._reply(cmd)
            return None
        if cmd.name == "pause":
            self._reply(cmd)
            return "pause"
        if cmd.name == "stop":
            self._reply(cmd)
            return "stop"
        if cmd.name == "source":
            self._reply(cmd, self._source_body(cmd.body))
            return None
        self._reject(cmd, BAD_STATE, f"{cmd.name!r} not allowed while running")
        return None

    def _dispatch(self, cmd):
        name = cmd.name
        state = self.state
        if name == "source":
            self._reply(cmd, self._source_body(cmd.body))
        elif name == "launch":
            if state != NOT_STARTED:
                self._reject(cmd, BAD_STATE, "program already launched")
                return
            self.vm.launch()
            self.state = PAUSED_AT_STEP
            self._reply(cmd)
            top = self.vm.frames[-1]
            self._event("stopped", {"reason": "entry",
                                    "function": top.func.name, "line": top.line})
        elif name == "find":
            if self._set_query(cmd) is None:
                return
            if state == NOT_STARTED:
                self.vm.launch()
            self.state = RUNNING
            self._reply(cmd)
        elif name == "findNext":
            if state not in PAUSED_STATES:
                self._reject(cmd, BAD_STATE, "target is not paused")
            elif self.active_query is None:
                self._reject(cmd, BAD_STATE, "no active query")
            else:
                self.searching = True
                self.capture_active = True
                self.state = RUNNING
                self._reply(cmd)
        elif name == "continue":
            if state not in PAUSED_STATES:
                self._reject(cmd, BAD_STATE, "target is not paused")
            else:
                self.searching = False
                self.capture_active = False
                self.state = RUNNING
                self._reply(cmd)
        elif name in ("stepIn", "stepOver", "stepOut"):
            if state not in PAUSED_STATES:
                self._reject(cmd, BAD_STATE, "target is not paused")
            else:
                self.vm.set_step({"stepIn": "in", "stepOver": "over",
                                  "stepOut": "out"}[name])
                self.state = RUNNING
                self._reply(cmd)
        elif name == "stackTrace":
            if state not in PAUSED_STATES:
                self._reject(cmd, BAD_STATE, "target is not paused")
            else:
                frames = [{"index": f["index"], "function": f["function"],
                           "unit": f["unit"], "line": f["line"]}
                          for f in self.vm.snapshot_stack()]
                self._reply(cmd, {"frames": frames})
        elif name == "variables":
            if state not in PAUSED_STATES:
                self._reject(cmd, BAD_STATE, "target is not paused")
            else:
                index = cmd.body.get("frameIndex", 0)
                snapshot = self.vm.snapshot_stack()
                if not 0 <= index < len(snapshot):
                    self._reject(cmd, BAD_REQUEST, "no such frame")
                else:
                    self._reply(cmd, {"variables": snapshot[index]["locals"]})
        elif name == "pause":
            self._reject(cmd, BAD_STATE, "target is not running")
        elif name == "stop":
            self._terminate("stopped")
            self._reply(cmd)
        else:
            self._reject(cmd, BAD_REQUEST, f"unknown command {cmd.name!r}")

    # --- VM stop handling -------------------------------------------------

    def _terminate(self, reason):
        with self._cond:
            self.state = TERMINATED
        self._event("terminated", {"reason": reason})

    def _handle_stop(self, stop):
        self.vm.step_plan = None
        if stop.kind == "done":
            self._terminate("completed")
            return
        if stop.kind == "stop":
            self._terminate("stopped")
            return
        top = self.vm.frames[-1]
        if stop.kind == "match":
            self.state = PAUSED_AT_MATCH
            self.searching = False
            self.capture_active = False
            self.last_match_site = stop.site_id
            self.match_count += 1
            site = site_lookup(self.image, stop.site_id)
            self._event("stopped", {
                "reason": "match", "siteId": site.id,
                "function": top.func.name, "unit": site.unit, "line": site.line,
                "kind": site.kind, "value": stop.value,
                "matchCount": self.match_count})
        elif stop.kind == "step":
            self.state = PAUSED_AT_STEP
            self._event("stopped", {"reason": "step",
                                    "function": top.func.name, "line": top.line})
        elif stop.kind == "pause":
            self.state = PAUSED_AT_STEP
            self._event("stopped", {"reason": "stopped",
                                    "function": top.func.name, "line": top.line})
        elif stop.kind == "fault":
            self.state = PAUSED_AT_STEP
            self._event("stopped", {"reason": "fault", "message": stop.message,
                                    "function": top.func.name, "line": top.line})
        else:
            raise AssertionError(stop)

    def _source_body(self, body):
        unit = body.get("unit")
        for src in self.sources:
            if unit is None or src.unit_name == unit:
                return {"path": src.path, "unit": src.unit_name,
                        "content": src.source}
        return {"path": "", "unit": unit or "", "content": ""}
