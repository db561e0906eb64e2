import queue
from pathlib import Path

import pytest

from minilang.compiler import compile_source, compile_units
from minilang.frontend import SourceUnit, parse
from minilang.instrument import ScopePattern, instrument
from minilang.session import DebugSession
from minilang.vm import VM

CORPUS_DIR = Path(__file__).parent / "corpus"
GOLDEN_DIR = Path(__file__).parent / "golden"

TWO_LINE_SRC = '''fn main() { let var = "text";
var = upper(var); }
'''


def corpus_names():
    return sorted(p.stem for p in CORPUS_DIR.glob("*.mls"))


def corpus_unit(name):
    return SourceUnit.from_file(CORPUS_DIR / f"{name}.mls")


def corpus_input(name):
    fixture = CORPUS_DIR / f"{name}.in"
    if fixture.exists():
        return fixture.read_text().splitlines()
    return []


class RecordingHooks:
    """Capture/output recorder for plain VM runs."""

    capture_active = True
    pending = ()

    def __init__(self):
        self.captures = []          # (site_id, value)
        self.output = []

    def on_capture(self, site_id, value):
        self.captures.append((site_id, value))
        return False

    def drain(self):
        return None

    def on_output(self, text):
        self.output.append(text)

    @property
    def stdout(self):
        return "".join(self.output)

    @property
    def values(self):
        return [v for _, v in self.captures]


class SilentHooks(RecordingHooks):
    capture_active = False


def record_run(image, input_lines=None):
    hooks = RecordingHooks()
    vm = VM(image, hooks=hooks, input_lines=input_lines)
    stop = vm.run()
    return hooks, stop


def plain_run(image, input_lines=None):
    hooks = SilentHooks()
    vm = VM(image, hooks=hooks, input_lines=input_lines)
    stop = vm.run()
    return hooks, stop


def build_images(units):
    """(plain image, fully instrumented image) for a list of SourceUnits."""
    image = compile_source(units)
    return image, instrument(image, ScopePattern("*"))


def parsed(units):
    return [(parse(u, require_main=False), u.unit_name) for u in units]


class SessionHarness:
    """Collects session events and offers synchronous command driving."""

    def __init__(self, src_or_units, input_lines=None, scope="*",
                 poll_interval=50):
        if isinstance(src_or_units, str):
            units = [SourceUnit.from_text(src_or_units, "main", "main.mls")]
        else:
            units = src_or_units
        image = compile_source(units)
        self.instrumented = instrument(image, ScopePattern(scope))
        self.session = DebugSession(self.instrumented, sources=units,
                                    input_lines=input_lines,
                                    poll_interval=poll_interval)
        self.events = []
        self.queue = queue.Queue()
        self.session.add_listener(self.events.append)
        self.session.add_listener(self.queue.put)
        self.thread = None

    def start(self):
        self.thread = self.session.start_thread()
        return self

    def call(self, name, body=None):
        cmd = self.session.call(name, body)
        return cmd

    def wait_stop(self, timeout=10.0):
        """Next stopped/terminated event (skipping output events)."""
        while True:
            message = self.queue.get(timeout=timeout)
            if message.get("type") != "event":
                continue
            if message["event"] in ("stopped", "terminated"):
                return message

    def drive(self, name, body=None):
        """Issue a command and, if it resumes the target, wait for the stop."""
        cmd = self.call(name, body)
        if cmd.ok and name in ("find", "findNext", "continue",
                               "stepIn", "stepOver", "stepOut"):
            return cmd, self.wait_stop()
        if cmd.ok and name == "launch":
            return cmd, self.wait_stop()
        return cmd, None

    def stop(self):
        if self.session.state != "Terminated":
            self.session.call("stop")
        if self.thread:
            self.thread.join(timeout=5)

    def stopped_events(self):
        return [m for m in self.events
                if m.get("type") == "event" and m["event"] == "stopped"]

    def event_names(self):
        return [m["event"] for m in self.events if m.get("type") == "event"]


@pytest.fixture
def two_line():
    return SessionHarness(TWO_LINE_SRC)
