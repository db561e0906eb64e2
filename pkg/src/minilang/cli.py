"""Command-line entry point: compile, run, instrument and debug MiniLang
programs without any UI.

Transcript format of `debug`: prompts are prefixed `> `, debugger events
`! `, program output is unprefixed.  Scripted runs (`--script`) are
deterministic and double as golden tests.
"""

import argparse
import asyncio
import json
import queue
import sys
from pathlib import Path

from .bench import (DEFAULT_ITERATIONS, DEFAULT_QUERY, DEFAULT_RUNS,
                    run_benchmark)
from .bytecode import disassemble
from .compiler import compile_source
from .errors import (CompileError, EmptyScope, MiniLangError, MiniSyntaxError,
                     WorkloadFault)
from .frontend import SourceUnit
from .instrument import ScopePattern, instrument
from .server import DEFAULT_PORT, DebugServer
from .session import DebugSession
from .vm import VM, NullHooks

EXIT_COMPILE = 1
EXIT_FAULT = 2
EXIT_USAGE = 64

REPL_HELP = """\
commands:
  find <text>   set the query and run until a capture matches it
  next          resume until the next matching capture
  step          step in    over  step over    out   step out
  continue      resume without match-pausing
  stack         show the call stack
  locals [n]    show locals of frame n (default 0, the top)
  launch        start the program paused at entry
  quit          stop the target and exit"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="mls", description="MiniLang tools: run, disassemble "
                     "and debug programs with runtime string search")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_program_args(p, scripted=False):
        p.add_argument("files", nargs="+", metavar="file.mls",
                       help="source files; the first one is the entry unit")
        p.add_argument("--input", metavar="FIXTURE",
                       help="text file whose lines feed readline()")
        p.add_argument("--scope", default="*",
                       help="glob over unit.function names to instrument")
        if scripted:
            p.add_argument("--script", metavar="FILE",
                           help="command file to run instead of a prompt")
            p.add_argument("--skip-repeats", action="store_true",
                           help="do not re-pause at the previous match site")
            p.add_argument("--ignore-case", action="store_true")
            p.add_argument("--regex", action="store_true")
            p.add_argument("--whole-word", action="store_true")

    p_run = sub.add_parser("run", help="compile and run, no instrumentation")
    p_run.add_argument("files", nargs="+", metavar="file.mls")
    p_run.add_argument("--input", metavar="FIXTURE")

    p_debug = sub.add_parser("debug", help="instrument and debug interactively")
    add_program_args(p_debug, scripted=True)

    p_serve = sub.add_parser("serve", help="instrument and serve the debug protocol")
    add_program_args(p_serve)
    p_serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", metavar="DIR",
                         help="static web UI directory to serve over HTTP")

    p_dis = sub.add_parser("disasm", help="print the bytecode disassembly")
    add_program_args(p_dis)
    p_dis.add_argument("--instrument", action="store_true",
                       help="disassemble the instrumented image")

    p_bench = sub.add_parser("bench", help="measure instrumentation overhead")
    p_bench.add_argument("--workload", default="string-churn")
    p_bench.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    p_bench.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    p_bench.add_argument("--query", default=DEFAULT_QUERY)
    p_bench.add_argument("--json", action="store_true", dest="json_only",
                         help="print only the JSON report")
    return parser


def load_units(paths):
    return [SourceUnit.from_file(p) for p in paths]


def read_input_fixture(path):
    if path is None:
        return []
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_run(args):
    units = load_units(args.files)
    image = compile_source(units)
    vm = VM(image, hooks=NullHooks(), input_lines=read_input_fixture(args.input))
    stop = vm.run()
    if stop.kind == "fault":
        print(f"runtime fault: {stop.message}", file=sys.stderr)
        return EXIT_FAULT
    return 0


def cmd_disasm(args):
    units = load_units(args.files)
    image = compile_source(units)
    if args.instrument:
        image = instrument(image, ScopePattern(args.scope))
    sys.stdout.write(disassemble(image))
    return 0


def format_event(message):
    body = message.get("body", {})
    if message["event"] == "output":
        return body["text"]
    if message["event"] == "terminated":
        return f"! terminated reason={body['reason']}\n"
    parts = [f"! stopped reason={body['reason']}"]
    if body["reason"] == "match":
        parts.append(f"site={body['siteId']} function={body['function']} "
                     f"line={body['line']} kind={body['kind']} "
                     f"value={json.dumps(body['value'])} matches={body['matchCount']}")
    elif body["reason"] == "fault":
        parts.append(f"function={body['function']} line={body['line']} "
                     f"message={json.dumps(body['message'])}")
    else:
        parts.append(f"function={body['function']} line={body['line']}")
    return " ".join(parts) + "\n"


class Repl:
    """Thin client over a DebugSession; one protocol command per line."""

    RESUMING = {"find", "findNext", "continue", "stepIn", "stepOver", "stepOut"}

    def __init__(self, session, args, out=None):
        self.session = session
        self.args = args
        self.out = out if out is not None else sys.stdout
        self.events = queue.Queue()
        session.add_listener(self.events.put)
        self.terminated = False

    def emit(self, text):
        self.out.write(text)
        self.out.flush()

    def drain_events(self, block=False):
        """Print pending events; with block=True, wait for a stop."""
        while True:
            try:
                message = self.events.get(block=block, timeout=None)
            except queue.Empty:
                return
            self.emit(format_event(message))
            if message["event"] == "terminated":
                self.terminated = True
                return
            if message["event"] == "stopped":
                return

    def translate(self, line):
        words = line.split()
        name = words[0]
        if name == "find":
            text = line[len("find"):].strip()
            return "find", {"text": text,
                            "matchCase": not self.args.ignore_case,
                            "wholeWord": self.args.whole_word,
                            "regex": self.args.regex,
                            "skipRepeats": self.args.skip_repeats}
        simple = {"next": "findNext", "step": "stepIn", "over": "stepOver",
                  "out": "stepOut", "continue": "continue", "stack": "stackTrace",
                  "launch": "launch", "pause": "pause", "stop": "stop"}
        if name in simple:
            return simple[name], {}
        if name == "locals":
            index = int(words[1]) if len(words) > 1 else 0
            return "variables", {"frameIndex": index}
        return None, None

    def execute(self, line, echo=True):
        line = line.strip()
        if not line or line.startswith("#"):
            return True
        if echo:
            self.emit(f"> {line}\n")
        if line in ("quit", "exit"):
            if not self.terminated:
                self.session.submit("stop")
                self.drain_events(block=True)
            return False
        if line == "help":
            self.emit(REPL_HELP + "\n")
            return True
        name, body = self.translate(line)
        if name is None:
            self.emit(f"! error unknown command {line.split()[0]!r} (try help)\n")
            return True
        cmd = self.session.call(name, body)
        if not cmd.ok:
            self.emit(f"! error {cmd.error}: {cmd.message}\n")
            return True
        if name == "stackTrace":
            for f in cmd.result["frames"]:
                self.emit(f"! frame #{f['index']} {f['unit']}.{f['function']}"
                          f" line {f['line']}\n")
        elif name == "variables":
            if not cmd.result["variables"]:
                self.emit("! no locals\n")
            for v in cmd.result["variables"]:
                self.emit(f"! local {v['name']} = {v['value']}\n")
        elif name == "launch":
            self.drain_events(block=True)
        elif name in self.RESUMING:
            try:
                self.drain_events(block=True)
            except KeyboardInterrupt:
                self.session.submit("pause")
                self.drain_events(block=True)
        return True

    def run_script(self, lines):
        for line in lines:
            if not self.execute(line):
                return
        if not self.terminated:
            self.execute("quit")

    def run_interactive(self):
        self.emit("MiniLang debugger; type `help` for commands.\n")
        while True:
            try:
                line = input("> ")
            except EOFError:
                line = "quit"
            except KeyboardInterrupt:
                self.emit("\n")
                continue
            # input() already echoes the line; no prompt duplication
            if not self.execute(line, echo=False):
                return


def make_session(args):
    units = load_units(args.files)
    image = compile_source(units)
    instrumented = instrument(image, ScopePattern(args.scope))
    return DebugSession(instrumented, sources=units,
                        input_lines=read_input_fixture(args.input))


def cmd_debug(args):
    session = make_session(args)
    session.start_thread()
    repl = Repl(session, args)
    if args.script:
        lines = Path(args.script).read_text(encoding="utf-8").splitlines()
        repl.run_script(lines)
    else:
        repl.run_interactive()
    return 0


def cmd_serve(args):
    units = load_units(args.files)
    image = compile_source(units)
    instrumented = instrument(image, ScopePattern(args.scope))
    input_lines = read_input_fixture(args.input)

    def factory():
        return DebugSession(instrumented, sources=units,
                            input_lines=input_lines)

    ui_dir = args.ui
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if candidate.is_dir():
            ui_dir = candidate
    server = DebugServer(factory, host=args.host, port=args.port, ui_dir=ui_dir)
    print(f"serving debug protocol on {args.host}:{args.port}"
          + (f" (web UI from {ui_dir})" if ui_dir else ""))
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        pass
    return 0


def cmd_bench(args):
    try:
        report = run_benchmark(workload=args.workload, runs=args.runs,
                               iterations=args.iters, query_text=args.query)
    except WorkloadFault as e:
        print(f"benchmark error: {e}", file=sys.stderr)
        return 1
    if not args.json_only:
        print(report.format_text())
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "disasm":
            return cmd_disasm(args)
        if args.command == "debug":
            return cmd_debug(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "bench":
            return cmd_bench(args)
    except EmptyScope as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (MiniSyntaxError, CompileError) as e:
        print(f"compile error: {e}", file=sys.stderr)
        return EXIT_COMPILE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MiniLangError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
