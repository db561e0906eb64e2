"""Operand-stack virtual machine with capture hooks and step plans.

The VM advances only on whichever thread calls `run()`.  Control commands
reach it through the hooks object, which is polled at every Capture opcode
and every `poll_interval` instructions; `run()` returns a StopInfo whenever
a hook requests a pause, a step plan completes, the program faults, or the
program terminates.
"""

from dataclasses import dataclass
import json

from .bytecode import (
    PUSH_CONST, LOAD_LOCAL, STORE_LOCAL, LOAD_FIELD, STORE_FIELD, NEW_RECORD,
    CALL, CALL_BUILTIN, BIN_OP, JUMP, JUMP_IF_FALSE, RETURN, POP, CAPTURE,
    record_field_names,
)
from .errors import RuntimeFault

DEFAULT_POLL_INTERVAL = 1000


@dataclass(frozen=True)
class RecordRef:
    heap_id: int


class NullHooks:
    """Hooks for a plain, undebugged run."""

    capture_active = False
    pending = ()

    def on_capture(self, site_id, value):
        return False

    def drain(self):
        return None

    def on_output(self, text):
        print(text, end="")


class Frame:
    __slots__ = ("func", "ip", "locals", "stack", "line")

    def __init__(self, func, args):
        self.func = func
        self.ip = 0
        self.locals = args + [None] * (len(func.local_names) - len(args))
        self.stack = []
        self.line = func.line_table[0] if func.line_table else 0


@dataclass
class StopInfo:
    kind: str                   # done match step pause stop fault
    site_id: int = None
    value: str = None
    message: str = None


class StepPlan:
    __slots__ = ("kind", "start_line", "start_depth")

    def __init__(self, kind, start_line, start_depth):
        self.kind = kind        # "in", "over", "out"
        self.start_line = start_line
        self.start_depth = start_depth

    def hit(self, line, depth):
        if self.kind == "in":
            return line != self.start_line
        if self.kind == "over":
            return line != self.start_line and depth <= self.start_depth
        return depth < self.start_depth


def render_value(value, heap, depth=1):
    """Debugger-facing rendering; records expand one level deep."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, RecordRef):
        if depth <= 0:
            return "{...}"
        fields = heap[value.heap_id]
        inner = ", ".join(f"{k}: {render_value(v, heap, depth - 1)}"
                          for k, v in fields.items())
        return "{" + inner + "}"
    return repr(value)


def display_value(value, heap):
    """Program-facing rendering used by `print` and `str`."""
    if isinstance(value, str):
        return value
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    return render_value(value, heap)


def values_equal(a, b, _bool=bool):
    if isinstance(a, RecordRef) or isinstance(b, RecordRef):
        return (isinstance(a, RecordRef) and isinstance(b, RecordRef)
                and a.heap_id == b.heap_id)
    if (type(a) is bool) != (type(b) is bool):
        return False
    if a is None or b is None:
        return a is b
    if type(a) is not type(b):
        return False
    return a == b


def _type_name(v):
    if v is None:
        return "null"
    if type(v) is bool:
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, str):
        return "string"
    return "record"


class VM:
    def __init__(self, image, hooks=None, input_lines=None,
                 poll_interval=DEFAULT_POLL_INTERVAL):
        self.image = image
        self.hooks = hooks if hooks is not None else NullHooks()
        self.funcs = {f.name: f for f in image.functions}
        self.sites = image.capture_sites
        self.poll_interval = poll_interval
        self.frames = []
        self.heap = []
        self.status = "ready"   # ready running paused done faulted
        self.step_plan = None
        self._input = list(input_lines or [])
        self._input_pos = 0
        self._budget = poll_interval

    # --- lifecycle --------------------------------------------------------

    def launch(self):
        assert self.status == "ready"
        entry = self.funcs[self.image.entry]
        self.frames.append(Frame(entry, []))
        self.status = "paused"

    def set_step(self, kind):
        top = self.frames[-1]
        self.step_plan = StepPlan(kind, top.line, len(self.frames))

    def snapshot_stack(self):
        out = []
        for index, frame in enumerate(reversed(self.frames)):
            out.append({
                "index": index,
                "function": frame.func.name,
                "unit": frame.func.unit,
                "line": frame.line,
                "locals": [{"name": n, "value": render_value(v, self.heap)}
                           for n, v in zip(frame.func.local_names, frame.locals)],
            })
        return out

    def _readline(self):
        if self._input_pos < len(self._input):
            line = self._input[self._input_pos]
            self._input_pos += 1
            return line
        return ""

    def _fault(self, message):
        frame = self.frames[-1]
        raise RuntimeFault(message, function=frame.func.name, line=frame.line)

    # --- main loop --------------------------------------------------------

    def run(self):
        if self.status == "faulted":
            # cannot resume past a fault; the target is effectively finished
            self.frames = []
            self.status = "done"
            return StopInfo("done")
        assert self.status in ("paused", "ready")
        if self.status == "ready":
            self.launch()
        self.status = "running"
        hooks = self.hooks
        frames = self.frames
        heap = self.heap
        # hot-path locals: `pending` is the stable mailbox object, `plan`
        # can only be set between run() calls
        pending = hooks.pending
        plan = self.step_plan
        budget = self._budget
        poll_interval = self.poll_interval
        constants = self.image.constants
        try:
            while frames:
                frame = frames[-1]
                func = frame.func
                code = func.code
                ip = frame.ip
                instr = code[ip]
                line = func.line_table[ip]
                frame.line = line
                if plan is not None and plan.hit(line, len(frames)):
                    self.step_plan = None
                    self.status = "paused"
                    return StopInfo("step")
                budget -= 1
                if budget <= 0:
                    budget = poll_interval
                    if pending:
                        verdict = hooks.drain()
                        if verdict is not None:
                            self.status = "paused"
                            return StopInfo(verdict)
                frame.ip = ip + 1
                op = instr.opcode
                stack = frame.stack
                # A Capture always directly follows the instruction that
                # produced its value and is only reachable by falling
                # through from it (jumps are never retargeted onto one), so
                # the frequent producers handle a trailing Capture inline.
                # That skips the loop preamble for it, which is safe: a
                # step plan cannot hit at the capture (same line, same
                # depth) and the poll contract only needs the pending
                # check.  Rarer producers fall through to the plain
                # CAPTURE branch below.
                if op == PUSH_CONST:
                    stack.append(constants[instr.operand])
                    nxt = code[ip + 1]
                    if nxt.opcode == CAPTURE:
                        frame.ip = ip + 2
                        if pending:
                            verdict = hooks.drain()
                            if verdict is not None:
                                self.status = "paused"
                                return StopInfo(verdict)
                        if hooks.capture_active:
                            top = stack[-1]
                            if type(top) is str and hooks.on_capture(nxt.operand, top):
                                self.status = "paused"
                                return StopInfo("match", site_id=nxt.operand,
                                                value=top)
                elif op == LOAD_LOCAL:
                    stack.append(frame.locals[instr.operand])
                    nxt = code[ip + 1]
                    if nxt.opcode == CAPTURE:
                        frame.ip = ip + 2
                        if pending:
                            verdict = hooks.drain()
                            if verdict is not None:
                                self.status = "paused"
                                return StopInfo(verdict)
                        if hooks.capture_active:
                            top = stack[-1]
                            if type(top) is str and hooks.on_capture(nxt.operand, top):
                                self.status = "paused"
                                return StopInfo("match", site_id=nxt.operand,
                                                value=top)
                elif op == CAPTURE:
                    if pending:
                        verdict = hooks.drain()
                        if verdict is not None:
                            self.status = "paused"
                            return StopInfo(verdict)
                    if hooks.capture_active:
                        top = stack[-1]
                        if type(top) is str and hooks.on_capture(instr.operand, top):
                            self.status = "paused"
                            return StopInfo("match", site_id=instr.operand, value=top)
                elif op == STORE_LOCAL:
                    frame.locals[instr.operand] = stack.pop()
                elif op == BIN_OP:
                    right = stack.pop()
                    left = stack.pop()
                    stack.append(self._binop(instr.operand, left, right))
                    nxt = code[ip + 1]
                    if nxt.opcode == CAPTURE:
                        frame.ip = ip + 2
                        if pending:
                            verdict = hooks.drain()
                            if verdict is not None:
                                self.status = "paused"
                                return StopInfo(verdict)
                        if hooks.capture_active:
                            top = stack[-1]
                            if type(top) is str and hooks.on_capture(nxt.operand, top):
                                self.status = "paused"
                                return StopInfo("match", site_id=nxt.operand,
                                                value=top)
                elif op == JUMP:
                    frame.ip = instr.operand
                elif op == JUMP_IF_FALSE:
                    cond = stack.pop()
                    if type(cond) is not bool:
                        self._fault(f"condition must be bool, got {_type_name(cond)}")
                    if not cond:
                        frame.ip = instr.operand
                elif op == LOAD_FIELD:
                    obj = stack.pop()
                    if obj is None:
                        self._fault(f"null field access: .{instr.operand}")
                    if not isinstance(obj, RecordRef):
                        self._fault(f"field access on {_type_name(obj)}")
                    fields = heap[obj.heap_id]
                    if instr.operand not in fields:
                        self._fault(f"record has no field {instr.operand!r}")
                    stack.append(fields[instr.operand])
                elif op == STORE_FIELD:
                    value = stack.pop()
                    obj = stack.pop()
                    if obj is None:
                        self._fault(f"null field access: .{instr.operand}")
                    if not isinstance(obj, RecordRef):
                        self._fault(f"field access on {_type_name(obj)}")
                    fields = heap[obj.heap_id]
                    if instr.operand not in fields:
                        self._fault(f"record has no field {instr.operand!r}")
                    fields[instr.operand] = value
                elif op == NEW_RECORD:
                    names = record_field_names(self.image, instr)
                    values = [stack.pop() for _ in names][::-1]
                    heap.append(dict(zip(names, values)))
                    stack.append(RecordRef(len(heap) - 1))
                elif op == CALL_BUILTIN:
                    self._builtin(instr.operand, stack)
                    nxt = code[ip + 1]
                    if nxt.opcode == CAPTURE:
                        frame.ip = ip + 2
                        if pending:
                            verdict = hooks.drain()
                            if verdict is not None:
                                self.status = "paused"
                                return StopInfo(verdict)
                        if hooks.capture_active:
                            top = stack[-1]
                            if type(top) is str and hooks.on_capture(nxt.operand, top):
                                self.status = "paused"
                                return StopInfo("match", site_id=nxt.operand,
                                                value=top)
                elif op == CALL:
                    callee = self.funcs[instr.operand]
                    args = [stack.pop() for _ in range(callee.arity)][::-1]
                    frames.append(Frame(callee, args))
                elif op == RETURN:
                    result = stack.pop()
                    frames.pop()
                    if frames:
                        frames[-1].stack.append(result)
                elif op == POP:
                    stack.pop()
                else:
                    self._fault(f"bad opcode {op!r}")
        except RuntimeFault as fault:
            frame = frames[-1]
            frame.ip -= 1           # report the faulting instruction
            self.status = "faulted"
            self.step_plan = None
            return StopInfo("fault", message=str(fault))
        self.status = "done"
        self.step_plan = None
        return StopInfo("done")

    # --- operators and builtins ------------------------------------------

    def _binop(self, op, left, right):
        if op == "eq":
            return values_equal(left, right)
        if op == "ne":
            return not values_equal(left, right)
        if op == "add":
            if type(left) is str or type(right) is str:
                return self._concat(left, right)
            if type(left) is int and type(right) is int:
                return left + right
            self._fault(f"cannot add {_type_name(left)} and {_type_name(right)}")
        if type(left) is not int or type(right) is not int:
            self._fault(f"operator {op!r} needs ints, got "
                        f"{_type_name(left)} and {_type_name(right)}")
        if op == "sub":
            return left - right
        if op == "mul":
            return left * right
        if op == "div":
            if right == 0:
                self._fault("division by zero")
            return left // right
        if op == "lt":
            return left < right
        self._fault(f"bad operator {op!r}")

    def _concat(self, left, right):
        def coerce(v):
            if type(v) is str:
                return v
            if type(v) is int:
                return str(v)
            self._fault(f"cannot concatenate {_type_name(v)}")
        return coerce(left) + coerce(right)

    def _builtin(self, name, stack):
        if name == "print":
            arg = stack.pop()
            self.hooks.on_output(display_value(arg, self.heap) + "\n")
            stack.append(None)
        elif name == "upper" or name == "lower":
            arg = stack.pop()
            if type(arg) is not str:
                self._fault(f"{name}() needs a string, got {_type_name(arg)}")
            stack.append(arg.upper() if name == "upper" else arg.lower())
        elif name == "len":
            arg = stack.pop()
            if type(arg) is not str:
                self._fault(f"len() needs a string, got {_type_name(arg)}")
            stack.append(len(arg))
        elif name == "str":
            stack.append(display_value(stack.pop(), self.heap))
        elif name == "readline":
            stack.append(self._readline())
        else:
            self._fault(f"unknown builtin {name!r}")
