"""Reference tree-walking evaluator with a string-expression tracer.

Independent of the bytecode pipeline: it evaluates the AST directly and
logs every string expression result (constants, local reads, field reads
and call results) in evaluation order.  Used as the differential-testing
oracle for the VM and the instrumenter.
"""

from dataclasses import dataclass

from . import frontend as ast
from .bytecode import (
    KIND_CONST, KIND_LOCAL_READ, KIND_FIELD_READ, KIND_CALL_RESULT,
    STRING_BUILTINS,
)
from .errors import MissingMain, RuntimeFault
from .instrument import ScopePattern


@dataclass(frozen=True)
class TraceEntry:
    value: str
    kind: str
    line: int
    function: str               # qualified unit.function


@dataclass
class TraceResult:
    stdout: str
    trace: list
    fault: str = None

    @property
    def values(self):
        return [e.value for e in self.trace]


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Record:
    __slots__ = ("fields",)

    def __init__(self, fields):
        self.fields = fields


def _display(value):
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
    inner = ", ".join(f"{k}: {_render(v)}" for k, v in value.fields.items())
    return "{" + inner + "}"


def _render(value):
    if isinstance(value, str):
        import json
        return json.dumps(value)
    if isinstance(value, _Record):
        return "{...}"
    return _display(value)


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


class TreeWalker:
    def __init__(self, units_roots, input_lines=None, scope="*"):
        self.scope = scope if isinstance(scope, ScopePattern) else ScopePattern(scope)
        self.functions = {}     # name -> (FuncDecl, unit)
        for root, unit_name in units_roots:
            for decl in root.stmts:
                self.functions[decl.name] = (decl, unit_name)
        if "main" not in self.functions:
            raise MissingMain("no `main` function in program")
        self.input = list(input_lines or [])
        self.input_pos = 0
        self.out = []
        self.trace = []
        self.call_stack = []    # qualified names, for fault reporting

    def run(self):
        fault = None
        try:
            self._call("main", [], line=0)
        except RuntimeFault as e:
            fault = str(e)
        return TraceResult(stdout="".join(self.out), trace=self.trace, fault=fault)

    # --- helpers ----------------------------------------------------------

    def _qualified(self):
        return self.call_stack[-1]

    def _in_scope(self):
        return self.scope.matches(self._qualified())

    def _log(self, value, kind, line):
        if type(value) is str and self._in_scope():
            self.trace.append(TraceEntry(value, kind, line, self._qualified()))
        return value

    def _fault(self, message, line):
        fn = self.call_stack[-1].split(".", 1)[1] if self.call_stack else "?"
        raise RuntimeFault(message, function=fn, line=line)

    def _call(self, name, args, line):
        decl, unit = self.functions[name]
        env = dict(zip(decl.params, args))
        self.call_stack.append(f"{unit}.{name}")
        try:
            self.exec_block(decl.body, env)
            result = None
        except _Return as r:
            result = r.value
        finally:
            self.call_stack.pop()
        return result

    # --- statements -------------------------------------------------------

    def exec_block(self, block, env):
        for stmt in block.stmts:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, node, env):
        if isinstance(node, ast.Let):
            env[node.name] = self.eval(node.value, env)
        elif isinstance(node, ast.VarAssign):
            env[node.name] = self.eval(node.value, env)
        elif isinstance(node, ast.FieldAssign):
            obj = self.eval(node.obj, env)
            value = self.eval(node.value, env)
            if obj is None:
                self._fault(f"null field access: .{node.field_name}", node.line)
            if not isinstance(obj, _Record):
                self._fault(f"field access on {_type_name(obj)}", node.line)
            if node.field_name not in obj.fields:
                self._fault(f"record has no field {node.field_name!r}", node.line)
            obj.fields[node.field_name] = value
        elif isinstance(node, ast.Return):
            raise _Return(None if node.value is None else self.eval(node.value, env))
        elif isinstance(node, ast.If):
            cond = self.eval(node.cond, env)
            if type(cond) is not bool:
                self._fault(f"condition must be bool, got {_type_name(cond)}", node.line)
            if cond:
                self.exec_block(node.then, env)
            elif node.orelse is not None:
                if isinstance(node.orelse, ast.If):
                    self.exec_stmt(node.orelse, env)
                else:
                    self.exec_block(node.orelse, env)
        elif isinstance(node, ast.While):
            while True:
                cond = self.eval(node.cond, env)
                if type(cond) is not bool:
                    self._fault(f"condition must be bool, got {_type_name(cond)}",
                                node.line)
                if not cond:
                    break
                self.exec_block(node.body, env)
        elif isinstance(node, ast.Block):
            self.exec_block(node, env)
        else:
            self.eval(node, env)

    # --- expressions ------------------------------------------------------

    def eval(self, node, env):
        if isinstance(node, ast.Literal):
            return self._log(node.value, KIND_CONST, node.line)
        if isinstance(node, ast.VarRead):
            # locals are function-scoped; a read before the branch that
            # assigns them ran yields null, matching the VM's slot default
            return self._log(env.get(node.name), KIND_LOCAL_READ, node.line)
        if isinstance(node, ast.FieldRead):
            obj = self.eval(node.obj, env)
            if obj is None:
                self._fault(f"null field access: .{node.field_name}", node.line)
            if not isinstance(obj, _Record):
                self._fault(f"field access on {_type_name(obj)}", node.line)
            if node.field_name not in obj.fields:
                self._fault(f"record has no field {node.field_name!r}", node.line)
            return self._log(obj.fields[node.field_name], KIND_FIELD_READ, node.line)
        if isinstance(node, ast.RecordNew):
            fields = {}
            for name, value in node.fields:
                fields[name] = self.eval(value, env)
            return _Record(fields)
        if isinstance(node, ast.Print):
            arg = self.eval(node.arg, env)
            self.out.append(_display(arg) + "\n")
            return None
        if isinstance(node, ast.Call):
            args = [self.eval(a, env) for a in node.args]
            if node.name in ast.BUILTINS:
                result = self._builtin(node.name, args, node.line)
                if node.name in STRING_BUILTINS:
                    return self._log(result, KIND_CALL_RESULT, node.line)
                return result
            result = self._call(node.name, args, node.line)
            return self._log(result, KIND_CALL_RESULT, node.line)
        if isinstance(node, ast.BinOp):
            left = self.eval(node.left, env)
            right = self.eval(node.right, env)
            result = self._binop(node.op, left, right, node.line)
            if node.op == "add" and type(result) is str:
                return self._log(result, KIND_CALL_RESULT, node.line)
            return result
        raise AssertionError(f"unexpected node {node!r}")

    def _binop(self, op, left, right, line):
        if op == "eq":
            return self._equal(left, right)
        if op == "ne":
            return not self._equal(left, right)
        if op == "add":
            if type(left) is str or type(right) is str:
                return self._concat(left, right, line)
            if type(left) is int and type(right) is int:
                return left + right
            self._fault(f"cannot add {_type_name(left)} and {_type_name(right)}", line)
        if type(left) is not int or type(right) is not int:
            self._fault(f"operator {op!r} needs ints, got "
                        f"{_type_name(left)} and {_type_name(right)}", line)
        if op == "sub":
            return left - right
        if op == "mul":
            return left * right
        if op == "div":
            if right == 0:
                self._fault("division by zero", line)
            return left // right
        if op == "lt":
            return left < right
        raise AssertionError(op)

    @staticmethod
    def _equal(a, b):
        if isinstance(a, _Record) or isinstance(b, _Record):
            return a is b
        if (type(a) is bool) != (type(b) is bool):
            return False
        if a is None or b is None:
            return a is b
        if type(a) is not type(b):
            return False
        return a == b

    def _concat(self, left, right, line):
        def coerce(v):
            if type(v) is str:
                return v
            if type(v) is int:
                return str(v)
            self._fault(f"cannot concatenate {_type_name(v)}", line)
        return coerce(left) + coerce(right)

    def _builtin(self, name, args, line):
        if name == "print":
            self.out.append(_display(args[0]) + "\n")
            return None
        if name in ("upper", "lower"):
            if type(args[0]) is not str:
                self._fault(f"{name}() needs a string, got {_type_name(args[0])}", line)
            return args[0].upper() if name == "upper" else args[0].lower()
        if name == "len":
            if type(args[0]) is not str:
                self._fault(f"len() needs a string, got {_type_name(args[0])}", line)
            return len(args[0])
        if name == "str":
            return _display(args[0])
        if name == "readline":
            if self.input_pos < len(self.input):
                line_ = self.input[self.input_pos]
                self.input_pos += 1
                return line_
            return ""
        raise AssertionError(name)


def trace_program(units_roots, input_lines=None, scope="*"):
    """Run the oracle and return (stdout, string-expression trace, fault)."""
    return TreeWalker(units_roots, input_lines=input_lines, scope=scope).run()
