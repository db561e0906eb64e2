"""AST to bytecode compiler.

Expression evaluation is strictly left-to-right in source order, so the
runtime capture order is deterministic.  The compiler never emits Capture
opcodes; that is the instrumenter's job.
"""

from . import frontend as ast
from .bytecode import (
    ProgramImage, FunctionBytecode, Instruction, verify,
    PUSH_CONST, LOAD_LOCAL, STORE_LOCAL, LOAD_FIELD, STORE_FIELD, NEW_RECORD,
    CALL, CALL_BUILTIN, BIN_OP, JUMP, JUMP_IF_FALSE, RETURN, POP,
)
from .errors import (
    ArityMismatch, DuplicateFunction, MissingMain, UnknownIdentifier,
)


class ConstantPool:
    """Deduplicating string/int pool (bools and null ride along)."""

    def __init__(self):
        self.values = []
        self._index = {}

    def add(self, value):
        key = (type(value).__name__, value)
        if key not in self._index:
            self._index[key] = len(self.values)
            self.values.append(value)
        return self._index[key]


class FunctionCompiler:
    def __init__(self, decl, unit, pool, signatures):
        self.decl = decl
        self.unit = unit
        self.pool = pool
        self.signatures = signatures        # name -> arity, program-wide
        self.local_slots = {}
        self.local_names = []
        self.code = []
        self.line_table = []
        for p in decl.params:
            self._new_local(p)

    def _new_local(self, name):
        if name not in self.local_slots:
            self.local_slots[name] = len(self.local_names)
            self.local_names.append(name)
        return self.local_slots[name]

    def emit(self, opcode, operand, line):
        self.code.append(Instruction(opcode, operand))
        self.line_table.append(line)
        return len(self.code) - 1

    def patch(self, idx, target):
        self.code[idx] = Instruction(self.code[idx].opcode, target)

    def compile(self):
        self.block(self.decl.body)
        last = self.decl.body.line if not self.line_table else self.line_table[-1]
        if not self.code or self.code[-1].opcode != RETURN:
            self.emit(PUSH_CONST, self.pool.add(None), last)
            self.emit(RETURN, None, last)
        return FunctionBytecode(
            name=self.decl.name, unit=self.unit, arity=len(self.decl.params),
            local_names=self.local_names, code=self.code, line_table=self.line_table)

    def block(self, node):
        for stmt in node.stmts:
            self.statement(stmt)

    def statement(self, node):
        if isinstance(node, ast.Let):
            self.expression(node.value)
            self.emit(STORE_LOCAL, self._new_local(node.name), node.line)
        elif isinstance(node, ast.VarAssign):
            if node.name not in self.local_slots:
                raise UnknownIdentifier(
                    f"line {node.line}: assignment to undeclared variable {node.name!r}")
            self.expression(node.value)
            self.emit(STORE_LOCAL, self.local_slots[node.name], node.line)
        elif isinstance(node, ast.FieldAssign):
            self.expression(node.obj)
            self.expression(node.value)
            self.emit(STORE_FIELD, node.field_name, node.line)
        elif isinstance(node, ast.Return):
            if node.value is None:
                self.emit(PUSH_CONST, self.pool.add(None), node.line)
            else:
                self.expression(node.value)
            self.emit(RETURN, None, node.line)
        elif isinstance(node, ast.If):
            self.expression(node.cond)
            jf = self.emit(JUMP_IF_FALSE, None, node.line)
            self.block(node.then)
            if node.orelse is None:
                self.patch(jf, len(self.code))
            else:
                jend = self.emit(JUMP, None, node.line)
                self.patch(jf, len(self.code))
                if isinstance(node.orelse, ast.If):
                    self.statement(node.orelse)
                else:
                    self.block(node.orelse)
                self.patch(jend, len(self.code))
        elif isinstance(node, ast.While):
            top = len(self.code)
            self.expression(node.cond)
            jf = self.emit(JUMP_IF_FALSE, None, node.line)
            self.block(node.body)
            self.emit(JUMP, top, node.line)
            self.patch(jf, len(self.code))
        elif isinstance(node, ast.Block):
            self.block(node)
        else:
            self.expression(node)
            self.emit(POP, None, node.line)

    def expression(self, node):
        if isinstance(node, ast.Literal):
            self.emit(PUSH_CONST, self.pool.add(node.value), node.line)
        elif isinstance(node, ast.VarRead):
            if node.name not in self.local_slots:
                raise UnknownIdentifier(f"line {node.line}: unknown variable {node.name!r}")
            self.emit(LOAD_LOCAL, self.local_slots[node.name], node.line)
        elif isinstance(node, ast.FieldRead):
            self.expression(node.obj)
            self.emit(LOAD_FIELD, node.field_name, node.line)
        elif isinstance(node, ast.RecordNew):
            names = []
            for name, value in node.fields:
                names.append(name)
                self.expression(value)
            self.emit(NEW_RECORD, self.pool.add(",".join(names)), node.line)
        elif isinstance(node, ast.Print):
            self.expression(node.arg)
            self.emit(CALL_BUILTIN, "print", node.line)
        elif isinstance(node, ast.Call):
            for arg in node.args:
                self.expression(arg)
            if node.name in ast.BUILTINS:
                if len(node.args) != ast.BUILTINS[node.name]:
                    raise ArityMismatch(
                        f"line {node.line}: {node.name} takes "
                        f"{ast.BUILTINS[node.name]} argument(s)")
                self.emit(CALL_BUILTIN, node.name, node.line)
            else:
                if node.name not in self.signatures:
                    raise UnknownIdentifier(
                        f"line {node.line}: unknown function {node.name!r}")
                if len(node.args) != self.signatures[node.name]:
                    raise ArityMismatch(
                        f"line {node.line}: {node.name} takes "
                        f"{self.signatures[node.name]} argument(s)")
                self.emit(CALL, node.name, node.line)
        elif isinstance(node, ast.BinOp):
            self.expression(node.left)
            self.expression(node.right)
            self.emit(BIN_OP, node.op, node.line)
        else:
            raise UnknownIdentifier(f"line {node.line}: unexpected node {node!r}")


def compile_units(units_roots):
    """Link [(root Block, unit_name)] into one verified ProgramImage."""
    pool = ConstantPool()
    signatures = {}
    decls = []
    for root, unit_name in units_roots:
        for decl in root.stmts:
            if decl.name in signatures:
                raise DuplicateFunction(f"function {decl.name!r} defined twice")
            signatures[decl.name] = len(decl.params)
            decls.append((decl, unit_name))
    if "main" not in signatures:
        raise MissingMain("no `main` function in program")
    if signatures["main"] != 0:
        raise ArityMismatch("`main` must take no arguments")
    functions = [FunctionCompiler(decl, unit, pool, signatures).compile()
                 for decl, unit in decls]
    image = ProgramImage(functions=functions, constants=pool.values, entry="main")
    return verify(image)


def compile_program(root, unit_name):
    """Compile a single parsed unit into a verified ProgramImage."""
    return compile_units([(root, unit_name)])


def compile_source(units):
    """Convenience: parse and link a list of SourceUnits (entry unit first)."""
    from .frontend import parse
    roots = []
    found_main = False
    for unit in units:
        root = parse(unit, require_main=False)
        found_main = found_main or any(d.name == "main" for d in root.stmts)
        roots.append((root, unit.unit_name))
    if not found_main:
        raise MissingMain("no `main` function in any unit")
    return compile_units(roots)
