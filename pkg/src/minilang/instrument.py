"""Capture-site instrumentation pass.

Inserts a Capture opcode directly after every instruction (within scope)
whose pushed value may be a string, re-indexing jump targets and line
tables.  The runtime discards non-string values, so may-be-string sites
(local reads, field reads, call results) are safe to over-approximate.
"""

from dataclasses import dataclass
from fnmatch import fnmatchcase

from .bytecode import (
    ProgramImage, FunctionBytecode, CaptureSite, Instruction, verify,
    PUSH_CONST, LOAD_LOCAL, LOAD_FIELD, CALL, CALL_BUILTIN, BIN_OP,
    JUMP, JUMP_IF_FALSE, CAPTURE,
    KIND_CONST, KIND_LOCAL_READ, KIND_FIELD_READ, KIND_CALL_RESULT,
    STRING_BUILTINS,
)
from .errors import AlreadyInstrumented, EmptyScope


@dataclass(frozen=True)
class ScopePattern:
    """Glob over `unit.function` names; `,` separates alternatives."""

    pattern: str

    def __post_init__(self):
        if not self.pattern.strip():
            raise EmptyScope("scope pattern must not be empty")

    def matches(self, qualified_name):
        return any(fnmatchcase(qualified_name, alt.strip())
                   for alt in self.pattern.split(","))


def _site_kind(image, instr):
    op = instr.opcode
    if op == PUSH_CONST:
        if type(image.constants[instr.operand]) is str:
            return KIND_CONST
        return None
    if op == LOAD_LOCAL:
        return KIND_LOCAL_READ
    if op == LOAD_FIELD:
        return KIND_FIELD_READ
    if op == CALL:
        return KIND_CALL_RESULT
    if op == CALL_BUILTIN:
        return KIND_CALL_RESULT if instr.operand in STRING_BUILTINS else None
    if op == BIN_OP:
        return KIND_CALL_RESULT if instr.operand == "add" else None
    return None


def _check_uninstrumented(image):
    if image.capture_sites:
        raise AlreadyInstrumented("image already has a capture-site table")
    for func in image.functions:
        if any(i.opcode == CAPTURE for i in func.code):
            raise AlreadyInstrumented(f"{func.qualified_name} contains Capture opcodes")


def enumerate_sites(image, scope):
    """List capture sites in code order, restricted to the scope pattern.

    Site indices refer to the original (uninstrumented) instruction stream.
    """
    _check_uninstrumented(image)
    sites = []
    for func in image.functions:
        if not scope.matches(func.qualified_name):
            continue
        for idx, instr in enumerate(func.code):
            kind = _site_kind(image, instr)
            if kind is not None:
                sites.append(CaptureSite(
                    id=len(sites), function=func.qualified_name, unit=func.unit,
                    instr_index=idx, line=func.line_table[idx], kind=kind))
    return sites


def instrument(image, scope):
    """Return a new, verified image with Capture opcodes after every site."""
    _check_uninstrumented(image)
    next_id = 0
    out_functions = []
    out_sites = []
    for func in image.functions:
        in_scope = scope.matches(func.qualified_name)
        capture_at = set()
        if in_scope:
            for idx, instr in enumerate(func.code):
                if _site_kind(image, instr) is not None:
                    capture_at.add(idx)
        # old index -> new index of the same original instruction
        newpos = []
        shift = 0
        for idx in range(len(func.code)):
            newpos.append(idx + shift)
            if idx in capture_at:
                shift += 1
        new_code = []
        new_lines = []
        for idx, instr in enumerate(func.code):
            if instr.opcode in (JUMP, JUMP_IF_FALSE):
                instr = Instruction(instr.opcode, newpos[instr.operand])
            new_code.append(instr)
            new_lines.append(func.line_table[idx])
            if idx in capture_at:
                site = CaptureSite(
                    id=next_id, function=func.qualified_name, unit=func.unit,
                    instr_index=newpos[idx], line=func.line_table[idx],
                    kind=_site_kind(image, func.code[idx]))
                out_sites.append(site)
                new_code.append(Instruction(CAPTURE, next_id))
                new_lines.append(func.line_table[idx])
                next_id += 1
        out_functions.append(FunctionBytecode(
            name=func.name, unit=func.unit, arity=func.arity,
            local_names=list(func.local_names), code=new_code,
            line_table=new_lines))
    out = ProgramImage(functions=out_functions, constants=list(image.constants),
                       capture_sites=out_sites, entry=image.entry)
    return verify(out)
