"""Compiled-program container: instructions, debug metadata, capture sites.

Also provides the disassembly dump (one instruction per line,
`index<TAB>opcode<TAB>operand<TAB>line`), its inverse, and a stack-balance
verifier used as a post-condition by both the compiler and the instrumenter.
"""

from dataclasses import dataclass, field
import json

from .errors import UnknownSite, VerifyError
from .frontend import BUILTINS

# opcodes
PUSH_CONST = "PushConst"
LOAD_LOCAL = "LoadLocal"
STORE_LOCAL = "StoreLocal"
LOAD_FIELD = "LoadField"
STORE_FIELD = "StoreField"
NEW_RECORD = "NewRecord"
CALL = "Call"
CALL_BUILTIN = "CallBuiltin"
BIN_OP = "BinOp"
JUMP = "Jump"
JUMP_IF_FALSE = "JumpIfFalse"
RETURN = "Return"
POP = "Pop"
CAPTURE = "Capture"

OPCODES = {PUSH_CONST, LOAD_LOCAL, STORE_LOCAL, LOAD_FIELD, STORE_FIELD,
           NEW_RECORD, CALL, CALL_BUILTIN, BIN_OP, JUMP, JUMP_IF_FALSE,
           RETURN, POP, CAPTURE}

# capture kinds
KIND_CONST = "Const"
KIND_LOCAL_READ = "LocalRead"
KIND_FIELD_READ = "FieldRead"
KIND_CALL_RESULT = "CallResult"

# builtins whose result can be a string
STRING_BUILTINS = {"upper", "lower", "str", "readline"}


@dataclass(frozen=True)
class Instruction:
    opcode: str
    operand: object = None      # small int, identifier, or None


@dataclass
class FunctionBytecode:
    name: str
    unit: str
    arity: int
    local_names: list
    code: list                  # [Instruction]
    line_table: list            # line per instruction index, total over code

    @property
    def qualified_name(self):
        return f"{self.unit}.{self.name}"


@dataclass(frozen=True)
class CaptureSite:
    id: int
    function: str               # qualified `unit.function`
    unit: str
    instr_index: int            # instruction whose pushed value is captured
    line: int
    kind: str


@dataclass
class ProgramImage:
    functions: list             # [FunctionBytecode]
    constants: list             # str/int/bool/None pool
    capture_sites: list = field(default_factory=list)
    entry: str = "main"

    def function(self, qualified):
        for f in self.functions:
            if f.qualified_name == qualified or f.name == qualified:
                return f
        raise KeyError(qualified)

    @property
    def instrumented(self):
        return bool(self.capture_sites)


def site_lookup(image, site_id):
    """Return the capture site with the given id."""
    if not isinstance(site_id, int) or not 0 <= site_id < len(image.capture_sites):
        raise UnknownSite(f"no capture site with id {site_id!r}")
    return image.capture_sites[site_id]


def call_arity(image, instr):
    if instr.opcode == CALL_BUILTIN:
        return BUILTINS[instr.operand]
    return image.function(instr.operand).arity


def record_field_names(image, instr):
    names = image.constants[instr.operand]
    return names.split(",") if names else []


def stack_delta(image, instr):
    op = instr.opcode
    if op in (PUSH_CONST, LOAD_LOCAL):
        return 1
    if op in (STORE_LOCAL, BIN_OP, POP, RETURN, JUMP_IF_FALSE):
        return -1
    if op in (LOAD_FIELD, JUMP, CAPTURE):
        return 0
    if op == STORE_FIELD:
        return -2
    if op == NEW_RECORD:
        return 1 - len(record_field_names(image, instr))
    if op in (CALL, CALL_BUILTIN):
        return 1 - call_arity(image, instr)
    raise VerifyError(f"unknown opcode {op!r}")


def verify_function(image, func):
    """Abstract-interpret stack depths; raise VerifyError on any imbalance."""
    code = func.code
    if len(func.line_table) != len(code):
        raise VerifyError(f"{func.qualified_name}: line table not total")
    depths = [None] * len(code)
    work = [(0, 0)]
    while work:
        idx, depth = work.pop()
        while True:
            if idx >= len(code):
                raise VerifyError(f"{func.qualified_name}: fell off end of code")
            if depths[idx] is not None:
                if depths[idx] != depth:
                    raise VerifyError(
                        f"{func.qualified_name}@{idx}: depth mismatch "
                        f"{depths[idx]} vs {depth}")
                break
            depths[idx] = depth
            instr = code[idx]
            op = instr.opcode
            if op in (LOAD_LOCAL, STORE_LOCAL):
                if not 0 <= instr.operand < len(func.local_names):
                    raise VerifyError(f"{func.qualified_name}@{idx}: bad local slot")
            if op == CAPTURE:
                site = site_lookup(image, instr.operand)
                if depth < 1:
                    raise VerifyError(f"{func.qualified_name}@{idx}: capture on empty stack")
                if site.function != func.qualified_name:
                    raise VerifyError(f"{func.qualified_name}@{idx}: foreign capture site")
            pops = {STORE_LOCAL: 1, BIN_OP: 2, POP: 1, RETURN: 1, JUMP_IF_FALSE: 1,
                    LOAD_FIELD: 1, STORE_FIELD: 2}.get(op, 0)
            if op == NEW_RECORD:
                pops = len(record_field_names(image, instr))
            elif op in (CALL, CALL_BUILTIN):
                pops = call_arity(image, instr)
            if depth < pops:
                raise VerifyError(f"{func.qualified_name}@{idx}: stack underflow")
            depth += stack_delta(image, instr)
            if op == RETURN:
                if depth != 0:
                    raise VerifyError(
                        f"{func.qualified_name}@{idx}: unbalanced stack at return ({depth})")
                break
            if op in (JUMP, JUMP_IF_FALSE):
                target = instr.operand
                if not 0 <= target < len(code):
                    raise VerifyError(f"{func.qualified_name}@{idx}: jump out of range")
                if op == JUMP:
                    idx = target
                    continue
                work.append((target, depth))
            idx += 1
    return depths


def verify(image):
    for func in image.functions:
        verify_function(image, func)
    # site table and Capture opcodes must be mutually consistent
    seen = []
    for func in image.functions:
        for idx, instr in enumerate(func.code):
            if instr.opcode == CAPTURE:
                seen.append(instr.operand)
    if sorted(seen) != list(range(len(image.capture_sites))):
        raise VerifyError("capture opcodes and site table disagree")
    return image


# --- disassembly -----------------------------------------------------------

def _fmt_operand(operand):
    if operand is None:
        return "-"
    return str(operand)


def _parse_operand(text):
    if text == "-":
        return None
    if text.lstrip("-").isdigit():
        return int(text)
    return text


def disassemble(image):
    """Textual dump of a whole image, reversible with `assemble`."""
    lines = [f"entry\t{image.entry}"]
    for idx, const in enumerate(image.constants):
        lines.append(f"const\t{idx}\t{json.dumps(const)}")
    for func in image.functions:
        locals_ = ",".join(func.local_names)
        lines.append(f"fn\t{func.unit}\t{func.name}\t{func.arity}\t{locals_}")
        for idx, instr in enumerate(func.code):
            lines.append(f"{idx}\t{instr.opcode}\t{_fmt_operand(instr.operand)}"
                         f"\t{func.line_table[idx]}")
    for s in image.capture_sites:
        lines.append(f"site\t{s.id}\t{s.function}\t{s.unit}\t{s.instr_index}"
                     f"\t{s.line}\t{s.kind}")
    return "\n".join(lines) + "\n"


def assemble(text):
    """Inverse of `disassemble`."""
    entry = "main"
    constants = []
    functions = []
    sites = []
    current = None
    for raw in text.splitlines():
        if not raw.strip():
            continue
        parts = raw.split("\t")
        tag = parts[0]
        if tag == "entry":
            entry = parts[1]
        elif tag == "const":
            constants.append(json.loads(parts[2]))
        elif tag == "fn":
            _, unit, name, arity, locals_ = parts
            current = FunctionBytecode(name=name, unit=unit, arity=int(arity),
                                       local_names=locals_.split(",") if locals_ else [],
                                       code=[], line_table=[])
            functions.append(current)
        elif tag == "site":
            _, sid, function, unit, instr_index, line, kind = parts
            sites.append(CaptureSite(id=int(sid), function=function, unit=unit,
                                     instr_index=int(instr_index), line=int(line),
                                     kind=kind))
        else:
            idx, opcode, operand, line = parts
            assert int(idx) == len(current.code)
            current.code.append(Instruction(opcode, _parse_operand(operand)))
            current.line_table.append(int(line))
    return ProgramImage(functions=functions, constants=constants,
                        capture_sites=sites, entry=entry)
