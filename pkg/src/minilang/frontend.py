"""MiniLang front end: source units, lexer, AST and recursive-descent parser.

MiniLang is a small imperative language: functions, `let`, assignment,
`if`/`while`, integers, booleans, strings, records with named fields and a
handful of builtins.  Source files use the `.mls` extension, UTF-8 text,
`//` line comments.
"""

from dataclasses import dataclass, field
from pathlib import Path

from .errors import MiniSyntaxError, MissingMain

KEYWORDS = {"fn", "let", "if", "else", "while", "return", "new", "true", "false"}

BUILTINS = {
    "upper": 1,
    "lower": 1,
    "len": 1,
    "str": 1,
    "print": 1,
    "readline": 0,
}


@dataclass(frozen=True)
class SourceUnit:
    path: str
    source: str
    unit_name: str

    @classmethod
    def from_file(cls, path):
        p = Path(path)
        return cls(path=str(p), source=p.read_text(encoding="utf-8"), unit_name=p.stem)

    @classmethod
    def from_text(cls, source, unit_name="main", path="<string>"):
        return cls(path=path, source=source, unit_name=unit_name)


# --- tokens ----------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str           # IDENT INT STRING keyword or punctuation literal
    value: object
    line: int
    col: int


PUNCT2 = {"==", "!="}
PUNCT1 = set("(){},;:.=<+-*/")


def tokenize(source):
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start_col = col
        if source.startswith(tuple(PUNCT2), i):
            op = source[i:i + 2]
            tokens.append(Token(op, op, line, start_col))
            i += 2
            col += 2
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("INT", int(source[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while True:
                if j >= n or source[j] == "\n":
                    raise MiniSyntaxError("unterminated string literal", line, start_col)
                c = source[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    if j + 1 >= n:
                        raise MiniSyntaxError("unterminated escape", line, start_col)
                    esc = source[j + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc)
                    if mapped is None:
                        raise MiniSyntaxError(f"bad escape '\\{esc}'", line, col + j - i)
                    out.append(mapped)
                    j += 2
                    continue
                out.append(c)
                j += 1
            tokens.append(Token("STRING", "".join(out), line, start_col))
            col += j - i
            i = j
            continue
        if ch in PUNCT1:
            tokens.append(Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise MiniSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", None, line, col))
    return tokens


# --- AST -------------------------------------------------------------------

@dataclass
class Node:
    line: int


@dataclass
class Literal(Node):
    value: object       # str, int, bool


@dataclass
class VarRead(Node):
    name: str


@dataclass
class VarAssign(Node):
    name: str
    value: Node


@dataclass
class FieldRead(Node):
    obj: Node
    field_name: str


@dataclass
class FieldAssign(Node):
    obj: Node
    field_name: str
    value: Node


@dataclass
class RecordNew(Node):
    fields: list        # [(name, Node), ...] in source order


@dataclass
class Call(Node):
    name: str
    args: list


@dataclass
class Print(Node):
    arg: Node


@dataclass
class BinOp(Node):
    op: str             # add sub mul div eq ne lt
    left: Node
    right: Node


@dataclass
class If(Node):
    cond: Node
    then: "Block"
    orelse: object      # Block, If or None


@dataclass
class While(Node):
    cond: Node
    body: "Block"


@dataclass
class Return(Node):
    value: object       # Node or None


@dataclass
class Let(Node):
    name: str
    value: Node


@dataclass
class Block(Node):
    stmts: list = field(default_factory=list)


@dataclass
class FuncDecl(Node):
    name: str
    params: list
    body: Block


BINOP_TOKENS = {"==": "eq", "!=": "ne", "<": "lt", "+": "add", "-": "sub",
                "*": "mul", "/": "div"}


class Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok.kind != kind:
            raise MiniSyntaxError(f"expected {kind!r}, found {tok.kind!r}", tok.line, tok.col)
        return self.next()

    def at(self, kind):
        return self.peek().kind == kind

    # program := fndecl*
    def parse_program(self):
        first = self.peek()
        decls = []
        while not self.at("EOF"):
            decls.append(self.parse_fndecl())
        return Block(line=first.line if decls else 1, stmts=decls)

    def parse_fndecl(self):
        start = self.expect("fn")
        name = self.expect("IDENT").value
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.expect("IDENT").value)
            while self.at(","):
                self.next()
                params.append(self.expect("IDENT").value)
        self.expect(")")
        body = self.parse_block()
        return FuncDecl(line=start.line, name=name, params=params, body=body)

    def parse_block(self):
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        self.expect("}")
        return Block(line=start.line, stmts=stmts)

    def parse_stmt(self):
        tok = self.peek()
        if tok.kind == "let":
            self.next()
            name = self.expect("IDENT").value
            self.expect("=")
            value = self.parse_expr()
            self.expect(";")
            return Let(line=tok.line, name=name, value=value)
        if tok.kind == "return":
            self.next()
            value = None
            if not self.at(";"):
                value = self.parse_expr()
            self.expect(";")
            return Return(line=tok.line, value=value)
        if tok.kind == "if":
            return self.parse_if()
        if tok.kind == "while":
            self.next()
            cond = self.parse_expr()
            body = self.parse_block()
            return While(line=tok.line, cond=cond, body=body)
        # expression statement; may turn into an assignment
        expr = self.parse_expr()
        if self.at("="):
            eq = self.next()
            value = self.parse_expr()
            self.expect(";")
            if isinstance(expr, VarRead):
                return VarAssign(line=expr.line, name=expr.name, value=value)
            if isinstance(expr, FieldRead):
                return FieldAssign(line=expr.line, obj=expr.obj,
                                   field_name=expr.field_name, value=value)
            raise MiniSyntaxError("invalid assignment target", eq.line, eq.col)
        self.expect(";")
        return expr

    def parse_if(self):
        tok = self.expect("if")
        cond = self.parse_expr()
        then = self.parse_block()
        orelse = None
        if self.at("else"):
            self.next()
            orelse = self.parse_if() if self.at("if") else self.parse_block()
        return If(line=tok.line, cond=cond, then=then, orelse=orelse)

    # precedence: comparison < additive < multiplicative < unary < postfix
    def parse_expr(self):
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_additive()
        while self.peek().kind in ("==", "!=", "<"):
            op = self.next()
            right = self.parse_additive()
            left = BinOp(line=op.line, op=BINOP_TOKENS[op.kind], left=left, right=right)
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            right = self.parse_multiplicative()
            left = BinOp(line=op.line, op=BINOP_TOKENS[op.kind], left=left, right=right)
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().kind in ("*", "/"):
            op = self.next()
            right = self.parse_unary()
            left = BinOp(line=op.line, op=BINOP_TOKENS[op.kind], left=left, right=right)
        return left

    def parse_unary(self):
        if self.at("-"):
            op = self.next()
            operand = self.parse_unary()
            return BinOp(line=op.line, op="sub",
                         left=Literal(line=op.line, value=0), right=operand)
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while self.at("."):
            dot = self.next()
            name = self.expect("IDENT").value
            expr = FieldRead(line=dot.line, obj=expr, field_name=name)
        return expr

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return Literal(line=tok.line, value=tok.value)
        if tok.kind == "STRING":
            self.next()
            return Literal(line=tok.line, value=tok.value)
        if tok.kind in ("true", "false"):
            self.next()
            return Literal(line=tok.line, value=tok.kind == "true")
        if tok.kind == "new":
            self.next()
            self.expect("{")
            fields = []
            if not self.at("}"):
                fields.append(self._record_field())
                while self.at(","):
                    self.next()
                    fields.append(self._record_field())
            self.expect("}")
            return RecordNew(line=tok.line, fields=fields)
        if tok.kind == "(":
            self.next()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "IDENT":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.at(","):
                        self.next()
                        args.append(self.parse_expr())
                self.expect(")")
                if tok.value == "print":
                    if len(args) != 1:
                        raise MiniSyntaxError("print takes one argument", tok.line, tok.col)
                    return Print(line=tok.line, arg=args[0])
                return Call(line=tok.line, name=tok.value, args=args)
            return VarRead(line=tok.line, name=tok.value)
        raise MiniSyntaxError(f"unexpected token {tok.kind!r}", tok.line, tok.col)

    def _record_field(self):
        name = self.expect("IDENT").value
        self.expect(":")
        return name, self.parse_expr()


def parse(unit, require_main=True):
    """Parse a source unit into a root Block of FuncDecls."""
    root = Parser(tokenize(unit.source)).parse_program()
    if require_main and not any(d.name == "main" for d in root.stmts):
        raise MissingMain(f"{unit.path}: no `main` function")
    return root
