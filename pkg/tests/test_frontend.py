import pytest

from minilang import frontend as fe
from minilang.errors import MiniSyntaxError, MissingMain


def parse_text(src, **kw):
    return fe.parse(fe.SourceUnit.from_text(src), **kw)


def test_minimal_program_ast():
    root = parse_text('fn main() { print("hi"); }')
    assert len(root.stmts) == 1
    decl = root.stmts[0]
    assert isinstance(decl, fe.FuncDecl)
    assert decl.name == "main" and decl.params == []
    (stmt,) = decl.body.stmts
    assert isinstance(stmt, fe.Print)
    assert isinstance(stmt.arg, fe.Literal)
    assert stmt.arg.value == "hi"


def test_two_line_program_ast():
    root = parse_text('fn main() { let var = "text"; var = upper(var); }')
    body = root.stmts[0].body.stmts
    assert isinstance(body[0], fe.Let)
    assert body[0].name == "var"
    assert isinstance(body[1], fe.VarAssign)
    call = body[1].value
    assert isinstance(call, fe.Call)
    assert call.name == "upper"
    assert isinstance(call.args[0], fe.VarRead)


def test_syntax_error_carries_line():
    with pytest.raises(MiniSyntaxError) as err:
        parse_text("fn main() { let x = ; }")
    assert err.value.line == 1


def test_missing_main_rejected():
    with pytest.raises(MissingMain):
        parse_text("fn helper() { }")
    root = parse_text("fn helper() { }", require_main=False)
    assert root.stmts[0].name == "helper"


def test_every_node_has_a_line():
    src = """fn main() {
    let r = new {a: 1};
    if r.a < 2 {
        print("yes");
    }
}
"""
    root = parse_text(src)

    def walk(node):
        assert node.line >= 1
        for name in getattr(node, "__dataclass_fields__", {}):
            value = getattr(node, name)
            children = value if isinstance(value, list) else [value]
            for child in children:
                if isinstance(child, fe.Node):
                    walk(child)
                elif isinstance(child, tuple) and len(child) == 2:
                    walk(child[1])

    walk(root)


def test_comments_and_escapes():
    root = parse_text('fn main() { // a comment\n  print("a\\nb\\t\\"c\\\\"); }')
    lit = root.stmts[0].body.stmts[0].arg
    assert lit.value == 'a\nb\t"c\\'


def test_unterminated_string():
    with pytest.raises(MiniSyntaxError):
        parse_text('fn main() { print("oops); }')


def test_precedence_and_unary_minus():
    root = parse_text("fn main() { let x = 1 + 2 * 3 == 7; let y = -x; }")
    cmp_node = root.stmts[0].body.stmts[0].value
    assert cmp_node.op == "eq"
    assert cmp_node.left.op == "add"
    assert cmp_node.left.right.op == "mul"
    neg = root.stmts[0].body.stmts[1].value
    assert neg.op == "sub" and neg.left.value == 0


def test_else_if_chain():
    src = """fn main() {
    let n = 1;
    if n < 0 { print("a"); } else if n < 2 { print("b"); } else { print("c"); }
}
"""
    root = parse_text(src)
    if_stmt = root.stmts[0].body.stmts[1]
    assert isinstance(if_stmt.orelse, fe.If)
    assert isinstance(if_stmt.orelse.orelse, fe.Block)


def test_record_literal_and_field_chain():
    root = parse_text('fn main() { let r = new {a: new {b: "x"}}; print(r.a.b); }')
    read = root.stmts[0].body.stmts[1].arg
    assert isinstance(read, fe.FieldRead)
    assert isinstance(read.obj, fe.FieldRead)
    assert read.field_name == "b"
