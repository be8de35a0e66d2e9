from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlpo.errors import LexError, ParseError, UnsupportedFeature
from cmlpo.syntax import ast, parse_expression, parse_model, pretty_print, print_model, tokenize

from conftest import CORPUS_FILES, corpus_path, read


# ---------------------------------------------------------------- lexer

def test_quote_literal_is_one_token():
    toks = tokenize("<L1>")
    assert [(t.kind, t.value) for t in toks] == [("quote", "L1")]


def test_empty_input_has_no_tokens():
    assert tokenize("") == []


def test_not_equal_tokens():
    toks = tokenize("y <> 0")
    assert [(t.kind, t.value) for t in toks] == [("ident", "y"), ("symbol", "<>"), ("int", 0)]


def test_multiword_keywords_and_mk_prefix():
    toks = tokenize("x not in set s in set mk_T set of")
    kinds = [(t.kind, t.value) for t in toks]
    assert kinds == [("ident", "x"), ("keyword", "not in set"), ("ident", "s"),
                     ("keyword", "in set"), ("mk_ident", "T"), ("keyword", "set of")]


def test_less_than_after_operand_is_an_operator():
    toks = tokenize("a < b")
    assert [t.value for t in toks] == ["a", "<", "b"]


def test_comments_are_skipped():
    assert [t.value for t in tokenize("x -- y z\n+ 1")] == ["x", "+", 1]


def test_spans_are_one_based():
    tok = tokenize("\n  foo")[0]
    assert (tok.span.start_line, tok.span.start_col, tok.span.end_col) == (2, 3, 5)


@pytest.mark.parametrize("text", ["x # y", "<L1", "$"])
def test_lex_errors_carry_a_span(text):
    with pytest.raises(LexError) as info:
        tokenize(text)
    assert info.value.span is not None


def test_real_literal():
    (tok,) = tokenize("2.5")
    assert tok.kind == "real" and tok.value == Fraction(5, 2)


# --------------------------------------------------------------- parser

def test_division_model_shape():
    m = parse_model(read(corpus_path("division.cml")))
    (f,) = m.function_defs
    assert f.name == "division" and len(f.params) == 2 and f.pre is None
    assert f.body == ast.Binary("/", ast.VarRef("x"), ast.VarRef("y"))
    assert f.return_type == ast.RealType()


def test_dwarf_types_block():
    m = parse_model(read(corpus_path("dwarf.cml")))
    names = [t.name for t in m.type_defs]
    assert names == ["LampId", "Signal", "ProperState", "DwarfType"]
    dwarf = m.type_defs[3]
    assert isinstance(dwarf.body, ast.Record) and len(dwarf.body.fields) == 6
    parts = []
    e = dwarf.invariant.expr
    while isinstance(e, ast.Binary) and e.op == "and":
        parts.append(e.left)
        e = e.right
    parts.append(e)
    assert [p.name for p in parts] == ["NeverShowAll", "MaxOneLampChange", "ForbidStopToDrive",
                                       "DarkOnlyToStop", "DarkOnlyFromStop"]
    assert all(isinstance(p, ast.Apply) and p.args == (ast.VarRef("d"),) for p in parts)


def test_duplicate_quote_literals_parse():
    m = parse_model("types T = <A> | <A>")
    assert m.type_defs[0].body.literals == ("A", "A")


def test_precedence_and_or():
    e = parse_expression("a and b or c")
    assert e == ast.Binary("or", ast.Binary("and", ast.VarRef("a"), ast.VarRef("b")), ast.VarRef("c"))


def test_forall_two_binders():
    e = parse_expression("forall x:int, y:int & (y <> 0)")
    assert isinstance(e, ast.Quantifier) and e.kind == "forall"
    assert e.binders == (("x", ast.IntType()), ("y", ast.IntType()))
    assert e.body == ast.Binary("<>", ast.VarRef("y"), ast.IntLit(0))


def test_field_access_binds_tighter_than_equality():
    e = parse_expression("dw.lastproperstate = stop")
    assert e == ast.Binary("=", ast.FieldAccess(ast.VarRef("dw"), "lastproperstate"),
                           ast.VarRef("stop"))


@pytest.mark.parametrize("text, expected", [
    ("1 + 2 * 3", "(1 + (2 * 3))"),
    ("not a and b", "(not a and b)"),
    ("a => b => c", "(a => (b => c))"),
    ("a <=> b => c", "(a <=> (b => c))"),
    ("x in set s union t", "(x in set (s union t))"),
    ("card s + 1 > 2", "((card s + 1) > 2)"),
    ("-x * y", "(-x * y)"),
    ("forall x:bool & x and y", "forall x:bool & (x and y)"),
])
def test_precedence_table(text, expected):
    assert pretty_print(parse_expression(text)) == expected


def test_quantifier_extends_right():
    e = parse_expression("a and forall x:bool & x or b")
    assert isinstance(e.right, ast.Quantifier)
    assert e.right.body == ast.Binary("or", ast.VarRef("x"), ast.VarRef("b"))


@pytest.mark.parametrize("text, construct", [
    ("channels c", "channels"),
    ("process P = begin actions A = Skip end", "actions"),
    ("functions f: int -> int f(x) == x @ 1", "@"),
])
def test_unsupported_constructs(text, construct):
    with pytest.raises(UnsupportedFeature) as info:
        parse_model(text)
    assert construct in info.value.message


def test_operation_return_type_unsupported():
    text = "process P = begin state n : int operations Op : () ==> int Op() == n := 1 end"
    with pytest.raises(UnsupportedFeature):
        parse_model(text)


def test_parse_error_reports_expected_set():
    with pytest.raises(ParseError) as info:
        parse_expression("1 +")
    assert info.value.expected
    assert info.value.span.start_line == 1


def test_parse_errors_are_deterministic():
    msgs = []
    for _ in range(2):
        with pytest.raises(ParseError) as info:
            parse_model("functions f : int -> int f(x) == (x +")
        msgs.append(info.value.render())
    assert msgs[0] == msgs[1]


# -------------------------------------------------------------- printer

def test_print_po1_shape():
    e = ast.Quantifier("forall", (("x", ast.IntType()), ("y", ast.IntType())),
                       ast.Binary("<>", ast.VarRef("y"), ast.IntLit(0)))
    assert pretty_print(e) == "forall x:int, y:int & (y <> 0)"


def test_print_literal_and_application():
    assert pretty_print(ast.IntLit(0)) == "0"
    assert pretty_print(ast.Apply("pre_division", (ast.VarRef("x"), ast.IntLit(2)))) \
        == "pre_division(x, 2)"


@pytest.mark.parametrize("path", CORPUS_FILES)
def test_model_round_trip(path):
    m = parse_model(read(path), path)
    assert parse_model(print_model(m), path) == m


@pytest.mark.parametrize("path", CORPUS_FILES)
def test_spans_nest(path):
    m = parse_model(read(path), path)
    exprs = [v.expr for v in m.value_defs]
    for f in m.function_defs:
        exprs += [x for x in (f.body, f.pre, f.post) if x is not None]
    for e in exprs:
        for node in ast.walk(e):
            for child in ast.children(node):
                assert node.span.contains(child.span), (node, child)


# ------------------------------------------------ generated round trips

NAMES = st.sampled_from(["a", "b", "x", "y"])
ATOMS = st.one_of(
    st.integers(0, 50).map(ast.IntLit),
    st.booleans().map(ast.BoolLit),
    st.sampled_from(["A", "B"]).map(ast.QuoteLit),
    NAMES.map(ast.VarRef),
    # only terminating decimals can be written as source literals
    st.tuples(st.integers(1, 999), st.sampled_from([2, 4, 5, 8, 10, 100])).map(
        lambda t: Fraction(t[0], t[1])).filter(lambda q: q.denominator != 1).map(ast.RealLit),
)
BINOPS = ["+", "-", "*", "/", "div", "mod", "=", "<>", "<", "<=", ">", ">=", "and", "or",
          "=>", "<=>", "in set", "not in set", "union", "inter", "\\"]


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from(BINOPS), children, children).map(
            lambda t: ast.Binary(t[0], t[1], t[2])),
        st.tuples(st.sampled_from(["not", "-", "card"]), children).map(
            lambda t: ast.Unary(t[0], t[1])),
        st.lists(children, max_size=3).map(lambda xs: ast.SetEnum(tuple(xs))),
        st.tuples(children, children, children).map(lambda t: ast.IfThenElse(*t)),
        st.tuples(children, st.sampled_from(["f1", "g"])).map(lambda t: ast.FieldAccess(*t)),
        st.lists(children, min_size=1, max_size=2).map(lambda xs: ast.Apply("f", tuple(xs))),
        st.lists(children, max_size=2).map(lambda xs: ast.RecordCtor("R", tuple(xs))),
        st.tuples(st.sampled_from(["forall", "exists"]), NAMES, children).map(
            lambda t: ast.Quantifier(t[0], ((t[1], ast.BoolType()),), t[2])),
    )


EXPRS = st.recursive(ATOMS, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(EXPRS)
def test_printed_expressions_reparse(e):
    assert parse_expression(pretty_print(e)) == e
    assert parse_expression(pretty_print(e, minimal=True)) == e
