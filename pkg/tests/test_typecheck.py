import pytest

from cmlpo.errors import ModelErrors
from cmlpo.evaluate import enumerate_type
from cmlpo.syntax import ast, parse_model, parse_type
from cmlpo.typecheck import REAL, check_model

from conftest import CORPUS_FILES, checked, read


def errors_of(text):
    with pytest.raises(ModelErrors) as info:
        checked(text)
    return [e.message for e in info.value.errors]


def test_division_body_is_real(division):
    body = division.ast.function_defs[0].body
    assert division.type_of(body) == REAL


def test_dwarf_checks_clean(dwarf):
    assert len(dwarf.ast.type_defs) == 4


def test_base_type_mismatch():
    msgs = errors_of("values v : bool = 1 = true")
    assert len(msgs) == 1


def test_errors_are_collected_in_source_order():
    text = ("values\n a : int = true\n b : bool = 1\n"
            "functions\n f : int -> int\n f(x) == y\n")
    with pytest.raises(ModelErrors) as info:
        checked(text, "m.cml")
    errs = info.value.errors
    assert len(errs) == 3
    lines = [e.span.start_line for e in errs]
    assert lines == sorted(lines)
    assert info.value.render().splitlines()[0].startswith("m.cml:2:")


def test_duplicate_quote_literal_is_a_type_error():
    assert errors_of("types T = <A> | <A>")


@pytest.mark.parametrize("text", [
    "types T = U",
    "types T = T",
    "functions f : int -> int f(x) == g(x)",
    "functions f : int -> int f(x) == x / 2",
    "values v : int = card 3",
    "values v : bool = 1 in set {true}",
    "values v : bool = forall x:int & 1",
    "types R :: a : int values v : R = mk_R(1, 2)",
    "types R :: a : int values v : int = mk_R(1).b",
    "process P = begin state n : int operations Op : () ==> () Op() == m := 1 end",
    "process P = begin state n : int operations Op : () ==> () Op() == n := true end",
    "values a : int = 1 a : int = 2",
])
def test_rejected_models(text):
    assert errors_of(text)


def test_param_count_must_match_signature():
    from cmlpo.errors import ParseError
    with pytest.raises(ParseError):
        checked("functions f : int * int -> int f(x) == x")


def test_int_is_usable_as_real():
    checked("functions h : int -> real h(x) == x + 1")


def test_numeric_mixed_division_is_real():
    m = checked("functions h : real * int -> real h(x, n) == x / n")
    assert m.type_of(m.ast.function_defs[0].body) == REAL


def test_quantifier_shadowing_innermost_wins():
    checked("functions h : int -> bool h(x) == forall x:bool & x")


def test_post_may_mention_result():
    checked("functions h : int -> int h(x) == x + 1 post RESULT > x")


def test_pre_and_inv_names_resolve(dwarf):
    sig = dwarf.env.signature("inv_ProperState")
    assert sig is not None and sig.result == ast.BoolType()


def test_finite_domain_examples(dwarf):
    env = dwarf.env
    assert env.finite_domain(ast.NamedType("LampId")) == 3
    assert env.finite_domain(ast.NamedType("Signal")) == 8
    assert env.finite_domain(ast.IntType()) is None
    assert env.finite_domain(ast.RealType()) is None
    assert env.finite_domain(ast.BoolType()) == 2
    assert env.finite_domain(ast.NamedType("DwarfType")) == 8 ** 6


def test_finite_domain_is_exact_for_huge_sets():
    m = checked("types Q = <A> | <B> | <C> S = set of set of set of Q")
    assert m.env.finite_domain(ast.NamedType("S")) == 2 ** (2 ** 8)


def test_finite_domain_agrees_with_enumeration(dwarf):
    env = dwarf.env
    for text in ["LampId", "Signal", "ProperState", "bool", "set of bool", "set of Signal"]:
        t = parse_type(text)
        assert env.finite_domain(t) == len(list(enumerate_type(t, env))) == \
            len(set(enumerate_type(t, env)))


def test_invariant_chains(dwarf):
    env = dwarf.env
    (link,) = env.invariant_chain(ast.NamedType("ProperState"))
    assert link.type_name == "ProperState" and link.binder == "ps"
    assert link.expr == ast.Binary("in set", ast.VarRef("ps"), ast.SetEnum(tuple(
        ast.VarRef(n) for n in ("dark", "stop", "warning", "drive"))))
    assert env.invariant_chain(ast.IntType()) == []
    assert env.invariant_chain(ast.NamedType("Signal")) == []
    (d,) = env.invariant_chain(ast.NamedType("DwarfType"))
    assert d.binder == "d"


def test_chain_lists_every_ancestor_outermost_first():
    m = checked("types A = int inv a == a > 0 B = A C = B inv c == c < 10")
    chain = m.env.invariant_chain(ast.NamedType("C"))
    assert [l.type_name for l in chain] == ["C", "A"]


@pytest.mark.parametrize("path", CORPUS_FILES)
def test_checking_is_idempotent(path):
    m1 = check_model(parse_model(read(path), path))
    m2 = check_model(m1.ast)
    for f in m1.ast.function_defs:
        assert m1.annotations(f.body) == m2.annotations(f.body)
