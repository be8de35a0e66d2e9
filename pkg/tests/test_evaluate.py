import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmlpo.errors import (EvalError, NotEnumerable, PartialOpError, PreViolation,
                          QuantifierOverInfiniteType, UnboundName)
from cmlpo.evaluate import (Env, Evaluator, QuoteV, RecordV, enumerate_type, eval_expr,
                            apply_named, format_value, value_to_expr)
from cmlpo.syntax import ast, parse_expression, parse_type
from cmlpo.terms import free_vars, substitute

from conftest import checked
from strategies import SETQ, closed_expressions, quote_model

L1, L2, L3 = QuoteV("L1"), QuoteV("L2"), QuoteV("L3")


def ev(m, text, **bindings):
    return eval_expr(Env(m, bindings), parse_expression(text))


def test_membership_with_dwarf_values(dwarf):
    assert ev(dwarf, "stop in set {dark, stop, warning, drive}") is True
    assert ev(dwarf, "{<L1>} in set {dark, stop, warning, drive}") is False


def test_division_by_zero_is_partial(division):
    with pytest.raises(PartialOpError):
        ev(division, "1 / 0")
    with pytest.raises(PartialOpError):
        ev(division, "1 div 0")
    with pytest.raises(PartialOpError):
        ev(division, "1 mod 0")


def test_exact_rationals(division):
    assert ev(division, "(1/3) * 3 = 1") is True
    assert ev(division, "1 / 3") == Fraction(1, 3)
    assert ev(division, "0.1 + 0.2 = 0.3") is True


@pytest.mark.parametrize("a, b, q, r", [(7, 2, 3, 1), (-7, 2, -3, 1), (7, -2, -3, -1),
                                        (-7, -2, 3, -1)])
def test_div_truncates_and_mod_follows_divisor(division, a, b, q, r):
    assert ev(division, "a div b", a=a, b=b) == q
    assert ev(division, "a mod b", a=a, b=b) == r


def test_short_circuit_guards(division):
    assert ev(division, "false and 1 / 0 = 1") is False
    assert ev(division, "true or 1 / 0 = 1") is True
    assert ev(division, "false => 1 / 0 = 1") is True
    assert ev(division, "if true then 1 else 1 / 0") == 1


def test_unbound_name(division):
    with pytest.raises(UnboundName):
        ev(division, "nope + 1")


def test_quantifier_over_int_is_refused(division):
    with pytest.raises(QuantifierOverInfiniteType):
        ev(division, "forall n:int & n = n")


def test_finite_quantifiers(dwarf):
    assert ev(dwarf, "forall s:Signal & card s <= 3") is True
    assert ev(dwarf, "exists l:LampId & l in set stop") is True
    assert ev(dwarf, "forall l:LampId & l in set stop") is False


def test_records_and_fields(dwarf):
    r = ev(dwarf, "mk_DwarfType(stop, {}, {}, stop, stop, stop)")
    assert isinstance(r, RecordV) and r.get("currentstate") == frozenset({L1, L2})
    assert ev(dwarf, "mk_DwarfType(stop, {}, {}, stop, stop, stop).turnon = {}") is True
    assert format_value(r) == "mk_DwarfType({<L1>, <L2>}, {}, {}, {<L1>, <L2>}, {<L1>, <L2>}, {<L1>, <L2>})"


def test_invariant_functions_evaluate(dwarf):
    assert ev(dwarf, "inv_ProperState(stop)") is True
    assert ev(dwarf, "inv_DwarfType(mk_DwarfType(stop, {}, {}, stop, stop, stop))") is True
    assert ev(dwarf, "inv_ProperState({<L1>})") is False


def test_enumerate_quotes_in_declaration_order(dwarf):
    assert list(enumerate_type(ast.NamedType("LampId"), dwarf.env)) == [L1, L2, L3]


def test_enumerate_sets_by_cardinality(dwarf):
    sets = list(enumerate_type(ast.NamedType("Signal"), dwarf.env))
    assert len(sets) == 8
    assert sets[0] == frozenset() and sets[-1] == frozenset({L1, L2, L3})
    assert sets[1:4] == [frozenset({L1}), frozenset({L2}), frozenset({L3})]
    assert [len(s) for s in sets] == sorted(len(s) for s in sets)


def test_enumerate_int_order(division):
    assert list(itertools.islice(enumerate_type(ast.IntType(), division.env), 5)) == [0, 1, -1, 2, -2]


def test_enumerate_real_refused(division):
    with pytest.raises(NotEnumerable):
        list(enumerate_type(ast.RealType(), division.env))


def test_enumerate_records_first_field_slowest():
    m = checked("types R :: a : bool b : bool")
    vals = [(r.values) for r in enumerate_type(ast.NamedType("R"), m.env)]
    assert vals == [(False, False), (False, True), (True, False), (True, True)]


def test_enumeration_has_no_duplicates(dwarf):
    for text in ["set of Signal", "DwarfType"]:
        t = parse_type(text)
        if text == "DwarfType":
            values = list(itertools.islice(enumerate_type(t, dwarf.env), 5000))
        else:
            values = list(enumerate_type(t, dwarf.env))
        assert len(values) == len(set(values))


def test_apply_named(division, division_pre):
    env = Env(division_pre)
    assert apply_named("division", [1, 2], env) == Fraction(1, 2)
    assert apply_named("divby2", [3], env) == Fraction(3, 2)
    with pytest.raises(PreViolation):
        apply_named("division", [1, 0], env)
    with pytest.raises(PartialOpError):
        apply_named("division", [1, 0], Env(division))


def test_eval_expr_does_not_check_pre(division_pre):
    with pytest.raises(PartialOpError):
        ev(division_pre, "division(1, 0)")


def test_recursion_depth_limit():
    m = checked("functions f : int -> int f(n) == if n = 0 then 0 else f(n - 1)")
    e = Evaluator(m, depth_limit=50)
    assert e.eval(parse_expression("f(40)"), {}) == 0
    with pytest.raises(EvalError):
        e.eval(parse_expression("f(60)"), {})
    with pytest.raises(EvalError):
        Evaluator(m).eval(parse_expression("f(-1)"), {})


def test_value_to_expr_round_trip(dwarf):
    r = ev(dwarf, "mk_DwarfType(stop, {}, {}, warning, stop, drive)")
    assert eval_expr(Env(dwarf), value_to_expr(r)) == r
    for q in (Fraction(-7, 3), Fraction(5, 2), 0, -4):
        assert eval_expr(Env(dwarf), value_to_expr(q)) == q


def test_ordering_is_deterministic(dwarf):
    assert format_value(frozenset({L3, L1})) == "{<L1>, <L3>}"


# ------------------------------------------------------------ properties

@settings(max_examples=300, deadline=None)
@given(closed_expressions())
def test_progress_only_partial_errors(case):
    model, e = case
    try:
        Evaluator(model).eval(e, {})
    except PartialOpError:
        pass


@settings(max_examples=200, deadline=None)
@given(closed_expressions(max_depth=3), st.data())
def test_substitution_lemma(case, data):
    model, e = case
    # abstract one closed subterm of e as a variable
    subterms = [n for n in ast.walk(e) if not free_vars(n)]
    target = data.draw(st.sampled_from(subterms))
    ev_ = Evaluator(model)
    try:
        v = ev_.eval(target, {})
        expected = ev_.eval(e, {})
    except PartialOpError:
        return
    holed = _replace(e, target, ast.VarRef("hole"))
    assert ev_.eval(holed, {"hole": v}) == expected
    assert ev_.eval(substitute(holed, {"hole": value_to_expr(v)}), {}) == expected


def _replace(e, target, repl):
    if e is target:
        return repl
    from cmlpo.terms import map_children
    return map_children(e, lambda c: _replace(c, target, repl))


def test_sets_over_invariant_types_enumerate(dwarf):
    assert len(list(enumerate_type(SETQ, quote_model(2).env))) == 4
