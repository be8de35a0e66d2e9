from cmlpo.syntax import ast, parse_expression as p
from cmlpo.terms import alpha_equal, conjuncts, free_vars, fresh_name, substitute


def test_free_vars_respect_binders():
    assert free_vars(p("forall x:int & x < y")) == {"y"}
    assert free_vars(p("f(a, b.c) and mk_R(d)")) == {"a", "b", "d"}


def test_substitute_replaces_free_occurrences_only():
    e = substitute(p("x = 1 and forall x:bool & x"), {"x": ast.IntLit(2)})
    assert e == p("2 = 1 and forall x:bool & x")


def test_substitute_avoids_capture():
    e = substitute(p("forall y:int & x < y"), {"x": ast.VarRef("y")})
    assert isinstance(e, ast.Quantifier)
    (name, _), = e.binders
    assert name != "y"
    assert free_vars(e) == {"y"}
    assert alpha_equal(e, p("forall z:int & y < z"))


def test_substitution_is_simultaneous():
    e = substitute(p("x + y"), {"x": ast.VarRef("y"), "y": ast.VarRef("x")})
    assert e == p("y + x")


def test_alpha_equality():
    assert alpha_equal(p("forall a:int & a > 0"), p("forall b:int & b > 0"))
    assert not alpha_equal(p("forall a:int & a > b"), p("forall b:int & b > b"))
    assert not alpha_equal(p("forall a:int & a > 0"), p("forall a:bool & a"))
    assert alpha_equal(p("forall a:int, b:int & a < b"), p("forall b:int, a:int & b < a"))
    assert not alpha_equal(p("forall a:int, b:int & a < b"), p("forall a:int, b:int & b < a"))


def test_fresh_name():
    assert fresh_name("x", {"y"}) == "x"
    assert fresh_name("x", {"x", "x1"}) == "x2"


def test_conjuncts_flatten_both_sides():
    assert conjuncts(p("(a and b) and (c and d)")) == [p(n) for n in "abcd"]
