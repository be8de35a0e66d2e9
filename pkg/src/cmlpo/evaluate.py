"""Exact evaluation of closed expressions.

Runtime values are plain Python objects: ``int`` for integers, ``Fraction`` for
reals, ``bool``, :class:`QuoteV`, ``frozenset`` for sets and :class:`RecordV`.
``and``, ``or`` and ``=>`` short-circuit, so a guarded partial operation such
as ``x <> 0 and 1/x > 0`` is defined everywhere.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .errors import (EvalError, NotEnumerable, PartialOpError, PreViolation,
                     QuantifierOverInfiniteType, UnboundName)
from .syntax import ast
from .syntax.printer import format_real
from .typecheck import CheckedModel, TypeEnv

DEFAULT_DEPTH_LIMIT = 10_000


@dataclass(frozen=True, order=True)
class QuoteV:
    name: str

    def __repr__(self):
        return f"<{self.name}>"


@dataclass(frozen=True)
class RecordV:
    type_name: str
    names: tuple[str, ...] = field(compare=False)
    values: tuple

    def get(self, name: str):
        return self.values[self.names.index(name)]

    def __repr__(self):
        return format_value(self)


class EvalTimeout(EvalError):
    pass


# ------------------------------------------------------------- printing

def sort_key(v):
    if isinstance(v, bool):
        return (0, v)
    if isinstance(v, (int, Fraction)):
        return (1, v)
    if isinstance(v, QuoteV):
        return (2, v.name)
    if isinstance(v, frozenset):
        return (3, len(v), tuple(sorted(sort_key(x) for x in v)))
    if isinstance(v, RecordV):
        return (4, v.type_name, tuple(sort_key(x) for x in v.values))
    raise TypeError(f"not a value: {v!r}")


def format_value(v) -> str:
    """Source-syntax rendering, e.g. ``{<L1>, <L2>}``; sets are printed sorted."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return format_real(v)
    if isinstance(v, QuoteV):
        return f"<{v.name}>"
    if isinstance(v, frozenset):
        return "{" + ", ".join(format_value(x) for x in sorted(v, key=sort_key)) + "}"
    if isinstance(v, RecordV):
        return f"mk_{v.type_name}(" + ", ".join(format_value(x) for x in v.values) + ")"
    raise TypeError(f"not a value: {v!r}")


def value_to_expr(v) -> ast.Expr:
    """An expression denoting ``v``."""
    if isinstance(v, bool):
        return ast.BoolLit(v)
    if isinstance(v, int):
        return ast.IntLit(v) if v >= 0 else ast.Unary("-", ast.IntLit(-v))
    if isinstance(v, Fraction):
        if v < 0:
            return ast.Unary("-", value_to_expr(-v))
        text = format_real(v)
        if "/" in text:
            return ast.Binary("/", ast.IntLit(v.numerator), ast.IntLit(v.denominator))
        return ast.RealLit(v)
    if isinstance(v, QuoteV):
        return ast.QuoteLit(v.name)
    if isinstance(v, frozenset):
        return ast.SetEnum(tuple(value_to_expr(x) for x in sorted(v, key=sort_key)))
    if isinstance(v, RecordV):
        return ast.RecordCtor(v.type_name, tuple(value_to_expr(x) for x in v.values))
    raise TypeError(f"not a value: {v!r}")


# ---------------------------------------------------------- enumeration

def _int_order() -> Iterator[int]:
    yield 0
    n = 1
    while True:
        yield n
        yield -n
        n += 1


def enumerate_type(t: ast.TypeExpr, env: TypeEnv) -> Iterator:
    """Carrier values of ``t`` in the canonical order (invariants are not applied).

    Quote unions follow declaration order, sets go by increasing cardinality and
    then lexicographically by element position, records vary their last field
    fastest, and ``int`` runs 0, 1, -1, 2, -2, ...
    """
    t = env.unfold(t)
    if isinstance(t, ast.BoolType):
        return iter((False, True))
    if isinstance(t, ast.IntType):
        return _int_order()
    if isinstance(t, ast.RealType):
        raise NotEnumerable("real values cannot be enumerated", t.span)
    if isinstance(t, ast.SetType):
        if env.finite_domain(t.elem) is None:
            raise NotEnumerable("set over an unbounded element type", t.span)
        elems = list(enumerate_type(t.elem, env))
        return (frozenset(c) for k in range(len(elems) + 1)
                for c in itertools.combinations(elems, k))
    if isinstance(t, ast.NamedType):
        td = env.types.get(t.name)
        if td is None:
            raise NotEnumerable(f"unknown type {t.name!r}", t.span)
        if isinstance(td.body, ast.QuoteUnion):
            return iter([QuoteV(q) for q in td.body.literals])
        if isinstance(td.body, ast.Record):
            if env.finite_domain(t) is None:
                raise NotEnumerable(f"record {t.name} has an unbounded field", t.span)
            names = tuple(f for f, _ in td.body.fields)
            domains = [list(enumerate_type(ft, env)) for _, ft in td.body.fields]
            return (RecordV(td.name, names, vals) for vals in itertools.product(*domains))
    raise NotEnumerable(f"cannot enumerate {t!r}", getattr(t, "span", None))


def sample_value(t: ast.TypeExpr, env: TypeEnv, rng, int_bound: int = 64):
    """A random carrier value of ``t``; integers are drawn from ``[-int_bound, int_bound]``."""
    t = env.unfold(t)
    if isinstance(t, ast.BoolType):
        return rng.random() < 0.5
    if isinstance(t, ast.IntType):
        return rng.randint(-int_bound, int_bound)
    if isinstance(t, ast.RealType):
        return Fraction(rng.randint(-4 * int_bound, 4 * int_bound), rng.randint(1, 4))
    if isinstance(t, ast.SetType):
        if env.finite_domain(t.elem) is not None and env.finite_domain(t.elem) <= 64:
            return frozenset(x for x in enumerate_type(t.elem, env) if rng.random() < 0.5)
        return frozenset(sample_value(t.elem, env, rng, int_bound)
                         for _ in range(rng.randint(0, 3)))
    if isinstance(t, ast.NamedType):
        td = env.types[t.name]
        if isinstance(td.body, ast.QuoteUnion):
            return QuoteV(rng.choice(td.body.literals))
        if isinstance(td.body, ast.Record):
            return RecordV(td.name, tuple(f for f, _ in td.body.fields),
                           tuple(sample_value(ft, env, rng, int_bound)
                                 for _, ft in td.body.fields))
    raise NotEnumerable(f"cannot sample {t!r}", getattr(t, "span", None))


# ------------------------------------------------------------ evaluator

def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


class Evaluator:
    """Evaluates expressions against one checked model.

    ``deadline`` is a :func:`time.monotonic` instant after which evaluation
    raises :class:`EvalTimeout`.
    """

    def __init__(self, model: CheckedModel, depth_limit: int = DEFAULT_DEPTH_LIMIT,
                 deadline: Optional[float] = None):
        self.model = model
        self.env = model.env
        self.depth_limit = depth_limit
        self.deadline = deadline
        self._depth = 0
        self._ticks = 0
        self._values: dict[str, object] = {}
        self._in_progress: set[str] = set()
        self._domain_cache: dict = {}

    def tick(self):
        self._ticks += 1
        if self.deadline is not None and self._ticks % 256 == 0 and time.monotonic() > self.deadline:
            raise EvalTimeout("evaluation deadline passed")

    def domain(self, t: ast.TypeExpr, span=None) -> list:
        key = t
        if key not in self._domain_cache:
            if self.env.finite_domain(t) is None:
                raise QuantifierOverInfiniteType(
                    f"cannot quantify over unbounded type", span)
            self._domain_cache[key] = list(enumerate_type(t, self.env))
        return self._domain_cache[key]

    def value(self, name: str, span=None):
        if name in self._values:
            return self._values[name]
        vd = self.env.values.get(name)
        if vd is None:
            raise UnboundName(f"unbound name {name!r}", span)
        if name in self._in_progress:
            raise EvalError(f"value {name!r} depends on itself", span)
        self._in_progress.add(name)
        try:
            v = self.eval(vd.expr, {})
        finally:
            self._in_progress.discard(name)
        self._values[name] = v
        return v

    def eval(self, e: ast.Expr, bindings: dict):
        try:
            return self._eval(e, bindings)
        except RecursionError:
            raise EvalError("evaluation nested too deeply", e.span) from None

    def _eval(self, e, b):
        ev = self._eval
        cls = type(e)
        if cls is ast.VarRef:
            if e.name in b:
                return b[e.name]
            return self.value(e.name, e.span)
        if cls is ast.Binary:
            op = e.op
            if op == "and":
                return ev(e.left, b) and ev(e.right, b)
            if op == "or":
                return ev(e.left, b) or ev(e.right, b)
            if op == "=>":
                return (not ev(e.left, b)) or ev(e.right, b)
            lhs = ev(e.left, b)
            rhs = ev(e.right, b)
            return self._binary(op, lhs, rhs, e)
        if cls is ast.FieldAccess:
            return ev(e.expr, b).get(e.field)
        if cls is ast.Apply:
            return self.call(e.name, [ev(a, b) for a in e.args], e.span, check_pre=False)
        if cls is ast.IntLit or cls is ast.BoolLit:
            return e.value
        if cls is ast.RealLit:
            return Fraction(e.value)
        if cls is ast.QuoteLit:
            return QuoteV(e.name)
        if cls is ast.SetEnum:
            return frozenset(ev(x, b) for x in e.elems)
        if cls is ast.RecordCtor:
            rec = self.env.record(e.type_name)
            return RecordV(e.type_name, tuple(f for f, _ in rec.fields),
                           tuple(ev(a, b) for a in e.args))
        if cls is ast.Unary:
            v = ev(e.operand, b)
            if e.op == "not":
                return not v
            if e.op == "-":
                return -v
            return len(v)
        if cls is ast.IfThenElse:
            return ev(e.then, b) if ev(e.cond, b) else ev(e.else_, b)
        if cls is ast.Quantifier:
            return self._quantifier(e, b)
        raise TypeError(f"not an expression: {e!r}")

    def _binary(self, op, lhs, rhs, e):
        if op == "=":
            return lhs == rhs
        if op == "<>":
            return lhs != rhs
        if op == "in set":
            return lhs in rhs
        if op == "not in set":
            return lhs not in rhs
        if op == "+":
            return lhs + rhs
        if op == "-":
            return lhs - rhs
        if op == "*":
            return lhs * rhs
        if op == "/":
            if rhs == 0:
                raise PartialOpError("division by zero", e.span)
            return Fraction(lhs) / rhs
        if op == "div":
            if rhs == 0:
                raise PartialOpError("div by zero", e.span)
            return _trunc_div(lhs, rhs)
        if op == "mod":
            if rhs == 0:
                raise PartialOpError("mod by zero", e.span)
            return lhs % rhs
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == ">":
            return lhs > rhs
        if op == ">=":
            return lhs >= rhs
        if op == "<=>":
            return lhs == rhs
        if op == "union":
            return lhs | rhs
        if op == "inter":
            return lhs & rhs
        if op == "\\":
            return lhs - rhs
        raise TypeError(f"unknown operator {op!r}")

    def _quantifier(self, e: ast.Quantifier, b):
        names = [n for n, _ in e.binders]
        domains = [self.domain(t, e.span) for _, t in e.binders]
        want = e.kind == "forall"
        inner = dict(b)
        for combo in itertools.product(*domains):
            self.tick()
            inner.update(zip(names, combo))
            if bool(self._eval(e.body, inner)) != want:
                return not want
        return want

    def call(self, name: str, args: list, span=None, check_pre: bool = True):
        self.tick()
        fd = self.env.functions.get(name)
        if fd is not None:
            if len(args) != len(fd.params):
                raise EvalError(f"{name} takes {len(fd.params)} argument(s)", span)
            binding = dict(zip(fd.params, args))
            if check_pre and fd.pre is not None and not self._eval(fd.pre, binding):
                raise PreViolation(f"pre-condition of {name} violated", span)
            self._depth += 1
            try:
                if self._depth > self.depth_limit:
                    raise EvalError(f"recursion depth limit {self.depth_limit} exceeded", span)
                return self._eval(fd.body, binding)
            finally:
                self._depth -= 1
        expansion = self.env.expansion(name)
        if expansion is None:
            raise UnboundName(f"unknown function {name!r}", span)
        params, body = expansion
        return self._eval(body, dict(zip(params, args)))


# ------------------------------------------------------------ interface

@dataclass
class Env:
    """Variable bindings over a checked model."""

    model: CheckedModel
    bindings: dict = field(default_factory=dict)
    evaluator: Optional[Evaluator] = None

    def __post_init__(self):
        if self.evaluator is None:
            self.evaluator = Evaluator(self.model)

    def bind(self, **values) -> "Env":
        return Env(self.model, {**self.bindings, **values}, self.evaluator)


def eval_expr(env: Env, e: ast.Expr):
    return env.evaluator.eval(e, env.bindings)


def apply_named(name: str, args: list, env: Env):
    """Call function ``name``, raising :class:`PreViolation` when its pre-condition fails."""
    return env.evaluator.call(name, list(args), check_pre=True)
