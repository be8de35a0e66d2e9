"""Name resolution and static typing.

Types are resolved to structural *base* types (``Ty``); synonyms share the base
of what they name, and invariants are not checked here. Invariant conformance
is the job of the subtype proof obligations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Optional, Union

from .errors import ModelErrors, TypeCheckError
from .syntax import ast


# ----------------------------------------------------------- base types

@dataclass(frozen=True)
class IntTy:
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class RealTy:
    def __str__(self):
        return "real"


@dataclass(frozen=True)
class BoolTy:
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class QuoteTy:
    literals: frozenset

    def __str__(self):
        return " | ".join(f"<{q}>" for q in sorted(self.literals))


@dataclass(frozen=True)
class SetTy:
    elem: Optional["Ty"]  # None for the empty set literal

    def __str__(self):
        return f"set of {self.elem if self.elem is not None else '?'}"


@dataclass(frozen=True)
class RecordTy:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class UnknownTy:
    """Placeholder after an error; compatible with everything."""

    def __str__(self):
        return "?"


Ty = Union[IntTy, RealTy, BoolTy, QuoteTy, SetTy, RecordTy, UnknownTy]

INT, REAL, BOOL, UNKNOWN = IntTy(), RealTy(), BoolTy(), UnknownTy()


def is_numeric(t: Ty) -> bool:
    return isinstance(t, (IntTy, RealTy, UnknownTy))


def assignable(actual: Ty, expected: Ty) -> bool:
    """Whether a value of base type ``actual`` may stand where ``expected`` is required."""
    if isinstance(actual, UnknownTy) or isinstance(expected, UnknownTy):
        return True
    if isinstance(expected, RealTy) and isinstance(actual, IntTy):
        return True
    if isinstance(actual, QuoteTy) and isinstance(expected, QuoteTy):
        return actual.literals <= expected.literals
    if isinstance(actual, SetTy) and isinstance(expected, SetTy):
        if actual.elem is None or expected.elem is None:
            return True
        return assignable(actual.elem, expected.elem)
    return actual == expected


def compatible(a: Ty, b: Ty) -> bool:
    """Whether values of ``a`` and ``b`` can be compared for equality."""
    if isinstance(a, UnknownTy) or isinstance(b, UnknownTy):
        return True
    if is_numeric(a) and is_numeric(b):
        return True
    if isinstance(a, QuoteTy) and isinstance(b, QuoteTy):
        # all quote literals live in one domain; disjoint unions simply never compare equal
        return True
    if isinstance(a, SetTy) and isinstance(b, SetTy):
        if a.elem is None or b.elem is None:
            return True
        return compatible(a.elem, b.elem)
    return a == b


def join(a: Ty, b: Ty) -> Ty:
    if isinstance(a, UnknownTy):
        return b
    if isinstance(b, UnknownTy):
        return a
    if is_numeric(a) and is_numeric(b):
        return REAL if REAL in (a, b) else INT
    if isinstance(a, QuoteTy) and isinstance(b, QuoteTy):
        return QuoteTy(a.literals | b.literals)
    if isinstance(a, SetTy) and isinstance(b, SetTy):
        if a.elem is None:
            return b
        if b.elem is None:
            return a
        return SetTy(join(a.elem, b.elem))
    return a


# ----------------------------------------------------------- environment

@dataclass(frozen=True)
class InvariantLink:
    type_name: str
    binder: str
    expr: ast.Expr


@dataclass(frozen=True)
class Signature:
    name: str
    params: tuple[tuple[str, ast.TypeExpr], ...]
    result: ast.TypeExpr
    has_pre: bool = False


class TypeEnv:
    """Resolved tables for one model."""

    def __init__(self, model: ast.ModelAst):
        self.model = model
        self.types: dict[str, ast.TypeDef] = {}
        self.values: dict[str, ast.ValueDef] = {}
        self.functions: dict[str, ast.FunctionDef] = {}
        for td in model.type_defs:
            self.types.setdefault(td.name, td)
        for vd in model.value_defs:
            self.values.setdefault(vd.name, vd)
        for fd in model.function_defs:
            self.functions.setdefault(fd.name, fd)
        self.quote_owners: dict[str, list[str]] = {}
        for td in model.type_defs:
            if isinstance(td.body, ast.QuoteUnion):
                for q in dict.fromkeys(td.body.literals):
                    self.quote_owners.setdefault(q, []).append(td.name)
        self.value_types: dict[str, Ty] = {}
        self._resolving: set[str] = set()
        self._values_in_progress: set[str] = set()

    # types

    def resolve(self, t: ast.TypeExpr) -> Ty:
        if isinstance(t, ast.IntType):
            return INT
        if isinstance(t, ast.RealType):
            return REAL
        if isinstance(t, ast.BoolType):
            return BOOL
        if isinstance(t, ast.SetType):
            return SetTy(self.resolve(t.elem))
        if isinstance(t, ast.NamedType):
            td = self.types.get(t.name)
            if td is None or t.name in self._resolving:
                return UNKNOWN
            if isinstance(td.body, ast.QuoteUnion):
                return QuoteTy(frozenset(td.body.literals))
            if isinstance(td.body, ast.Record):
                return RecordTy(td.name)
            self._resolving.add(t.name)
            try:
                return self.resolve(td.body.type)
            finally:
                self._resolving.discard(t.name)
        raise TypeError(f"not a type: {t!r}")

    def record(self, name: str) -> Optional[ast.Record]:
        td = self.types.get(name)
        if td is not None and isinstance(td.body, ast.Record):
            return td.body
        return None

    def unfold(self, t: ast.TypeExpr) -> ast.TypeExpr:
        """Follow synonym names until reaching a structural type or a union/record name."""
        seen = set()
        while isinstance(t, ast.NamedType) and t.name not in seen:
            seen.add(t.name)
            td = self.types.get(t.name)
            if td is None or not isinstance(td.body, ast.Synonym):
                return t
            t = td.body.type
        return t

    def finite_domain(self, t: ast.TypeExpr) -> Optional[int]:
        """Number of carrier values of ``t`` (invariants ignored), or None when unbounded."""
        t = self.unfold(t)
        if isinstance(t, ast.BoolType):
            return 2
        if isinstance(t, (ast.IntType, ast.RealType)):
            return None
        if isinstance(t, ast.SetType):
            k = self.finite_domain(t.elem)
            return None if k is None else 2 ** k
        if isinstance(t, ast.NamedType):
            td = self.types.get(t.name)
            if td is None:
                return None
            if isinstance(td.body, ast.QuoteUnion):
                return len(td.body.literals)
            if isinstance(td.body, ast.Record):
                sizes = [self.finite_domain(ft) for _, ft in td.body.fields]
                if any(s is None for s in sizes):
                    return None
                return prod(sizes)
        return None

    def invariant_chain(self, t: ast.TypeExpr) -> list[InvariantLink]:
        chain = []
        seen = set()
        while isinstance(t, ast.NamedType) and t.name not in seen:
            seen.add(t.name)
            td = self.types.get(t.name)
            if td is None:
                break
            if td.invariant is not None:
                chain.append(InvariantLink(td.name, td.invariant.binder, td.invariant.expr))
            if not isinstance(td.body, ast.Synonym):
                break
            t = td.body.type
        return chain

    def is_named_subtype(self, sub: Optional[ast.TypeExpr], sup: ast.TypeExpr) -> bool:
        """True when ``sub`` names ``sup`` or reaches it through synonym links."""
        if not isinstance(sub, ast.NamedType) or not isinstance(sup, ast.NamedType):
            return False
        seen = set()
        t = sub
        while isinstance(t, ast.NamedType) and t.name not in seen:
            if t.name == sup.name:
                return True
            seen.add(t.name)
            td = self.types.get(t.name)
            if td is None or not isinstance(td.body, ast.Synonym):
                return False
            t = td.body.type
        return False

    # callables

    def signature(self, name: str) -> Optional[Signature]:
        fd = self.functions.get(name)
        if fd is not None:
            return Signature(fd.name, fd.typed_params, fd.return_type, fd.pre is not None)
        if name.startswith("pre_"):
            fd = self.functions.get(name[4:])
            if fd is not None:
                return Signature(name, fd.typed_params, ast.BoolType())
        if name.startswith("inv_"):
            td = self.types.get(name[4:])
            if td is not None and td.invariant is not None:
                return Signature(name, ((td.invariant.binder, ast.NamedType(td.name)),),
                                 ast.BoolType())
        return None

    def expansion(self, name: str) -> Optional[tuple[tuple[str, ...], ast.Expr]]:
        """Parameters and defining expression of a ``pre_f`` / ``inv_T`` name."""
        if name.startswith("pre_") and name not in self.functions:
            fd = self.functions.get(name[4:])
            if fd is not None:
                return fd.params, fd.pre if fd.pre is not None else ast.TRUE
        if name.startswith("inv_") and name not in self.functions:
            td = self.types.get(name[4:])
            if td is not None and td.invariant is not None:
                return (td.invariant.binder,), td.invariant.expr
        return None


# --------------------------------------------------------------- checker

@dataclass
class CheckedModel:
    ast: ast.ModelAst
    env: TypeEnv
    # id(node) -> (base type, declared type); nodes kept alive in ``_nodes``
    _types: dict[int, tuple[Ty, Optional[ast.TypeExpr]]] = field(default_factory=dict, repr=False)
    _nodes: list = field(default_factory=list, repr=False)

    @property
    def file(self) -> str:
        return self.ast.file

    def type_of(self, e: ast.Expr) -> Ty:
        return self._types[id(e)][0]

    def declared_type(self, e: ast.Expr) -> Optional[ast.TypeExpr]:
        entry = self._types.get(id(e))
        return entry[1] if entry else None

    def annotations(self, e: ast.Expr) -> list[str]:
        """Base types of every node under ``e`` in pre-order, for comparisons."""
        return [str(self.type_of(n)) for n in ast.walk(e)]


class ExprChecker:
    """Infers types of expressions; errors are appended to ``errors``."""

    def __init__(self, env: TypeEnv, errors: list, record=None):
        self.env = env
        self.errors = errors
        self.record = record

    def error(self, span, msg):
        self.errors.append(TypeCheckError(msg, span))

    def note(self, e, ty, decl=None):
        if self.record is not None:
            self.record(e, ty, decl)
        return ty

    def expect(self, e, scope, expected: Ty, what: str) -> Ty:
        ty = self.infer(e, scope)
        if not assignable(ty, expected):
            self.error(e.span, f"{what}: expected {expected}, found {ty}")
        return ty

    def value_type(self, name: str, span) -> tuple[Ty, Optional[ast.TypeExpr]]:
        vd = self.env.values[name]
        if vd.type is not None:
            return self.env.resolve(vd.type), vd.type
        if name in self.env.value_types:
            return self.env.value_types[name], None
        if name in self.env._values_in_progress:
            self.error(span, f"value {name!r} depends on itself")
            return UNKNOWN, None
        self.env._values_in_progress.add(name)
        try:
            ty = ExprChecker(self.env, []).infer(vd.expr, {})
        finally:
            self.env._values_in_progress.discard(name)
        self.env.value_types[name] = ty
        return ty, None

    def infer(self, e: ast.Expr, scope: dict) -> Ty:
        env = self.env
        if isinstance(e, ast.IntLit):
            return self.note(e, INT, ast.IntType())
        if isinstance(e, ast.RealLit):
            return self.note(e, REAL, ast.RealType())
        if isinstance(e, ast.BoolLit):
            return self.note(e, BOOL, ast.BoolType())
        if isinstance(e, ast.QuoteLit):
            if e.name not in env.quote_owners:
                self.error(e.span, f"quote literal <{e.name}> is not declared by any type")
                return self.note(e, UNKNOWN)
            return self.note(e, QuoteTy(frozenset({e.name})))
        if isinstance(e, ast.VarRef):
            if e.name in scope:
                decl = scope[e.name]
                return self.note(e, env.resolve(decl), decl)
            if e.name in env.values:
                ty, decl = self.value_type(e.name, e.span)
                return self.note(e, ty, decl)
            self.error(e.span, f"unknown name {e.name!r}")
            return self.note(e, UNKNOWN)
        if isinstance(e, ast.SetEnum):
            elem = None
            for x in e.elems:
                t = self.infer(x, scope)
                if elem is not None and not compatible(elem, t):
                    self.error(x.span, f"set element of type {t} does not match {elem}")
                elem = t if elem is None else join(elem, t)
            return self.note(e, SetTy(elem))
        if isinstance(e, ast.RecordCtor):
            rec = env.record(e.type_name)
            if rec is None:
                self.error(e.span, f"mk_{e.type_name}: {e.type_name!r} is not a record type")
                for a in e.args:
                    self.infer(a, scope)
                return self.note(e, UNKNOWN)
            if len(e.args) != len(rec.fields):
                self.error(e.span, f"mk_{e.type_name} takes {len(rec.fields)} argument(s), "
                                   f"given {len(e.args)}")
            for a, (fname, ftype) in zip(e.args, rec.fields):
                self.expect(a, scope, env.resolve(ftype), f"field {fname!r} of {e.type_name}")
            for a in e.args[len(rec.fields):]:
                self.infer(a, scope)
            return self.note(e, RecordTy(e.type_name), ast.NamedType(e.type_name))
        if isinstance(e, ast.FieldAccess):
            t = self.infer(e.expr, scope)
            if isinstance(t, UnknownTy):
                return self.note(e, UNKNOWN)
            rec = env.record(t.name) if isinstance(t, RecordTy) else None
            ftype = rec.field_type(e.field) if rec is not None else None
            if ftype is None:
                self.error(e.span, f"type {t} has no field {e.field!r}")
                return self.note(e, UNKNOWN)
            return self.note(e, env.resolve(ftype), ftype)
        if isinstance(e, ast.Unary):
            t = self.infer(e.operand, scope)
            if e.op == "not":
                if not assignable(t, BOOL):
                    self.error(e.span, f"'not' needs bool, found {t}")
                return self.note(e, BOOL, ast.BoolType())
            if e.op == "-":
                if not is_numeric(t):
                    self.error(e.span, f"unary '-' needs a number, found {t}")
                    return self.note(e, UNKNOWN)
                return self.note(e, t)
            if not isinstance(t, (SetTy, UnknownTy)):
                self.error(e.span, f"'card' needs a set, found {t}")
            return self.note(e, INT, ast.IntType())
        if isinstance(e, ast.Binary):
            return self.note(e, *self.binary(e, scope))
        if isinstance(e, ast.Apply):
            sig = env.signature(e.name)
            if sig is None:
                self.error(e.span, f"unknown function {e.name!r}")
                for a in e.args:
                    self.infer(a, scope)
                return self.note(e, UNKNOWN)
            if len(e.args) != len(sig.params):
                self.error(e.span, f"{e.name} takes {len(sig.params)} argument(s), "
                                   f"given {len(e.args)}")
            for a, (pname, ptype) in zip(e.args, sig.params):
                self.expect(a, scope, env.resolve(ptype), f"argument {pname!r} of {e.name}")
            for a in e.args[len(sig.params):]:
                self.infer(a, scope)
            return self.note(e, env.resolve(sig.result), sig.result)
        if isinstance(e, ast.Quantifier):
            inner = dict(scope)
            for name, typ in e.binders:
                self.check_type(typ)
                inner[name] = typ
            self.expect(e.body, inner, BOOL, f"body of {e.kind}")
            return self.note(e, BOOL, ast.BoolType())
        if isinstance(e, ast.IfThenElse):
            self.expect(e.cond, scope, BOOL, "if condition")
            a = self.infer(e.then, scope)
            b = self.infer(e.else_, scope)
            if not compatible(a, b):
                self.error(e.span, f"if branches differ: {a} vs {b}")
            return self.note(e, join(a, b))
        raise TypeError(f"not an expression: {e!r}")

    def binary(self, e: ast.Binary, scope) -> tuple[Ty, Optional[ast.TypeExpr]]:
        op = e.op
        a = self.infer(e.left, scope)
        b = self.infer(e.right, scope)
        if op in ("and", "or", "=>", "<=>"):
            for side, t in ((e.left, a), (e.right, b)):
                if not assignable(t, BOOL):
                    self.error(side.span, f"'{op}' needs bool operands, found {t}")
            return BOOL, ast.BoolType()
        if op in ("+", "-", "*", "/"):
            if not (is_numeric(a) and is_numeric(b)):
                self.error(e.span, f"'{op}' needs numbers, found {a} and {b}")
                return UNKNOWN, None
            if op == "/":
                return REAL, ast.RealType()
            return (INT, ast.IntType()) if (a, b) == (INT, INT) else (REAL, ast.RealType())
        if op in ("div", "mod"):
            for t in (a, b):
                if not isinstance(t, (IntTy, UnknownTy)):
                    self.error(e.span, f"'{op}' needs int operands, found {a} and {b}")
                    break
            return INT, ast.IntType()
        if op in ("<", "<=", ">", ">="):
            if not (is_numeric(a) and is_numeric(b)):
                self.error(e.span, f"'{op}' needs numbers, found {a} and {b}")
            return BOOL, ast.BoolType()
        if op in ("=", "<>"):
            if not compatible(a, b):
                self.error(e.span, f"cannot compare {a} with {b}")
            return BOOL, ast.BoolType()
        if op in ("in set", "not in set"):
            if isinstance(b, UnknownTy):
                return BOOL, ast.BoolType()
            if not isinstance(b, SetTy):
                self.error(e.right.span, f"'{op}' needs a set on the right, found {b}")
            elif b.elem is not None and not compatible(a, b.elem):
                self.error(e.span, f"element of type {a} cannot be in {b}")
            return BOOL, ast.BoolType()
        # union, inter, set difference
        if isinstance(a, UnknownTy) or isinstance(b, UnknownTy):
            return join(a, b), None
        if not (isinstance(a, SetTy) and isinstance(b, SetTy)):
            self.error(e.span, f"'{op}' needs sets, found {a} and {b}")
            return UNKNOWN, None
        if not compatible(a, b):
            self.error(e.span, f"'{op}' on incompatible sets {a} and {b}")
        return join(a, b), None

    def check_type(self, t: ast.TypeExpr):
        if isinstance(t, ast.SetType):
            self.check_type(t.elem)
        elif isinstance(t, ast.NamedType) and t.name not in self.env.types:
            self.error(t.span, f"unknown type {t.name!r}")


def _type_refs(t: ast.TypeExpr):
    if isinstance(t, ast.NamedType):
        yield t.name
    elif isinstance(t, ast.SetType):
        yield from _type_refs(t.elem)


def _body_refs(td: ast.TypeDef):
    if isinstance(td.body, ast.Synonym):
        yield from _type_refs(td.body.type)
    elif isinstance(td.body, ast.Record):
        for _, ft in td.body.fields:
            yield from _type_refs(ft)


def _duplicates(items, kind, errors):
    seen = set()
    for name, span in items:
        if name in seen:
            errors.append(TypeCheckError(f"duplicate {kind} {name!r}", span))
        seen.add(name)


def check_model(m: ast.ModelAst) -> CheckedModel:
    """Type-check ``m``. Raises :class:`ModelErrors` listing every problem found."""
    env = TypeEnv(m)
    cm = CheckedModel(m, env)
    errors: list[TypeCheckError] = []

    def record(e, ty, decl):
        cm._types[id(e)] = (ty, decl)
        cm._nodes.append(e)

    chk = ExprChecker(env, errors, record)

    _duplicates([(td.name, td.span) for td in m.type_defs], "type", errors)
    _duplicates([(vd.name, vd.span) for vd in m.value_defs], "value", errors)
    _duplicates([(fd.name, fd.span) for fd in m.function_defs], "function", errors)
    _duplicates([(pd.name, pd.span) for pd in m.process_defs], "process", errors)

    # types
    for td in m.type_defs:
        if isinstance(td.body, ast.QuoteUnion):
            _duplicates([(q, td.span) for q in td.body.literals], f"quote literal in {td.name}",
                        errors)
        elif isinstance(td.body, ast.Record):
            _duplicates([(f, td.span) for f, _ in td.body.fields], f"field in {td.name}", errors)
            for _, ft in td.body.fields:
                chk.check_type(ft)
        else:
            chk.check_type(td.body.type)
    for td in m.type_defs:
        # cycle detection over type references
        stack, seen = list(_body_refs(td)), set()
        while stack:
            name = stack.pop()
            if name == td.name:
                errors.append(TypeCheckError(f"type {td.name!r} is defined in terms of itself",
                                             td.span))
                break
            if name in seen or name not in env.types:
                continue
            seen.add(name)
            stack.extend(_body_refs(env.types[name]))
    for td in m.type_defs:
        if td.invariant is not None:
            chk.expect(td.invariant.expr, {td.invariant.binder: ast.NamedType(td.name)}, BOOL,
                       f"invariant of {td.name}")

    # values
    for vd in m.value_defs:
        if vd.type is not None:
            chk.check_type(vd.type)
            chk.expect(vd.expr, {}, env.resolve(vd.type), f"value {vd.name}")
        else:
            env.value_types[vd.name] = chk.infer(vd.expr, {})

    # functions
    for fd in m.function_defs:
        for t in (*fd.param_types, fd.return_type):
            chk.check_type(t)
        _duplicates([(p, fd.span) for p in fd.params], f"parameter of {fd.name}", errors)
        scope = dict(fd.typed_params)
        chk.expect(fd.body, scope, env.resolve(fd.return_type), f"result of {fd.name}")
        if fd.pre is not None:
            chk.expect(fd.pre, scope, BOOL, f"pre-condition of {fd.name}")
        if fd.post is not None:
            chk.expect(fd.post, {**scope, "RESULT": fd.return_type}, BOOL,
                       f"post-condition of {fd.name}")

    # processes
    for pd in m.process_defs:
        _duplicates([(n, pd.span) for n, _ in pd.state_vars], f"state variable of {pd.name}",
                    errors)
        _duplicates([(op.name, op.span) for op in pd.operations], f"operation of {pd.name}",
                    errors)
        state = dict(pd.state_vars)
        for _, t in pd.state_vars:
            chk.check_type(t)
        for op in pd.operations:
            for _, t in op.params:
                chk.check_type(t)
            _duplicates([(p, op.span) for p, _ in op.params], f"parameter of {op.name}", errors)
            scope = {**state, **dict(op.params)}
            _check_stmt(chk, op.body, scope, state, set(dict(op.params)))
            if op.pre is not None:
                chk.expect(op.pre, scope, BOOL, f"pre-condition of {op.name}")
            if op.post is not None:
                chk.expect(op.post, scope, BOOL, f"post-condition of {op.name}")

    if errors:
        errors.sort(key=lambda err: (err.span.start_line, err.span.start_col)
                    if err.span is not None else (0, 0))
        raise ModelErrors(errors)
    return cm


def _check_stmt(chk: ExprChecker, s: ast.Stmt, scope, state, params):
    if isinstance(s, ast.Assign):
        if s.target not in state or s.target in params:
            chk.error(s.span, f"assignment target {s.target!r} is not a state variable")
            chk.infer(s.expr, scope)
            return
        chk.expect(s.expr, scope, chk.env.resolve(state[s.target]),
                   f"assignment to {s.target}")
    elif isinstance(s, ast.Seq):
        _check_stmt(chk, s.first, scope, state, params)
        _check_stmt(chk, s.second, scope, state, params)
    elif isinstance(s, ast.IfStmt):
        chk.expect(s.cond, scope, BOOL, "if condition")
        _check_stmt(chk, s.then, scope, state, params)
        if s.else_ is not None:
            _check_stmt(chk, s.else_, scope, state, params)


def infer_type(env: TypeEnv, e: ast.Expr, scope: dict) -> Ty:
    """Type of an arbitrary expression (e.g. one built by the generator)."""
    errors: list = []
    ty = ExprChecker(env, errors).infer(e, scope)
    if errors:
        raise ModelErrors(errors)
    return ty

