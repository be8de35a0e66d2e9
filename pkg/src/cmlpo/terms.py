"""Free variables, capture-avoiding substitution and alpha-equivalence."""

from __future__ import annotations

import dataclasses
import itertools
from typing import Callable, Iterable, Mapping

from .syntax import ast


def map_children(e: ast.Expr, f: Callable[[ast.Expr], ast.Expr]) -> ast.Expr:
    """Rebuild ``e`` with ``f`` applied to each direct sub-expression."""
    if isinstance(e, ast.SetEnum):
        return dataclasses.replace(e, elems=tuple(f(x) for x in e.elems))
    if isinstance(e, (ast.RecordCtor, ast.Apply)):
        return dataclasses.replace(e, args=tuple(f(x) for x in e.args))
    if isinstance(e, ast.FieldAccess):
        return dataclasses.replace(e, expr=f(e.expr))
    if isinstance(e, ast.Unary):
        return dataclasses.replace(e, operand=f(e.operand))
    if isinstance(e, ast.Binary):
        return dataclasses.replace(e, left=f(e.left), right=f(e.right))
    if isinstance(e, ast.Quantifier):
        return dataclasses.replace(e, body=f(e.body))
    if isinstance(e, ast.IfThenElse):
        return dataclasses.replace(e, cond=f(e.cond), then=f(e.then), else_=f(e.else_))
    return e


def free_vars(e: ast.Expr) -> set[str]:
    out: set[str] = set()

    def go(x, bound):
        if isinstance(x, ast.VarRef):
            if x.name not in bound:
                out.add(x.name)
        elif isinstance(x, ast.Quantifier):
            go(x.body, bound | {n for n, _ in x.binders})
        else:
            for c in ast.children(x):
                go(c, bound)

    go(e, frozenset())
    return out


def all_names(e: ast.Expr) -> set[str]:
    """Every variable name occurring in ``e``, bound or free."""
    names = set()
    for n in ast.walk(e):
        if isinstance(n, ast.VarRef):
            names.add(n.name)
        elif isinstance(n, ast.Quantifier):
            names.update(b for b, _ in n.binders)
    return names


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def substitute(e: ast.Expr, mapping: Mapping[str, ast.Expr]) -> ast.Expr:
    """Replace free occurrences of the mapped names, renaming binders that would capture."""
    if not mapping:
        return e
    repl_free = set()
    for v in mapping.values():
        repl_free |= free_vars(v)
    return _subst(e, dict(mapping), repl_free)


def _subst(e, mapping, repl_free):
    if isinstance(e, ast.VarRef):
        return mapping.get(e.name, e)
    if isinstance(e, ast.Quantifier):
        inner = {k: v for k, v in mapping.items() if k not in {n for n, _ in e.binders}}
        if not inner:
            return e
        live = set()
        for k in inner:
            live |= free_vars(inner[k])
        binders = []
        renames = {}
        avoid = repl_free | all_names(e.body) | set(inner)
        for name, typ in e.binders:
            if name in live:
                new = fresh_name(name, avoid)
                avoid.add(new)
                renames[name] = ast.VarRef(new)
                binders.append((new, typ))
            else:
                binders.append((name, typ))
        body = e.body
        if renames:
            body = _subst(body, renames, {r.name for r in renames.values()})
        return dataclasses.replace(e, binders=tuple(binders),
                                   body=_subst(body, inner, repl_free))
    return map_children(e, lambda c: _subst(c, mapping, repl_free))


def alpha_equal(a: ast.Expr, b: ast.Expr) -> bool:
    """Structural equality up to consistent renaming of quantifier binders."""
    return _alpha(a, b, {}, {})


def _alpha(a, b, env_a, env_b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, ast.VarRef):
        ia, ib = env_a.get(a.name), env_b.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, ast.Quantifier):
        if a.kind != b.kind or len(a.binders) != len(b.binders):
            return False
        if any(ta != tb for (_, ta), (_, tb) in zip(a.binders, b.binders)):
            return False
        ea, eb = dict(env_a), dict(env_b)
        for (na, _), (nb, _) in zip(a.binders, b.binders):
            ea[na] = eb[nb] = object()
        return _alpha(a.body, b.body, ea, eb)
    if isinstance(a, ast.Binary):
        return a.op == b.op and _alpha(a.left, b.left, env_a, env_b) and \
            _alpha(a.right, b.right, env_a, env_b)
    if isinstance(a, ast.Unary):
        return a.op == b.op and _alpha(a.operand, b.operand, env_a, env_b)
    if isinstance(a, ast.FieldAccess):
        return a.field == b.field and _alpha(a.expr, b.expr, env_a, env_b)
    if isinstance(a, (ast.Apply, ast.RecordCtor)):
        na = a.name if isinstance(a, ast.Apply) else a.type_name
        nb = b.name if isinstance(b, ast.Apply) else b.type_name
        return na == nb and len(a.args) == len(b.args) and all(
            _alpha(x, y, env_a, env_b) for x, y in zip(a.args, b.args))
    if isinstance(a, ast.SetEnum):
        return len(a.elems) == len(b.elems) and all(
            _alpha(x, y, env_a, env_b) for x, y in zip(a.elems, b.elems))
    if isinstance(a, ast.IfThenElse):
        return all(_alpha(x, y, env_a, env_b) for x, y in
                   ((a.cond, b.cond), (a.then, b.then), (a.else_, b.else_)))
    return a == b


def conjuncts(e: ast.Expr) -> list[ast.Expr]:
    """Flatten nested ``and``."""
    if isinstance(e, ast.Binary) and e.op == "and":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def disjuncts(e: ast.Expr) -> list[ast.Expr]:
    if isinstance(e, ast.Binary) and e.op == "or":
        return disjuncts(e.left) + disjuncts(e.right)
    return [e]
