"""SMT-LIB 2 emission for proof obligations.

Encoding:

* quote unions become datatypes with one nullary constructor per literal,
  named ``Union.Lit``;
* records become datatypes with constructor ``mk_T`` and selectors ``T.field``;
* ``set of E`` for a finite ``E`` with k carrier values becomes a datatype of k
  Booleans (the characteristic tuple), so set equality is structural;
* ``div`` and ``mod`` follow the evaluator (truncating division, floor modulus),
  while ``/`` maps to total SMT division because divisors are covered by their
  own obligations.

The goal is the negated obligation, so ``unsat`` means discharged.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction
from typing import Optional

from ..errors import UnsupportedForSmt
from ..evaluate import QuoteV, RecordV, enumerate_type
from ..pog import ProofObligation
from ..syntax import ast
from ..syntax.printer import pretty_print, print_type
from ..typecheck import CheckedModel

MAX_SET_CARRIER = 64

RESERVED = frozenset({
    "and", "or", "not", "=>", "=", "distinct", "ite", "let", "forall", "exists", "match",
    "par", "as", "!", "_", "true", "false", "div", "mod", "abs", "to_real", "to_int",
    "is_int", "Int", "Real", "Bool", "Array", "select", "store", "assert", "check-sat",
    "declare-fun", "define-fun", "declare-const", "declare-datatypes", "set-logic",
    "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING",
})

INT, REAL, BOOL = ast.IntType(), ast.RealType(), ast.BoolType()


def _and(parts) -> str:
    parts = [p for p in parts if p != "true"]
    if "false" in parts:
        return "false"
    if not parts:
        return "true"
    return parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"


def _or(parts) -> str:
    parts = [p for p in parts if p != "false"]
    if "true" in parts:
        return "true"
    if not parts:
        return "false"
    return parts[0] if len(parts) == 1 else f"(or {' '.join(parts)})"


_SIMPLE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")


def sym(name: str) -> str:
    """An SMT-LIB symbol for a model name.

    Quoting does not help for reserved words (``|ite|`` is ``ite``), so those
    get a ``!`` suffix, which no model identifier can contain.
    """
    if name in RESERVED:
        return name + "!"
    return name if _SIMPLE.match(name) else f"|{name}|"


class _NeedsContext(Exception):
    """The expression's sort cannot be decided without an expected sort."""


def _int_text(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _real_text(q: Fraction) -> str:
    q = Fraction(q)
    sign = q < 0
    q = abs(q)
    text = f"{q.numerator}.0" if q.denominator == 1 else f"(/ {q.numerator}.0 {q.denominator}.0)"
    return f"(- {text})" if sign else text


class Emitter:
    def __init__(self, model: CheckedModel):
        self.model = model
        self.env = model.env
        self.decls: list[str] = []
        self._sorts: dict = {}
        self._defined: dict[str, ast.TypeExpr] = {}
        self._defining: set[str] = set()
        self._constants: set[str] = set()  # nullary quote constructors

    # sorts

    def canon(self, t: ast.TypeExpr) -> ast.TypeExpr:
        t = self.env.unfold(t)
        if isinstance(t, ast.SetType):
            return ast.SetType(self.canon(t.elem))
        if isinstance(t, ast.NamedType):
            return ast.NamedType(t.name)
        return type(t)()

    def sort(self, t: ast.TypeExpr) -> str:
        t = self.canon(t)
        if isinstance(t, ast.IntType):
            return "Int"
        if isinstance(t, ast.RealType):
            return "Real"
        if isinstance(t, ast.BoolType):
            return "Bool"
        if t in self._sorts:
            return self._sorts[t]
        if isinstance(t, ast.SetType):
            k = self.env.finite_domain(t.elem)
            if k is None or k > MAX_SET_CARRIER:
                raise UnsupportedForSmt(
                    f"set of {print_type(t.elem)} has no small finite carrier")
            elem_sort = self.sort(t.elem)
            name = "Set_" + elem_sort.strip("|")
            self._sorts[t] = name
            fields = " ".join(f"({sel} Bool)" for sel in self.selectors(t))
            self.decls.append(f"(declare-datatypes (({name} 0)) ((({name}.mk {fields}))))")
            return name
        td = self.env.types[t.name]
        name = sym(td.name)
        if isinstance(td.body, ast.QuoteUnion):
            self._sorts[t] = name
            self._constants.update(sym(td.name + '.' + q) for q in td.body.literals)
            ctors = " ".join(f"({sym(td.name + '.' + q)})" for q in td.body.literals)
            self.decls.append(f"(declare-datatypes (({name} 0)) (({ctors})))")
            return name
        field_sorts = [self.sort(ft) for _, ft in td.body.fields]
        self._sorts[t] = name
        fields = " ".join(f"({sym(td.name + '.' + f)} {s})"
                          for (f, _), s in zip(td.body.fields, field_sorts))
        self.decls.append(f"(declare-datatypes (({name} 0)) ((({sym('mk_' + td.name)} {fields}))))")
        return name

    def carrier(self, set_type: ast.SetType) -> list:
        return list(enumerate_type(set_type.elem, self.env))

    def selectors(self, set_type: ast.SetType) -> list[str]:
        name = "Set_" + self.sort(set_type.elem).strip("|")
        out = []
        for i, v in enumerate(self.carrier(set_type)):
            suffix = v.name if isinstance(v, QuoteV) else str(i)
            out.append(sym(f"{name}.{suffix}"))
        return out

    def value(self, v, t: ast.TypeExpr) -> str:
        t = self.canon(t)
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(t, ast.RealType):
            return _real_text(v)
        if isinstance(v, int):
            return _int_text(v)
        if isinstance(v, QuoteV):
            return sym(f"{t.name}.{v.name}")
        if isinstance(v, frozenset):
            self.sort(t)
            bits = " ".join("true" if x in v else "false" for x in self.carrier(t))
            return f"({self.sort(t)}.mk {bits})"
        if isinstance(v, RecordV):
            rec = self.env.record(v.type_name)
            args = " ".join(self.value(x, ft) for x, (_, ft) in zip(v.values, rec.fields))
            return f"({sym('mk_' + v.type_name)} {args})"
        raise UnsupportedForSmt(f"cannot encode value {v!r}")

    # definitions

    def reference(self, name: str) -> ast.TypeExpr:
        """Emit the definition of global value ``name`` if needed; returns its sort type."""
        if name in self._defined:
            return self._defined[name]
        if name in self._defining:
            raise UnsupportedForSmt(f"value {name} depends on itself")
        vd = self.env.values[name]
        self._defining.add(name)
        try:
            want = self.canon(vd.type) if vd.type is not None else None
            text, t = self.term(vd.expr, {}, want)
        finally:
            self._defining.discard(name)
        self._defined[name] = t
        self.decls.append(f"(define-fun {sym(name)} () {self.sort(t)} {text})")
        return t

    def callee(self, name: str) -> tuple[list, ast.TypeExpr]:
        sig = self.env.signature(name)
        if sig is None:
            raise UnsupportedForSmt(f"unknown function {name}")
        params = [(p, self.canon(t)) for p, t in sig.params]
        result = self.canon(sig.result)
        if name in self._defined or name in self._defining:
            return params, result
        fd = self.env.functions.get(name)
        if fd is not None:
            pnames, body = fd.params, fd.body
        else:
            pnames, body = self.env.expansion(name)
        recursive = name in self._calls(body, set())
        if recursive and not self._calls_only_self(name, body):
            raise UnsupportedForSmt(f"mutual recursion through {name}")
        self._defining.add(name)
        try:
            scope = {p: t for p, (_, t) in zip(pnames, params)}
            text, _ = self.term(body, scope, result)
        finally:
            self._defining.discard(name)
        self._defined[name] = result
        plist = " ".join(f"({sym(p)} {self.sort(t)})" for p, (_, t) in zip(pnames, params))
        head = "define-fun-rec" if recursive else "define-fun"
        self.decls.append(f"({head} {sym(name)} ({plist}) {self.sort(result)} {text})")
        return params, result

    def _body_of(self, name):
        fd = self.env.functions.get(name)
        if fd is not None:
            return fd.body
        exp = self.env.expansion(name)
        return exp[1] if exp else None

    def _calls(self, e, seen) -> set:
        out = set()
        for n in ast.walk(e):
            if isinstance(n, ast.Apply) and n.name not in seen:
                seen.add(n.name)
                out.add(n.name)
                body = self._body_of(n.name)
                if body is not None:
                    out |= self._calls(body, seen)
        return out

    def _calls_only_self(self, name, body) -> bool:
        for n in ast.walk(body):
            if isinstance(n, ast.Apply) and n.name != name:
                inner = self._body_of(n.name)
                if inner is not None and name in self._calls(inner, set()):
                    return False
        return True

    # terms

    def quote_literals(self, t) -> Optional[tuple]:
        if isinstance(t, ast.NamedType):
            td = self.env.types.get(t.name)
            if td is not None and isinstance(td.body, ast.QuoteUnion):
                return td.body.literals
        return None

    def eq(self, a: str, sa, b: str, sb) -> str:
        """Equality of two encoded terms whose sorts may be different quote encodings."""
        if sa == sb:
            if a == b:
                return "true"
            if a in self._constants and b in self._constants:
                return "false"
            return f"(= {a} {b})"
        numeric = (ast.IntType, ast.RealType)
        if isinstance(sa, numeric) and isinstance(sb, numeric):
            return f"(= {self.coerce(a, sa, REAL)} {self.coerce(b, sb, REAL)})"
        la, lb = self.quote_literals(sa), self.quote_literals(sb)
        if la is not None and lb is not None:
            return _or([_and([self.eq(a, sa, sym(f"{sa.name}.{q}"), sa),
                              self.eq(b, sb, sym(f"{sb.name}.{q}"), sb)])
                        for q in la if q in lb])
        if isinstance(sa, ast.SetType) and isinstance(sb, ast.SetType):
            ea, eb = self.quote_literals(sa.elem), self.quote_literals(sb.elem)
            if ea is not None and eb is not None:
                sel_a = dict(zip(ea, self.selectors(sa)))
                sel_b = dict(zip(eb, self.selectors(sb)))
                parts = []
                for q in dict.fromkeys(ea + eb):
                    ina = f"({sel_a[q]} {a})" if q in sel_a else "false"
                    inb = f"({sel_b[q]} {b})" if q in sel_b else "false"
                    if ina == "false" or inb == "false":
                        other = inb if ina == "false" else ina
                        if other != "false":
                            parts.append(f"(not {other})")
                    else:
                        parts.append(f"(= {ina} {inb})")
                return _and(parts)
        raise UnsupportedForSmt(f"cannot compare {print_type(sa)} with {print_type(sb)}")

    def coerce(self, text: str, have: ast.TypeExpr, want: Optional[ast.TypeExpr]) -> str:
        if isinstance(want, ast.RealType) and isinstance(have, ast.IntType):
            return f"(to_real {text})"
        return text

    def term(self, e: ast.Expr, scope: dict, want: Optional[ast.TypeExpr] = None):
        text, t = self._term(e, scope, want)
        return self.coerce(text, t, want), (want if isinstance(want, ast.RealType)
                                             and isinstance(t, ast.IntType) else t)

    def _default_sorts(self):
        unions = [ast.NamedType(td.name) for td in self.env.types.values()
                  if isinstance(td.body, ast.QuoteUnion)]
        return [ast.SetType(BOOL), *unions, *(ast.SetType(u) for u in unions)]

    def loose(self, e, scope, want=None):
        """Like ``term``, but pick a sort when nothing around ``e`` fixes one.

        Only empty set literals and quotes shared by several unions lack a
        sort; the choice does not change the meaning of the formula, because
        the empty set has no members at any sort and quote equality is
        decided by name.
        """
        try:
            return self.term(e, scope, want)
        except _NeedsContext:
            pass
        for guess in self._default_sorts():
            try:
                return self.term(e, scope, guess)
            except (_NeedsContext, UnsupportedForSmt):
                continue
        raise _NeedsContext(e)

    def root_pair(self, a, b, scope):
        """``pair`` for operands whose sort no enclosing term constrains."""
        try:
            return self.pair(a, b, scope)
        except _NeedsContext:
            ta, sa = self.loose(a, scope)
            tb, sb = self.term(b, scope, sa)
            return ta, sa, tb, sb

    def top(self, e, scope, want=None):
        try:
            return self.loose(e, scope, want)
        except _NeedsContext:
            raise UnsupportedForSmt(f"cannot determine the sort of {pretty_print(e)}") from None

    def pair(self, a, b, scope, want=None):
        """Translate two operands that must share a sort."""
        try:
            ta, sa = self.term(a, scope, want)
        except _NeedsContext:
            tb, sb = self.term(b, scope, want)
            ta, sa = self.term(a, scope, sb)
            return ta, sa, tb, sb
        tb, sb = self.term(b, scope, sa)
        if isinstance(sb, ast.RealType) and isinstance(sa, ast.IntType):
            ta, sa = f"(to_real {ta})", sb
        return ta, sa, tb, sb

    def _term(self, e, scope, want):
        if isinstance(e, ast.BoolLit):
            return ("true" if e.value else "false"), BOOL
        if isinstance(e, ast.IntLit):
            return _int_text(e.value), INT
        if isinstance(e, ast.RealLit):
            return _real_text(e.value), REAL
        if isinstance(e, ast.QuoteLit):
            if isinstance(want, ast.NamedType):
                td = self.env.types.get(want.name)
                if td is not None and isinstance(td.body, ast.QuoteUnion) \
                        and e.name in td.body.literals:
                    self.sort(want)
                    return sym(f"{want.name}.{e.name}"), want
            owners = self.env.quote_owners.get(e.name, [])
            if len(owners) != 1:
                raise _NeedsContext(e)
            t = ast.NamedType(owners[0])
            self.sort(t)
            return sym(f"{owners[0]}.{e.name}"), t
        if isinstance(e, ast.VarRef):
            if e.name in scope:
                return sym(e.name), scope[e.name]
            return sym(e.name), self.reference(e.name)
        if isinstance(e, ast.SetEnum):
            if isinstance(want, ast.SetType):
                elem_t = want.elem
            elif e.elems:
                _, elem_t = self.term(e.elems[0], scope)
            else:
                raise _NeedsContext(e)
            st = ast.SetType(elem_t)
            sort = self.sort(st)
            elems = [self.term(x, scope, elem_t) for x in e.elems]
            bits = [_or([self.eq(x, xt, self.value(v, elem_t), elem_t) for x, xt in elems])
                    for v in self.carrier(st)]
            return f"({sort}.mk {' '.join(bits)})", st
        if isinstance(e, ast.RecordCtor):
            rec = self.env.record(e.type_name)
            t = ast.NamedType(e.type_name)
            self.sort(t)
            args = [self.term(a, scope, self.canon(ft))[0] for a, (_, ft) in zip(e.args, rec.fields)]
            return f"({sym('mk_' + e.type_name)} {' '.join(args)})", t
        if isinstance(e, ast.FieldAccess):
            text, t = self.term(e.expr, scope)
            rec = self.env.record(t.name)
            return f"({sym(t.name + '.' + e.field)} {text})", self.canon(rec.field_type(e.field))
        if isinstance(e, ast.Unary):
            if e.op == "not":
                return f"(not {self.term(e.operand, scope, BOOL)[0]})", BOOL
            if e.op == "-":
                text, t = self.term(e.operand, scope, want if isinstance(want, ast.RealType) else None)
                return f"(- {text})", t
            text, t = self.loose(e.operand, scope)
            parts = [f"(ite ({s} {text}) 1 0)" for s in self.selectors(t)]
            return (f"(+ {' '.join(parts)})" if len(parts) > 1 else parts[0]), INT
        if isinstance(e, ast.Binary):
            return self.binary(e, scope, want)
        if isinstance(e, ast.Apply):
            params, result = self.callee(e.name)
            args = [self.term(a, scope, t)[0] for a, (_, t) in zip(e.args, params)]
            if not args:
                return sym(e.name), result
            return f"({sym(e.name)} {' '.join(args)})", result
        if isinstance(e, ast.Quantifier):
            inner = dict(scope)
            bl = []
            for n, t in e.binders:
                ct = self.canon(t)
                inner[n] = ct
                bl.append(f"({sym(n)} {self.sort(ct)})")
            body = self.term(e.body, inner, BOOL)[0]
            return f"({e.kind} ({' '.join(bl)}) {body})", BOOL
        if isinstance(e, ast.IfThenElse):
            cond = self.term(e.cond, scope, BOOL)[0]
            a, sa, b, sb = self.pair(e.then, e.else_, scope, want)
            return f"(ite {cond} {a} {b})", sa
        raise UnsupportedForSmt(f"cannot encode {type(e).__name__}")

    def binary(self, e: ast.Binary, scope, want):
        op = e.op
        if op in ("and", "or", "=>"):
            a = self.term(e.left, scope, BOOL)[0]
            b = self.term(e.right, scope, BOOL)[0]
            return f"({op} {a} {b})", BOOL
        if op == "<=>":
            a = self.term(e.left, scope, BOOL)[0]
            b = self.term(e.right, scope, BOOL)[0]
            return f"(= {a} {b})", BOOL
        if op in ("=", "<>"):
            a, sa, b, sb = self.root_pair(e.left, e.right, scope)
            if sa == sb and op == "<>":
                return f"(distinct {a} {b})", BOOL
            text = self.eq(a, sa, b, sb)
            return (text if op == "=" else f"(not {text})"), BOOL
        if op in ("<", "<=", ">", ">="):
            a, _, b, _ = self.root_pair(e.left, e.right, scope)
            return f"({op} {a} {b})", BOOL
        if op in ("+", "-", "*"):
            a, sa, b, _ = self.pair(e.left, e.right, scope,
                                    want if isinstance(want, ast.RealType) else None)
            return f"({op} {a} {b})", sa
        if op == "/":
            a = self.term(e.left, scope, REAL)[0]
            b = self.term(e.right, scope, REAL)[0]
            return f"(/ {a} {b})", REAL
        if op in ("div", "mod"):
            a = self.term(e.left, scope, INT)[0]
            b = self.term(e.right, scope, INT)[0]
            if op == "div":
                q = f"(div (abs {a}) (abs {b}))"
                return f"(ite (= (>= {a} 0) (>= {b} 0)) {q} (- {q}))", INT
            r = f"(mod {a} {b})"
            return f"(ite (or (= {r} 0) (> {b} 0)) {r} (+ {r} {b}))", INT
        if op in ("in set", "not in set"):
            try:
                x, xt = self.term(e.left, scope)
            except _NeedsContext:
                x = None
            if isinstance(e.right, ast.SetEnum) and x is not None:
                elems = [self.term(el, scope, xt) for el in e.right.elems]
                text = _or([self.eq(x, xt, el, et) for el, et in elems])
            else:
                if x is None:
                    s, st = self.loose(e.right, scope)
                    x, xt = self.term(e.left, scope, st.elem)
                else:
                    s, st = self.term(e.right, scope, ast.SetType(xt))
                text = self.member(x, xt, s, st)
            return (text if op == "in set" else f"(not {text})"), BOOL
        # union, inter, set difference
        a, sa, b, _ = self.pair(e.left, e.right, scope, want)
        sels = self.selectors(sa)
        if op == "union":
            bits = [f"(or ({s} {a}) ({s} {b}))" for s in sels]
        elif op == "inter":
            bits = [f"(and ({s} {a}) ({s} {b}))" for s in sels]
        else:
            bits = [f"(and ({s} {a}) (not ({s} {b})))" for s in sels]
        return f"({self.sort(sa)}.mk {' '.join(bits)})", sa

    def member(self, x: str, xt, s: str, st: ast.SetType) -> str:
        return _or([_and([self.eq(x, xt, self.value(v, st.elem), st.elem), f"({sel} {s})"])
                    for sel, v in zip(self.selectors(st), self.carrier(st))])


def emit_script(po: ProofObligation, m: CheckedModel, *, get_model: bool = False) -> str:
    """A standalone script whose ``check-sat`` is ``unsat`` exactly when ``po`` holds."""
    em = Emitter(m)
    scope = {}
    binders = []
    for n, t in po.binders:
        ct = em.canon(t)
        scope[n] = ct
        binders.append(f"({sym(n)} {em.sort(ct)})")
    if po.conclusion == ast.TRUE:
        goal = "(assert false)"
    else:
        concl = em.top(po.conclusion, scope, BOOL)[0]
        hyps = [em.top(h, scope, BOOL)[0] for h in po.hypotheses]
        body = concl
        if hyps:
            ante = hyps[0] if len(hyps) == 1 else f"(and {' '.join(hyps)})"
            body = f"(=> {ante} {concl})"
        if binders:
            body = f"(forall ({' '.join(binders)}) {body})"
        goal = f"(assert (not {body}))"
    span = po.origin
    lines = [f"; {po.id} {po.kind.value}"]
    if span is not None:
        lines.append(f"; origin {span} ({po.definition})")
    lines.append("(set-logic ALL)")
    lines += em.decls
    lines.append(goal)
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def script_name(model_path: str, po: ProofObligation) -> str:
    stem = os.path.splitext(os.path.basename(model_path))[0]
    return f"{stem}_{po.id}.smt2"
