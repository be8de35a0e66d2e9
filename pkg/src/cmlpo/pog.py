"""Proof obligation generation.

A single traversal visits every definition in source order (types, values,
functions, processes) and, within one definition, its components in textual
order. Each construct emits its own obligations after those of its
sub-expressions. Obligations carry their binders, hypotheses and conclusion
separately; the displayed predicate is ``forall binders & (hyps => concl)``.

Operation bodies are executed symbolically: expressions inside a statement are
read through the current store, so every obligation talks about pre-state
values only.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Optional

from .errors import SymbolicExecutionUnsupported
from .syntax import ast
from .syntax.printer import pretty_print
from .terms import all_names, free_vars, fresh_name, substitute
from .typecheck import CheckedModel


class POKind(enum.Enum):
    PARTIAL_OPERATOR = "partial_operator"
    FUNCTION_PRE = "function_pre"
    SUBTYPE_INVARIANT = "subtype_invariant"
    POST_CONDITION = "post_condition"
    # reserved: implicit definitions are outside the language subset
    IMPLICIT_SATISFIABILITY = "implicit_satisfiability"


@dataclass(frozen=True)
class ProofObligation:
    id: str
    kind: POKind
    origin: Optional[ast.SourceSpan]
    definition: str
    binders: tuple[tuple[str, ast.TypeExpr], ...]
    hypotheses: tuple[ast.Expr, ...]
    conclusion: ast.Expr

    def body(self) -> ast.Expr:
        if not self.hypotheses:
            return self.conclusion
        return ast.Binary("=>", ast.conj(self.hypotheses), self.conclusion)

    def predicate(self) -> ast.Expr:
        if not self.binders:
            return self.body()
        return ast.Quantifier("forall", self.binders, self.body())

    def display(self) -> str:
        return pretty_print(self.predicate())

    def to_json(self) -> dict:
        span = self.origin
        return {
            "id": self.id,
            "kind": self.kind.value,
            "origin": {
                "file": span.file if span else None,
                "line": span.start_line if span else None,
                "col": span.start_col if span else None,
                "def": self.definition,
            },
            "predicate": self.display(),
            "status": "open",
        }


@dataclass
class _Ctx:
    definition: str
    params: tuple = ()
    optional: tuple = ()       # bound only when they occur (state vars, RESULT)
    qbinders: tuple = ()       # from enclosing quantifiers
    hyps: tuple = ()           # already in final form
    store: dict = field(default_factory=dict)

    def with_hyp(self, h: ast.Expr) -> "_Ctx":
        return dataclasses.replace(self, hyps=self.hyps + (substitute(h, self.store),))


def _negate(e: ast.Expr) -> ast.Expr:
    return ast.Unary("not", e)


class Generator:
    """Walks a checked model; subclasses may override the ``site`` hooks."""

    def __init__(self, model: CheckedModel):
        self.model = model
        self.env = model.env
        self.pos: list[ProofObligation] = []
        self._seen: set = set()
        self.global_names = set(self.env.values) | set(self.env.functions)

    # ------------------------------------------------------------ emit

    def emit(self, kind: POKind, span, conclusion: ast.Expr, ctx: _Ctx):
        concl = substitute(conclusion, ctx.store)
        hyps = ctx.hyps
        occurring = set()
        for e in (*hyps, concl):
            occurring |= free_vars(e)
        binders = list(ctx.params)
        binders += [(n, t) for n, t in ctx.optional if n in occurring]
        binders += list(ctx.qbinders)
        # one PO per partial-operator and call site; identical subtype POs
        # (the same value flowing into several constrained positions) merge
        if kind is POKind.SUBTYPE_INVARIANT:
            key = (ctx.definition, tuple(binders), hyps, concl)
            if key in self._seen:
                return
            self._seen.add(key)
        self.pos.append(ProofObligation("", kind, span, ctx.definition, tuple(binders),
                                        hyps, concl))

    # ----------------------------------------------------------- sites

    def partial_operator(self, e: ast.Binary, ctx: _Ctx):
        self.emit(POKind.PARTIAL_OPERATOR, e.span, ast.Binary("<>", e.right, ast.IntLit(0)), ctx)

    def precondition(self, e: ast.Apply, ctx: _Ctx):
        fd = self.env.functions.get(e.name)
        if fd is not None and fd.pre is not None:
            self.emit(POKind.FUNCTION_PRE, e.span, ast.Apply(f"pre_{e.name}", e.args), ctx)

    def invariant_parts(self, e: ast.Expr, expected: Optional[ast.TypeExpr]) -> list:
        if expected is None:
            return []
        chain = self.env.invariant_chain(expected)
        if not chain or self.env.is_named_subtype(self.model.declared_type(e), expected):
            return []
        return [ast.Apply(f"inv_{link.type_name}", (e,)) for link in chain]

    def subtype(self, e: ast.Expr, expected: Optional[ast.TypeExpr], ctx: _Ctx):
        parts = self.invariant_parts(e, expected)
        if parts:
            self.emit(POKind.SUBTYPE_INVARIANT, e.span, ast.conj(parts, left=True), ctx)

    def record_construction(self, e: ast.RecordCtor, ctx: _Ctx):
        rec = self.env.record(e.type_name)
        parts = [ast.Apply(f"inv_{link.type_name}", (e,))
                 for link in self.env.invariant_chain(ast.NamedType(e.type_name))]
        for arg, (_, ftype) in zip(e.args, rec.fields):
            parts += self.invariant_parts(arg, ftype)
        if parts:
            self.emit(POKind.SUBTYPE_INVARIANT, e.span, ast.conj(parts, left=True), ctx)

    # ---------------------------------------------------------- visitor

    def visit(self, e: ast.Expr, ctx: _Ctx):
        if isinstance(e, ast.Binary):
            if e.op in ("and", "=>"):
                self.visit(e.left, ctx)
                self.visit(e.right, ctx.with_hyp(e.left))
                return
            if e.op == "or":
                self.visit(e.left, ctx)
                self.visit(e.right, ctx.with_hyp(_negate(e.left)))
                return
            self.visit(e.left, ctx)
            self.visit(e.right, ctx)
            if e.op in ast.PARTIAL_OPS:
                self.partial_operator(e, ctx)
            return
        if isinstance(e, ast.IfThenElse):
            self.visit(e.cond, ctx)
            self.visit(e.then, ctx.with_hyp(e.cond))
            self.visit(e.else_, ctx.with_hyp(_negate(e.cond)))
            return
        if isinstance(e, ast.Quantifier):
            self.visit(e.body, self.enter_quantifier(e, ctx))
            return
        if isinstance(e, ast.Apply):
            sig = self.env.signature(e.name)
            generated = e.name not in self.env.functions
            for i, arg in enumerate(e.args):
                self.visit(arg, ctx)
                if sig is not None and not generated and i < len(sig.params):
                    self.subtype(arg, sig.params[i][1], ctx)
            self.precondition(e, ctx)
            return
        if isinstance(e, ast.RecordCtor):
            rec = self.env.record(e.type_name)
            for arg, (_, ftype) in zip(e.args, rec.fields):
                self.visit(arg, ctx)
                self.subtype(arg, ftype, ctx)
            self.record_construction(e, ctx)
            return
        for c in ast.children(e):
            self.visit(c, ctx)

    def enter_quantifier(self, e: ast.Quantifier, ctx: _Ctx) -> _Ctx:
        store = {k: v for k, v in ctx.store.items() if k not in {n for n, _ in e.binders}}
        in_use = set(self.global_names)
        in_use |= {n for n, _ in (*ctx.params, *ctx.optional, *ctx.qbinders)}
        for v in store.values():
            in_use |= free_vars(v)
        qbinders = list(ctx.qbinders)
        for name, typ in e.binders:
            new = fresh_name(name, in_use)
            in_use.add(new)
            if new != name:
                store[name] = ast.VarRef(new)
            qbinders.append((new, typ))
        return dataclasses.replace(ctx, qbinders=tuple(qbinders), store=store)

    # ------------------------------------------------------ definitions

    def run(self) -> list[ProofObligation]:
        m = self.model.ast
        for td in m.type_defs:
            if td.invariant is not None:
                ctx = _Ctx(td.name, params=((td.invariant.binder, ast.NamedType(td.name)),))
                self.visit(td.invariant.expr, ctx)
        for vd in m.value_defs:
            ctx = _Ctx(vd.name)
            self.visit(vd.expr, ctx)
            self.subtype(vd.expr, vd.type, ctx)
        for fd in m.function_defs:
            self.function(fd)
        for pd in m.process_defs:
            for op in pd.operations:
                self.operation(pd, op)
        return [dataclasses.replace(po, id=f"PO{i}") for i, po in enumerate(self.pos, 1)]

    def function(self, fd: ast.FunctionDef):
        pre = (fd.pre,) if fd.pre is not None else ()
        ctx = _Ctx(fd.name, params=fd.typed_params, hyps=pre)
        self.visit(fd.body, ctx)
        self.subtype(fd.body, fd.return_type, ctx)
        if fd.pre is not None:
            self.visit(fd.pre, _Ctx(fd.name, params=fd.typed_params))
        if fd.post is not None:
            self.visit(fd.post, dataclasses.replace(ctx, optional=(("RESULT", fd.return_type),)))
            concl = substitute(fd.post, {"RESULT": fd.body})
            self.emit(POKind.POST_CONDITION, fd.post.span, concl,
                      _Ctx(fd.name, params=fd.typed_params, hyps=pre))

    def operation(self, pd: ast.ProcessDef, op: ast.OperationDef):
        name = f"{pd.name}.{op.name}"
        pre = (op.pre,) if op.pre is not None else ()
        base = _Ctx(name, params=op.params, optional=pd.state_vars, hyps=pre)
        paths = self.execute(op.body, base, {}, ())
        if op.pre is not None:
            self.visit(op.pre, _Ctx(name, params=op.params, optional=pd.state_vars))
        if op.post is None:
            return
        self.visit(op.post, _Ctx(name, params=op.params, optional=pd.state_vars))
        self.postcondition(pd, op, name, paths)

    def execute(self, s: ast.Stmt, base: _Ctx, store: dict, path: tuple) -> list:
        """Symbolically run ``s``; returns the final ``(store, path)`` of each branch."""
        ctx = dataclasses.replace(base, hyps=base.hyps + path, store=store)
        if isinstance(s, ast.Assign):
            self.visit(s.expr, ctx)
            self.subtype(s.expr, dict(base.optional)[s.target], ctx)
            return [({**store, s.target: substitute(s.expr, store)}, path)]
        if isinstance(s, ast.Seq):
            out = []
            for st, pa in self.execute(s.first, base, store, path):
                out += self.execute(s.second, base, st, pa)
            return out
        if isinstance(s, ast.IfStmt):
            self.visit(s.cond, ctx)
            cond = substitute(s.cond, store)
            out = self.execute(s.then, base, store, path + (cond,))
            if s.else_ is not None:
                out += self.execute(s.else_, base, store, path + (_negate(cond),))
            else:
                out.append((store, path + (_negate(cond),)))
            return out
        raise SymbolicExecutionUnsupported(f"cannot execute {type(s).__name__}",
                                           getattr(s, "span", None))

    def postcondition(self, pd: ast.ProcessDef, op: ast.OperationDef, name: str, paths):
        avoid = set(self.global_names) | {n for n, _ in pd.state_vars} | {n for n, _ in op.params}
        for e in (op.post, op.pre or ast.TRUE):
            avoid |= all_names(e)
        for store, _ in paths:
            for v in store.values():
                avoid |= all_names(v)
        for store, path in paths:
            assigned = [(v, t) for v, t in pd.state_vars if v in store]
            olds, rename = [], {}
            taken = set(avoid)
            for v, t in assigned:
                old = fresh_name(f"{v}_old", taken)
                taken.add(old)
                olds.append((old, t))
                rename[v] = ast.VarRef(old)
            hyps = [substitute(h, rename) for h in ((op.pre,) if op.pre is not None else ())]
            hyps += [substitute(c, rename) for c in path]
            hyps += [ast.Binary("=", ast.VarRef(v), substitute(store[v], rename))
                     for v, _ in assigned]
            ctx = _Ctx(name, params=op.params, optional=tuple(olds) + pd.state_vars,
                       hyps=tuple(hyps))
            self.emit(POKind.POST_CONDITION, op.post.span, op.post, ctx)


def generate(m: CheckedModel) -> list[ProofObligation]:
    """All obligations of ``m`` in model order, numbered PO1, PO2, ..."""
    return Generator(m).run()


def _of_kind(m: CheckedModel, kind: POKind) -> list[ProofObligation]:
    return [po for po in generate(m) if po.kind is kind]


def gen_partial_operators(m: CheckedModel) -> list[ProofObligation]:
    return _of_kind(m, POKind.PARTIAL_OPERATOR)


def gen_precondition_obligations(m: CheckedModel) -> list[ProofObligation]:
    return _of_kind(m, POKind.FUNCTION_PRE)


def gen_subtype_obligations(m: CheckedModel) -> list[ProofObligation]:
    return _of_kind(m, POKind.SUBTYPE_INVARIANT)


def gen_postcondition_obligations(m: CheckedModel) -> list[ProofObligation]:
    return _of_kind(m, POKind.POST_CONDITION)


def auxiliary_definitions(pos, m: CheckedModel) -> list[tuple[str, tuple[str, ...], ast.Expr]]:
    """The ``pre_f`` / ``inv_T`` definitions mentioned by ``pos``, sorted by name."""
    names = set()
    for po in pos:
        for n in ast.walk(po.predicate()):
            if isinstance(n, ast.Apply) and m.env.expansion(n.name) is not None:
                names.add(n.name)
    out = []
    for name in sorted(names):
        params, body = m.env.expansion(name)
        out.append((name, params, body))
    return out


def to_json(pos) -> list[dict]:
    return [po.to_json() for po in pos]
