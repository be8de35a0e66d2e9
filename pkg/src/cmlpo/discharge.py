"""Automatic discharge and refutation of proof obligations.

Strategies are tried in a fixed order and the first conclusive one wins:

1. ``normalize``: inline ``pre_f``/``inv_T``, fold constants and simplify; the
   conclusion becomes ``true`` or a hypothesis becomes ``false``.
2. ``ground``: the normalized obligation mentions no binder, so evaluating it
   decides it.
3. ``entailment``: each conclusion conjunct is a hypothesis, or becomes true
   after rewriting with the hypothesis equations ``v = e``.
4. ``finite-enum``: every binder ranges over a finite carrier and the product
   is within ``enum_limit``; all assignments are evaluated.
5. bounded refutation: integer binders are searched in shells of growing
   magnitude up to ``int_bound`` looking for a counterexample.

Anything else is ``Unknown``. Refutation witnesses are confirmed by direct
evaluation before they are returned.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from math import prod
from typing import Optional, Union

from .errors import CmlError, EvalError
from .evaluate import (EvalTimeout, Evaluator, enumerate_type, format_value, sample_value,
                       value_to_expr)
from .pog import ProofObligation
from .syntax import ast
from .syntax.printer import pretty_print
from .terms import alpha_equal, conjuncts, disjuncts, free_vars, map_children, substitute
from .typecheck import CheckedModel

SAMPLE_CHECKS = 100


# ------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Discharged:
    method: str  # normalize | ground | entailment | finite-enum | smt

    status = "discharged"

    def render(self) -> str:
        return f"discharged({self.method})"

    def to_json(self) -> dict:
        return {"status": self.status, "method": self.method, "witness": None}


@dataclass(frozen=True)
class Refuted:
    witness: Optional[tuple]  # ((name, value), ...); None when only a solver said so
    conclusion: ast.Expr
    method: str = "enumeration"

    status = "refuted"

    def witness_text(self) -> dict:
        return {n: format_value(v) for n, v in self.witness or ()}

    def render(self) -> str:
        if self.witness is None:
            return f"refuted ({self.method})"
        return "refuted [" + ", ".join(f"{n} = {format_value(v)}" for n, v in self.witness) + "]"

    def to_json(self) -> dict:
        return {"status": self.status, "method": self.method,
                "witness": None if self.witness is None else self.witness_text()}


@dataclass(frozen=True)
class Unknown:
    reason: str  # infinite-domain | limit-exceeded | timeout | undefined | unsupported

    status = "unknown"

    def render(self) -> str:
        return f"unknown({self.reason})"

    def to_json(self) -> dict:
        return {"status": self.status, "method": self.reason, "witness": None}


Verdict = Union[Discharged, Refuted, Unknown]


@dataclass(frozen=True)
class DischargeConfig:
    int_bound: int = 64
    enum_limit: int = 1_000_000
    depth_limit: int = 10_000
    timeout_ms: int = 5_000

    def __post_init__(self):
        for name in ("int_bound", "enum_limit", "depth_limit", "timeout_ms"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def to_json(self) -> dict:
        return {"int_bound": self.int_bound, "enum_limit": self.enum_limit,
                "depth_limit": self.depth_limit, "timeout_ms": self.timeout_ms}


# ------------------------------------------------------------ normalize

_LITERAL_NODES = (ast.IntLit, ast.RealLit, ast.BoolLit, ast.QuoteLit, ast.SetEnum,
                  ast.RecordCtor, ast.Unary, ast.Binary, ast.IfThenElse, ast.FieldAccess)
_FOLDABLE = (ast.Unary, ast.Binary, ast.IfThenElse, ast.FieldAccess)
_MAX_INLINE = 64


def _literal_only(e: ast.Expr) -> bool:
    return all(isinstance(n, _LITERAL_NODES) for n in ast.walk(e))


def is_safe(e: ast.Expr) -> bool:
    """No partial operator, call or quantifier: evaluation cannot fail or diverge."""
    for n in ast.walk(e):
        if isinstance(n, (ast.Apply, ast.Quantifier)):
            return False
        if isinstance(n, ast.Binary) and n.op in ast.PARTIAL_OPS:
            return False
    return True


def _join(op: str, parts: list) -> ast.Expr:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = ast.Binary(op, p, out)
    return out


class Normalizer:
    """Rewrites formulas to a simpler equivalent.

    With ``sets`` enabled, set membership over ``union``, ``inter``, ``\\`` and
    set literals is also expanded into propositional form.
    """

    def __init__(self, model: CheckedModel, sets: bool = False,
                 deadline: Optional[float] = None):
        self.model = model
        self.env = model.env
        self.sets = sets
        self._evaluator = Evaluator(model, deadline=deadline)

    def __call__(self, e: ast.Expr) -> ast.Expr:
        for _ in range(16):
            nxt = self.norm(e, 0)
            if nxt == e:
                return nxt
            e = nxt
        return e

    def norm(self, e: ast.Expr, depth: int) -> ast.Expr:
        e = map_children(e, lambda c: self.norm(c, depth))
        return self.rewrite(e, depth)

    def fold(self, e: ast.Expr) -> ast.Expr:
        if isinstance(e, _FOLDABLE) and _literal_only(e):
            try:
                return value_to_expr(self._evaluator.eval(e, {}))
            except EvalTimeout:
                raise
            except (EvalError, TypeError, AttributeError, ValueError):
                return e
        return e

    def rewrite(self, e: ast.Expr, depth: int) -> ast.Expr:
        if isinstance(e, ast.Apply):
            expansion = self.env.expansion(e.name)
            if expansion is not None and depth < _MAX_INLINE and len(expansion[0]) == len(e.args):
                params, body = expansion
                return self.norm(substitute(body, dict(zip(params, e.args))), depth + 1)
            return e
        if isinstance(e, ast.FieldAccess) and isinstance(e.expr, ast.RecordCtor):
            rec = self.env.record(e.expr.type_name)
            if rec is not None:
                names = [f for f, _ in rec.fields]
                if e.field in names and len(e.expr.args) == len(names):
                    return e.expr.args[names.index(e.field)]
        if isinstance(e, ast.Unary) and e.op == "not":
            x = e.operand
            if isinstance(x, ast.BoolLit):
                return ast.BoolLit(not x.value)
            if isinstance(x, ast.Unary) and x.op == "not":
                return x.operand
            return e
        if isinstance(e, ast.Binary):
            return self.binary(e, depth)
        if isinstance(e, ast.IfThenElse):
            if isinstance(e.cond, ast.BoolLit):
                return e.then if e.cond.value else e.else_
            if alpha_equal(e.then, e.else_):
                return e.then
        if isinstance(e, ast.Quantifier):
            body_free = free_vars(e.body)
            binders = tuple((n, t) for n, t in e.binders if n in body_free)
            if not binders:
                return e.body  # carriers are never empty
            if binders != e.binders:
                return ast.Quantifier(e.kind, binders, e.body, span=e.span)
            return e
        return self.fold(e)

    def binary(self, e: ast.Binary, depth: int) -> ast.Expr:
        op, a, b = e.op, e.left, e.right
        if op == "and":
            parts = []
            for p in conjuncts(a) + conjuncts(b):
                if p == ast.FALSE:
                    return ast.FALSE
                if p != ast.TRUE and not any(alpha_equal(p, q) for q in parts):
                    parts.append(p)
            return _join("and", parts) if parts else ast.TRUE
        if op == "or":
            parts = []
            for p in disjuncts(a) + disjuncts(b):
                if p == ast.TRUE:
                    return ast.TRUE
                if p != ast.FALSE and not any(alpha_equal(p, q) for q in parts):
                    parts.append(p)
            return _join("or", parts) if parts else ast.FALSE
        if op == "=>":
            if a == ast.TRUE:
                return b
            if a == ast.FALSE or b == ast.TRUE:
                return ast.TRUE
            if any(alpha_equal(b, h) for h in conjuncts(a)):
                return ast.TRUE
            return e
        if op == "<=>":
            if alpha_equal(a, b):
                return ast.TRUE
            return self.fold(e)
        if op in ("=", "<>") and alpha_equal(a, b) and is_safe(a):
            return ast.BoolLit(op == "=")
        if self.sets and op in ("in set", "not in set") and is_safe(e):
            expanded = self.membership(a, b)
            if expanded is not None:
                expanded = self.norm(expanded, depth)
                return expanded if op == "in set" else self.rewrite(
                    ast.Unary("not", expanded), depth)
        return self.fold(e)

    def membership(self, x: ast.Expr, s: ast.Expr) -> Optional[ast.Expr]:
        if isinstance(s, ast.SetEnum):
            if not s.elems:
                return ast.FALSE
            return _join("or", [ast.Binary("=", x, el) for el in s.elems])
        if isinstance(s, ast.Binary) and s.op in ast.SET_OPS:
            left = ast.Binary("in set", x, s.left)
            right = ast.Binary("in set", x, s.right)
            if s.op == "union":
                return ast.Binary("or", left, right)
            if s.op == "inter":
                return ast.Binary("and", left, right)
            return ast.Binary("and", left, ast.Unary("not", right))
        return None


def normalize(f: ast.Expr, model: CheckedModel) -> ast.Expr:
    return Normalizer(model)(f)


# ----------------------------------------------------------- entailment

def _equations(hyps) -> dict:
    subst = {}
    for h in hyps:
        if isinstance(h, ast.Binary) and h.op == "=":
            for lhs, rhs in ((h.left, h.right), (h.right, h.left)):
                if isinstance(lhs, ast.VarRef) and lhs.name not in free_vars(rhs) \
                        and lhs.name not in subst:
                    subst[lhs.name] = rhs
                    break
    return subst


def entails_directly(hyps, concl: ast.Expr, model: Optional[CheckedModel] = None,
                     bound: frozenset = frozenset(), deadline: Optional[float] = None) -> bool:
    """Sound but incomplete check that ``hyps`` entail ``concl``.

    A conclusion conjunct is accepted when it is alpha-equivalent to a
    hypothesis, or when rewriting it once with the hypothesis equations makes
    it simplify to ``true``, match a hypothesis, or become a closed formula
    that evaluates to true. ``bound`` names the obligation's binders; without
    a ``model`` only the syntactic checks are used.
    """
    flat = [c for h in hyps for c in conjuncts(h)]
    eqs = _equations(flat)
    simplify = Normalizer(model, sets=True, deadline=deadline) if model is not None else None
    evaluator = Evaluator(model, deadline=deadline) if model is not None else None
    rewritten = None
    for c in conjuncts(concl):
        if c == ast.TRUE or any(alpha_equal(c, h) for h in flat):
            continue
        if simplify is None:
            return False
        target = simplify(substitute(c, eqs))
        if target == ast.TRUE:
            continue
        if rewritten is None:
            rewritten = [simplify(substitute(h, eqs)) for h in flat]
        if any(alpha_equal(target, h) for h in (*flat, *rewritten)):
            continue
        if not (free_vars(target) & bound):
            try:
                if evaluator.eval(target, {}) is True:
                    continue
            except EvalTimeout:
                raise
            except EvalError:
                pass
        return False
    return True


# ------------------------------------------------------------ discharge

class _Search:
    def __init__(self, po: ProofObligation, m: CheckedModel, cfg: DischargeConfig,
                 deadline: float):
        self.po = po
        self.m = m
        self.cfg = cfg
        self.deadline = deadline
        self.ev = Evaluator(m, depth_limit=cfg.depth_limit, deadline=deadline)
        self.names = [n for n, _ in po.binders]
        self.undefined = False

    def falsifies(self, values) -> bool:
        """True when the assignment satisfies every hypothesis and falsifies the conclusion."""
        b = dict(zip(self.names, values))
        try:
            for h in self.po.hypotheses:
                if not self.ev.eval(h, b):
                    return False
            return not self.ev.eval(self.po.conclusion, b)
        except EvalTimeout:
            raise
        except EvalError:
            self.undefined = True
            return False

    def check_time(self, i: int):
        if i % 256 == 0 and time.monotonic() > self.deadline:
            raise EvalTimeout("discharge deadline passed")

    def refuted(self, values) -> Refuted:
        w = Refuted(tuple(zip(self.names, values)), self.po.conclusion)
        confirm_refutation(self.po, self.m, w)
        return w


def confirm_refutation(po: ProofObligation, m: CheckedModel, w: Refuted):
    """Re-evaluate ``po`` on the witness; raises AssertionError if it does not refute."""
    ev = Evaluator(m)
    b = dict(w.witness)
    assert set(b) == {n for n, _ in po.binders}, "witness does not bind every binder"
    for h in po.hypotheses:
        assert ev.eval(h, b) is True, f"witness violates hypothesis {pretty_print(h)}"
    assert ev.eval(po.conclusion, b) is False, "witness does not falsify the conclusion"


def _sample_check(po: ProofObligation, m: CheckedModel, cfg: DischargeConfig,
                  deadline: Optional[float] = None):
    """Evaluate ``hyps => concl`` on random assignments; a false result is a soundness bug."""
    rng = random.Random(po.id)
    ev = Evaluator(m, depth_limit=cfg.depth_limit, deadline=deadline)
    body = po.body()
    for _ in range(SAMPLE_CHECKS):
        try:
            b = {n: sample_value(t, m.env, rng, cfg.int_bound) for n, t in po.binders}
            value = ev.eval(body, b)
        except EvalTimeout:
            raise
        except EvalError:
            continue
        assert value is not False, f"{po.id}: entailment contradicted by sample {b}"


def _product(types, env):
    """Lazy cartesian product of carriers, first binder slowest."""
    if not types:
        yield ()
        return
    for v in enumerate_type(types[0], env):
        for rest in _product(types[1:], env):
            yield (v,) + rest


def _finite_enum(s: _Search) -> Optional[Verdict]:
    env = s.m.env
    sizes = [env.finite_domain(t) for _, t in s.po.binders]
    if any(k is None for k in sizes) or prod(sizes) > s.cfg.enum_limit:
        return None
    for i, values in enumerate(_product([t for _, t in s.po.binders], env)):
        s.check_time(i)
        if s.falsifies(values):
            return s.refuted(values)
    if s.undefined:
        return Unknown("undefined")
    return Discharged("finite-enum")


def _int_values(bound: int) -> list[int]:
    out = [0]
    for n in range(1, bound + 1):
        out += [n, -n]
    return out


def refute_bounded(po: ProofObligation, m: CheckedModel, cfg: DischargeConfig,
                   _search: Optional[_Search] = None) -> Optional[Refuted]:
    """First counterexample in enumeration order, or None.

    Integer binders take values with ``|v| <= int_bound`` in shells: every
    assignment whose largest integer enumeration index is ``k`` is tried
    before any with index ``k + 1``, so raising the bound only appends
    candidates. Binders over reals or other unbounded carriers prevent any
    attempt.
    """
    s = _search or _Search(po, m, cfg, time.monotonic() + cfg.timeout_ms / 1000)
    return _refute(s)[0]


def _refute(s: _Search) -> tuple[Optional[Refuted], str]:
    env = s.m.env
    kinds = []
    for _, t in s.po.binders:
        if isinstance(env.unfold(t), ast.IntType):
            kinds.append("int")
        elif env.finite_domain(t) is not None:
            kinds.append("finite")
        else:
            return None, "infinite-domain"
    ints = _int_values(s.cfg.int_bound)
    int_pos = [i for i, k in enumerate(kinds) if k == "int"]
    fin_pos = [i for i, k in enumerate(kinds) if k == "finite"]
    fin_types = [s.po.binders[i][1] for i in fin_pos]
    count = 0
    values = [None] * len(kinds)
    shells = range(len(ints)) if int_pos else range(1)
    for shell in shells:
        for ranks in itertools.product(range(shell + 1), repeat=len(int_pos)):
            if int_pos and max(ranks) != shell:
                continue
            for i, r in zip(int_pos, ranks):
                values[i] = ints[r]
            for combo in _product(fin_types, env):
                count += 1
                if count > s.cfg.enum_limit:
                    return None, "limit-exceeded"
                s.check_time(count)
                for i, v in zip(fin_pos, combo):
                    values[i] = v
                if s.falsifies(values):
                    return s.refuted(tuple(values)), ""
    if not int_pos:
        return None, "undefined" if s.undefined else "limit-exceeded"
    return None, "infinite-domain"


def discharge(po: ProofObligation, m: CheckedModel,
              cfg: DischargeConfig = DischargeConfig()) -> Verdict:
    """Run the strategy ladder on ``po``. Never raises; failures become Unknown."""
    deadline = time.monotonic() + cfg.timeout_ms / 1000
    try:
        return _ladder(po, m, cfg, deadline)
    except EvalTimeout:
        return Unknown("timeout")
    except (CmlError, RecursionError):
        return Unknown("undefined")


def _ladder(po, m, cfg, deadline) -> Verdict:
    norm = Normalizer(m, deadline=deadline)
    hyps = [norm(h) for h in po.hypotheses]
    concl = norm(po.conclusion)
    if concl == ast.TRUE or ast.FALSE in hyps:
        return Discharged("normalize")

    bound = frozenset(n for n, _ in po.binders)
    body = concl if not hyps else ast.Binary("=>", ast.conj(hyps), concl)
    if not (free_vars(body) & bound):
        ev = Evaluator(m, depth_limit=cfg.depth_limit, deadline=deadline)
        try:
            result = ev.eval(body, {})
        except EvalTimeout:
            raise
        except EvalError:
            result = None
        if result is True:
            return Discharged("ground")
        if result is False and not po.binders:
            w = Refuted((), po.conclusion)
            confirm_refutation(po, m, w)
            return w

    if entails_directly(hyps, concl, m, bound, deadline):
        _sample_check(po, m, cfg, deadline)
        return Discharged("entailment")

    search = _Search(po, m, cfg, deadline)
    verdict = _finite_enum(search)
    if verdict is not None:
        return verdict
    witness, reason = _refute(search)
    if witness is not None:
        return witness
    return Unknown(reason)


def discharge_all(pos, m: CheckedModel, cfg: DischargeConfig = DischargeConfig()):
    """``(po, verdict, duration_ms)`` for each obligation, in PO order."""
    out = []
    for po in pos:
        start = time.perf_counter()
        verdict = discharge(po, m, cfg)
        out.append((po, verdict, int(round((time.perf_counter() - start) * 1000))))
    return out
