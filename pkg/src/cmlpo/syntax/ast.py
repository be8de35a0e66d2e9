"""Syntax trees for models, types, expressions and statements.

All nodes are frozen dataclasses. Source spans are carried on every node but
excluded from equality, so two trees compare equal when they have the same
shape regardless of where they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self):
        if min(self.start_line, self.start_col, self.end_line, self.end_col) < 1:
            raise ValueError(f"span positions are 1-based: {self}")
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span starts after it ends: {self}")

    def to(self, other: "SourceSpan") -> "SourceSpan":
        return SourceSpan(self.file, self.start_line, self.start_col,
                          other.end_line, other.end_col)

    def contains(self, other: "SourceSpan") -> bool:
        return ((self.start_line, self.start_col) <= (other.start_line, other.start_col)
                and (other.end_line, other.end_col) <= (self.end_line, self.end_col))

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"


def _span():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class IntType:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RealType:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BoolType:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class NamedType:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SetType:
    elem: "TypeExpr"
    span: Optional[SourceSpan] = _span()


TypeExpr = Union[IntType, RealType, BoolType, NamedType, SetType]


# ---------------------------------------------------------- expressions

@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RealLit:
    value: Fraction
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class QuoteLit:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class VarRef:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SetEnum:
    elems: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RecordCtor:
    type_name: str
    args: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FieldAccess:
    expr: "Expr"
    field: str
    span: Optional[SourceSpan] = _span()


UNARY_OPS = ("not", "-", "card")

ARITH_OPS = ("+", "-", "*", "/", "div", "mod")
COMPARE_OPS = ("<", "<=", ">", ">=", "=", "<>", "in set", "not in set")
SET_OPS = ("union", "inter", "\\")
LOGIC_OPS = ("and", "or", "=>", "<=>")
BINARY_OPS = ARITH_OPS + COMPARE_OPS + SET_OPS + LOGIC_OPS
PARTIAL_OPS = ("/", "div", "mod")


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Apply:
    name: str
    args: tuple["Expr", ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Quantifier:
    kind: str  # "forall" | "exists"
    binders: tuple[tuple[str, TypeExpr], ...]
    body: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"
    span: Optional[SourceSpan] = _span()


Expr = Union[IntLit, RealLit, BoolLit, QuoteLit, VarRef, SetEnum, RecordCtor,
             FieldAccess, Unary, Binary, Apply, Quantifier, IfThenElse]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (SetEnum,)):
        return e.elems
    if isinstance(e, (RecordCtor, Apply)):
        return e.args
    if isinstance(e, FieldAccess):
        return (e.expr,)
    if isinstance(e, Unary):
        return (e.operand,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Quantifier):
        return (e.body,)
    if isinstance(e, IfThenElse):
        return (e.cond, e.then, e.else_)
    return ()


def walk(e: Expr):
    """Yield every node of ``e`` in pre-order."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def conj(parts, *, left=False) -> Expr:
    """Join expressions with ``and``; right-leaning unless ``left`` is set."""
    parts = list(parts)
    if not parts:
        return TRUE
    if left:
        out = parts[0]
        for p in parts[1:]:
            out = Binary("and", out, p)
        return out
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Binary("and", p, out)
    return out


# ----------------------------------------------------------- statements

@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class IfStmt:
    cond: Expr
    then: "Stmt"
    else_: Optional["Stmt"] = None
    span: Optional[SourceSpan] = _span()


Stmt = Union[Assign, Seq, IfStmt]


# ---------------------------------------------------------- definitions

@dataclass(frozen=True)
class QuoteUnion:
    literals: tuple[str, ...]


@dataclass(frozen=True)
class Synonym:
    type: TypeExpr


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, TypeExpr], ...]

    def field_type(self, name: str) -> Optional[TypeExpr]:
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None


TypeBody = Union[QuoteUnion, Synonym, Record]


@dataclass(frozen=True)
class Invariant:
    binder: str
    expr: Expr


@dataclass(frozen=True)
class TypeDef:
    name: str
    body: TypeBody
    invariant: Optional[Invariant] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ValueDef:
    name: str
    type: Optional[TypeExpr]
    expr: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FunctionDef:
    name: str
    param_types: tuple[TypeExpr, ...]
    return_type: TypeExpr
    params: tuple[str, ...]
    body: Expr
    pre: Optional[Expr] = None
    post: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()

    @property
    def typed_params(self) -> tuple[tuple[str, TypeExpr], ...]:
        return tuple(zip(self.params, self.param_types))


@dataclass(frozen=True)
class OperationDef:
    name: str
    params: tuple[tuple[str, TypeExpr], ...]
    body: Stmt
    pre: Optional[Expr] = None
    post: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ProcessDef:
    name: str
    state_vars: tuple[tuple[str, TypeExpr], ...]
    operations: tuple[OperationDef, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ModelAst:
    type_defs: tuple[TypeDef, ...] = ()
    value_defs: tuple[ValueDef, ...] = ()
    function_defs: tuple[FunctionDef, ...] = ()
    process_defs: tuple[ProcessDef, ...] = ()
    file: str = field(default="<string>", compare=False)
