"""Render syntax trees back to source text.

Two styles share one code path. ``full`` (the default, used for proof
obligation display) wraps every binary expression and field access in
parentheses, e.g. ``((dw.lastproperstate) = stop)``. ``minimal`` emits
parentheses only where precedence requires them and is used for models.
Both re-parse to an equal tree.
"""

from __future__ import annotations

from fractions import Fraction

from . import ast

# binding strength, higher binds tighter
_PREC = {
    "<=>": 1, "=>": 2, "or": 3, "and": 4,
    "=": 6, "<>": 6, "<": 6, "<=": 6, ">": 6, ">=": 6, "in set": 6, "not in set": 6,
    "union": 7, "inter": 7, "\\": 7,
    "+": 8, "-": 8,
    "*": 9, "/": 9, "div": 9, "mod": 9,
}
_RIGHT_ASSOC = {"<=>", "=>", "or", "and"}
_NOT_PREC = 5
_UNARY_PREC = 10
_POSTFIX_PREC = 11
_ATOM = 12
_OPEN = 0  # quantifiers and if-expressions swallow everything to their right


def print_type(t: ast.TypeExpr) -> str:
    if isinstance(t, ast.IntType):
        return "int"
    if isinstance(t, ast.RealType):
        return "real"
    if isinstance(t, ast.BoolType):
        return "bool"
    if isinstance(t, ast.NamedType):
        return t.name
    if isinstance(t, ast.SetType):
        return f"set of {print_type(t.elem)}"
    raise TypeError(f"not a type: {t!r}")


def format_real(value: Fraction) -> str:
    """Decimal text for ``value`` when it has a finite expansion, else ``n/d``."""
    value = Fraction(value)
    d = value.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives, 1)
    scaled = abs(value) * 10 ** digits
    whole, frac = divmod(int(scaled), 10 ** digits)
    text = f"{whole}.{frac:0{digits}d}".rstrip("0")
    if text.endswith("."):
        text += "0"
    return ("-" if value < 0 else "") + text


def _binders(binders) -> str:
    return ", ".join(f"{n}:{print_type(t)}" for n, t in binders)


class _Printer:
    def __init__(self, full: bool):
        self.full = full

    def prec(self, e: ast.Expr) -> int:
        if isinstance(e, ast.Binary):
            return _ATOM if self.full else _PREC[e.op]
        if isinstance(e, ast.Unary):
            return _NOT_PREC if e.op == "not" else _UNARY_PREC
        if isinstance(e, ast.FieldAccess):
            return _ATOM if self.full else _POSTFIX_PREC
        if isinstance(e, (ast.Quantifier, ast.IfThenElse)):
            return _OPEN
        return _ATOM

    def child(self, e: ast.Expr, need: int) -> str:
        text = self.expr(e)
        return f"({text})" if self.prec(e) < need else text

    def expr(self, e: ast.Expr) -> str:
        if isinstance(e, ast.IntLit):
            return str(e.value)
        if isinstance(e, ast.RealLit):
            return format_real(e.value)
        if isinstance(e, ast.BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, ast.QuoteLit):
            return f"<{e.name}>"
        if isinstance(e, ast.VarRef):
            return e.name
        if isinstance(e, ast.SetEnum):
            return "{" + ", ".join(self.expr(x) for x in e.elems) + "}"
        if isinstance(e, ast.RecordCtor):
            return f"mk_{e.type_name}(" + ", ".join(self.expr(x) for x in e.args) + ")"
        if isinstance(e, ast.Apply):
            return f"{e.name}(" + ", ".join(self.expr(x) for x in e.args) + ")"
        if isinstance(e, ast.FieldAccess):
            text = f"{self.child(e.expr, _POSTFIX_PREC)}.{e.field}"
            return f"({text})" if self.full else text
        if isinstance(e, ast.Unary):
            if e.op == "not":
                return f"not {self.child(e.operand, _NOT_PREC)}"
            # "- -x" would open a comment, so nested unaries are wrapped
            need = _UNARY_PREC + 1 if isinstance(e.operand, ast.Unary) else _UNARY_PREC
            inner = self.child(e.operand, need)
            if e.op == "-":
                return f"-{inner}"
            return f"card {inner}"
        if isinstance(e, ast.Binary):
            p = _PREC[e.op]
            if e.op in _RIGHT_ASSOC:
                lneed, rneed = p + 1, p
            elif p == 6:
                lneed = rneed = p + 1
            else:
                lneed, rneed = p, p + 1
            lhs = self.child(e.left, lneed)
            rhs = self.child(e.right, rneed)
            text = f"{lhs} {e.op} {rhs}"
            return f"({text})" if self.full else text
        if isinstance(e, ast.Quantifier):
            return f"{e.kind} {_binders(e.binders)} & {self.expr(e.body)}"
        if isinstance(e, ast.IfThenElse):
            return (f"if {self.expr(e.cond)} then {self.expr(e.then)} "
                    f"else {self.expr(e.else_)}")
        raise TypeError(f"not an expression: {e!r}")


def pretty_print(e: ast.Expr, *, minimal: bool = False) -> str:
    return _Printer(full=not minimal).expr(e)


# --------------------------------------------------------------- models

def print_stmt(s: ast.Stmt, p: _Printer) -> str:
    if isinstance(s, ast.Assign):
        return f"{s.target} := {p.expr(s.expr)}"
    if isinstance(s, ast.Seq):
        parts = []
        while isinstance(s, ast.Seq):
            parts.append(print_stmt(s.first, p))
            s = s.second
        parts.append(print_stmt(s, p))
        return "(" + "; ".join(parts) + ")"
    if isinstance(s, ast.IfStmt):
        then = print_stmt(s.then, p)
        if isinstance(s.then, ast.IfStmt):
            then = f"({then})"
        text = f"if {p.expr(s.cond)} then {then}"
        if s.else_ is not None:
            text += f" else {print_stmt(s.else_, p)}"
        return text
    raise TypeError(f"not a statement: {s!r}")


def _sig(types) -> str:
    if not types:
        return "()"
    return " * ".join(print_type(t) for t in types)


def print_model(m: ast.ModelAst) -> str:
    p = _Printer(full=False)
    out: list[str] = []
    if m.type_defs:
        out.append("types")
        for td in m.type_defs:
            if isinstance(td.body, ast.QuoteUnion):
                out.append(f"  {td.name} = " + " | ".join(f"<{q}>" for q in td.body.literals))
            elif isinstance(td.body, ast.Synonym):
                out.append(f"  {td.name} = {print_type(td.body.type)}")
            else:
                out.append(f"  {td.name} ::")
                for fname, ftype in td.body.fields:
                    out.append(f"    {fname} : {print_type(ftype)}")
            if td.invariant is not None:
                out.append(f"    inv {td.invariant.binder} == {p.expr(td.invariant.expr)}")
        out.append("")
    if m.value_defs:
        out.append("values")
        for vd in m.value_defs:
            typ = f" : {print_type(vd.type)}" if vd.type is not None else ""
            out.append(f"  {vd.name}{typ} = {p.expr(vd.expr)}")
        out.append("")
    if m.function_defs:
        out.append("functions")
        for fd in m.function_defs:
            out.append(f"  {fd.name} : {_sig(fd.param_types)} -> {print_type(fd.return_type)}")
            out.append(f"  {fd.name}({', '.join(fd.params)}) == {p.expr(fd.body)}")
            if fd.pre is not None:
                out.append(f"    pre {p.expr(fd.pre)}")
            if fd.post is not None:
                out.append(f"    post {p.expr(fd.post)}")
            out.append("")
    for pd in m.process_defs:
        out.append(f"process {pd.name} = begin")
        if pd.state_vars:
            out.append("  state")
            for name, typ in pd.state_vars:
                out.append(f"    {name} : {print_type(typ)}")
        if pd.operations:
            out.append("  operations")
            for op in pd.operations:
                sig = "(" + " * ".join(print_type(t) for _, t in op.params) + ")"
                out.append(f"    {op.name} : {sig} ==> ()")
                params = ", ".join(n for n, _ in op.params)
                out.append(f"    {op.name}({params}) == {print_stmt(op.body, p)}")
                if op.pre is not None:
                    out.append(f"      pre {p.expr(op.pre)}")
                if op.post is not None:
                    out.append(f"      post {p.expr(op.post)}")
        out.append("end")
        out.append("")
    return "\n".join(out).rstrip() + "\n"
