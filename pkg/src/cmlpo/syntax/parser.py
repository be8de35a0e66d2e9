"""Recursive-descent parser producing :mod:`cmlpo.syntax.ast` trees.

Expression precedence, loosest first::

    <=>   =>   or   and   not   comparisons / in set   union inter \\
    + -   * / div mod   unary - card   field access

``and``, ``or``, ``=>`` and ``<=>`` associate to the right, the arithmetic and
set operators to the left, comparisons do not chain. Quantifiers and
if-expressions extend as far right as possible.
"""

from __future__ import annotations

from typing import Optional

from ..errors import ParseError, UnsupportedFeature
from . import ast
from .lexer import Token, tokenize

_UNSUPPORTED_SECTIONS = {"actions", "channels", "channel", "chansets"}
_COMPARE = ("=", "<>", "<", "<=", ">", ">=")
_SECTION_KEYWORDS = ("types", "values", "functions", "process")


class Parser:
    def __init__(self, tokens: list[Token], file: str = "<string>"):
        self.tokens = tokens
        self.file = file
        self.pos = 0
        self.last: Optional[Token] = None

    # ------------------------------------------------------------ helpers

    def peek(self, k: int = 0) -> Optional[Token]:
        i = self.pos + k
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, kind: str, value=None, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.is_(kind, value)

    def at_sym(self, *values: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "symbol" and tok.value in values

    def at_kw(self, *values: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "keyword" and tok.value in values

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.fail(["more input"])
        if tok.is_("symbol", "@"):
            raise UnsupportedFeature("'@' operator", tok.span)
        self.pos += 1
        self.last = tok
        return tok

    def here(self) -> ast.SourceSpan:
        tok = self.peek()
        if tok is not None:
            return tok.span
        if self.last is not None:
            s = self.last.span
            return ast.SourceSpan(s.file, s.end_line, s.end_col, s.end_line, s.end_col)
        return ast.SourceSpan(self.file, 1, 1, 1, 1)

    def fail(self, expected):
        tok = self.peek()
        if tok is not None and tok.is_("symbol", "@"):
            raise UnsupportedFeature("'@' operator", tok.span)
        found = "end of input" if tok is None else repr(tok.text)
        exp = ", ".join(expected)
        raise ParseError(f"expected {exp}, found {found}", self.here(), expected)

    def expect_sym(self, value: str) -> Token:
        if not self.at_sym(value):
            self.fail([repr(value)])
        return self.next()

    def expect_kw(self, value: str) -> Token:
        if not self.at_kw(value):
            self.fail([repr(value)])
        return self.next()

    def expect_ident(self) -> Token:
        if not self.at("ident"):
            self.fail(["identifier"])
        return self.next()

    def span_from(self, start: ast.SourceSpan) -> ast.SourceSpan:
        return start.to(self.last.span)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    # -------------------------------------------------------------- model

    def parse_model(self) -> ast.ModelAst:
        types, values, functions, processes = [], [], [], []
        section = "functions"
        while not self.done():
            tok = self.peek()
            if tok.kind == "keyword" and tok.value in _UNSUPPORTED_SECTIONS:
                raise UnsupportedFeature(tok.value, tok.span)
            if self.at_kw("types", "values", "functions"):
                section = self.next().value
            elif self.at_kw("process"):
                processes.append(self.parse_process())
            elif self.at("ident"):
                if section == "types":
                    types.append(self.parse_typedef())
                elif section == "values":
                    values.append(self.parse_valuedef())
                else:
                    functions.append(self.parse_fndef())
            else:
                self.fail(["definition", *(repr(k) for k in _SECTION_KEYWORDS)])
        return ast.ModelAst(tuple(types), tuple(values), tuple(functions),
                            tuple(processes), file=self.file)

    def parse_typedef(self) -> ast.TypeDef:
        name = self.expect_ident()
        if self.at_sym("::"):
            self.next()
            fields = []
            while self.at("ident") and self.at("symbol", ":", 1):
                fname = self.next().value
                self.next()
                fields.append((fname, self.parse_type()))
            body = ast.Record(tuple(fields))
        else:
            self.expect_sym("=")
            if self.at("quote"):
                lits = [self.next().value]
                while self.at_sym("|"):
                    self.next()
                    if not self.at("quote"):
                        raise UnsupportedFeature("union of non-quote types", self.here())
                    lits.append(self.next().value)
                body = ast.QuoteUnion(tuple(lits))
            else:
                body = ast.Synonym(self.parse_type())
                if self.at_sym("|"):
                    raise UnsupportedFeature("union of non-quote types", self.here())
        inv = None
        if self.at_kw("inv"):
            self.next()
            binder = self.expect_ident().value
            self.expect_sym("==")
            inv = ast.Invariant(binder, self.parse_expr())
        return ast.TypeDef(name.value, body, inv, span=self.span_from(name.span))

    def parse_valuedef(self) -> ast.ValueDef:
        name = self.expect_ident()
        typ = None
        if self.at_sym(":"):
            self.next()
            typ = self.parse_type()
        self.expect_sym("=")
        expr = self.parse_expr()
        return ast.ValueDef(name.value, typ, expr, span=self.span_from(name.span))

    def parse_type_list(self) -> list[ast.TypeExpr]:
        """Parse ``T1 * T2 * ...``, optionally parenthesised; ``()`` is empty."""
        if self.at_sym("("):
            self.next()
            if self.at_sym(")"):
                self.next()
                return []
            types = self._star_types()
            self.expect_sym(")")
            return types
        return self._star_types()

    def _star_types(self) -> list[ast.TypeExpr]:
        types = [self.parse_type()]
        while self.at_sym("*"):
            self.next()
            types.append(self.parse_type())
        return types

    def parse_params(self) -> list[str]:
        self.expect_sym("(")
        names = []
        if not self.at_sym(")"):
            names.append(self.expect_ident().value)
            while self.at_sym(","):
                self.next()
                names.append(self.expect_ident().value)
        self.expect_sym(")")
        return names

    def parse_fndef(self) -> ast.FunctionDef:
        name = self.expect_ident()
        self.expect_sym(":")
        param_types = self.parse_type_list()
        self.expect_sym("->")
        ret = self.parse_type()
        self.check_name_repeat(name)
        params = self.parse_params()
        if len(params) != len(param_types):
            raise ParseError(f"{name.value} declares {len(param_types)} parameter type(s) "
                             f"but names {len(params)} parameter(s)", self.last.span)
        self.expect_sym("==")
        body = self.parse_expr()
        pre = post = None
        if self.at_kw("pre"):
            self.next()
            pre = self.parse_expr()
        if self.at_kw("post"):
            self.next()
            post = self.parse_expr()
        return ast.FunctionDef(name.value, tuple(param_types), ret, tuple(params), body,
                               pre, post, span=self.span_from(name.span))

    def check_name_repeat(self, name: Token):
        tok = self.expect_ident()
        if tok.value != name.value:
            raise ParseError(f"definition of {name.value!r} continues with {tok.value!r}",
                             tok.span, [repr(name.value)])

    def parse_process(self) -> ast.ProcessDef:
        start = self.expect_kw("process")
        name = self.expect_ident().value
        self.expect_sym("=")
        self.expect_kw("begin")
        state_vars, ops = [], []
        while not self.at_kw("end"):
            tok = self.peek()
            if tok is None:
                self.fail(["'end'"])
            if tok.kind == "keyword" and tok.value in _UNSUPPORTED_SECTIONS:
                raise UnsupportedFeature(tok.value, tok.span)
            if self.at_kw("state"):
                self.next()
                while self.at("ident") and self.at("symbol", ":", 1):
                    vname = self.next().value
                    self.next()
                    state_vars.append((vname, self.parse_type()))
            elif self.at_kw("operations"):
                self.next()
                while self.at("ident"):
                    ops.append(self.parse_opdef())
            else:
                self.fail(["'state'", "'operations'", "'end'"])
        self.expect_kw("end")
        return ast.ProcessDef(name, tuple(state_vars), tuple(ops), span=self.span_from(start.span))

    def parse_opdef(self) -> ast.OperationDef:
        name = self.expect_ident()
        self.expect_sym(":")
        param_types = self.parse_type_list()
        self.expect_sym("==>")
        if not (self.at_sym("(") and self.at("symbol", ")", 1)):
            raise UnsupportedFeature("operation return type other than ()", self.here())
        self.next()
        self.next()
        self.check_name_repeat(name)
        params = self.parse_params()
        if len(params) != len(param_types):
            raise ParseError(f"{name.value} declares {len(param_types)} parameter type(s) "
                             f"but names {len(params)} parameter(s)", self.last.span)
        self.expect_sym("==")
        body = self.parse_stmt()
        pre = post = None
        if self.at_kw("pre"):
            self.next()
            pre = self.parse_expr()
        if self.at_kw("post"):
            self.next()
            post = self.parse_expr()
        return ast.OperationDef(name.value, tuple(zip(params, param_types)), body, pre, post,
                                span=self.span_from(name.span))

    def parse_stmt(self) -> ast.Stmt:
        start = self.here()
        if self.at_sym("("):
            self.next()
            stmts = [self.parse_stmt()]
            while self.at_sym(";"):
                self.next()
                if self.at_sym(")"):
                    break
                stmts.append(self.parse_stmt())
            self.expect_sym(")")
            out = stmts[-1]
            for s in reversed(stmts[:-1]):
                out = ast.Seq(s, out, span=s.span.to(out.span))
            if len(stmts) > 1:
                out = ast.Seq(out.first, out.second, span=self.span_from(start))
            return out
        if self.at_kw("if"):
            self.next()
            cond = self.parse_expr()
            self.expect_kw("then")
            then = self.parse_stmt()
            else_ = None
            if self.at_kw("else"):
                self.next()
                else_ = self.parse_stmt()
            return ast.IfStmt(cond, then, else_, span=self.span_from(start))
        if self.at("ident") and self.at("symbol", ":=", 1):
            target = self.next().value
            self.next()
            expr = self.parse_expr()
            return ast.Assign(target, expr, span=self.span_from(start))
        self.fail(["assignment", "'if'", "'('"])

    # -------------------------------------------------------------- types

    def parse_type(self) -> ast.TypeExpr:
        tok = self.peek()
        if tok is None:
            self.fail(["type"])
        if tok.is_("keyword", "int"):
            self.next()
            return ast.IntType(span=tok.span)
        if tok.is_("keyword", "real"):
            self.next()
            return ast.RealType(span=tok.span)
        if tok.is_("keyword", "bool"):
            self.next()
            return ast.BoolType(span=tok.span)
        if tok.is_("keyword", "set of"):
            self.next()
            elem = self.parse_type()
            return ast.SetType(elem, span=tok.span.to(self.last.span))
        if tok.kind == "ident":
            self.next()
            return ast.NamedType(tok.value, span=tok.span)
        self.fail(["type"])

    # -------------------------------------------------------- expressions

    def parse_expr(self) -> ast.Expr:
        return self.parse_iff()

    def _right_assoc(self, op: str, sub, me) -> ast.Expr:
        left = sub()
        if self.at("keyword", op) or self.at("symbol", op):
            self.next()
            right = me()
            return ast.Binary(op, left, right, span=left.span.to(right.span))
        return left

    def parse_iff(self):
        return self._right_assoc("<=>", self.parse_implies, self.parse_iff)

    def parse_implies(self):
        return self._right_assoc("=>", self.parse_or, self.parse_implies)

    def parse_or(self):
        return self._right_assoc("or", self.parse_and, self.parse_or)

    def parse_and(self):
        return self._right_assoc("and", self.parse_not, self.parse_and)

    def parse_not(self):
        if self.at_kw("not"):
            tok = self.next()
            operand = self.parse_not()
            return ast.Unary("not", operand, span=tok.span.to(operand.span))
        return self.parse_compare()

    def _compare_op(self) -> Optional[str]:
        if self.at_sym(*_COMPARE):
            return self.peek().value
        if self.at_kw("in set", "not in set"):
            return self.peek().value
        return None

    def parse_compare(self):
        left = self.parse_setop()
        op = self._compare_op()
        if op is None:
            return left
        self.next()
        right = self.parse_setop()
        if self._compare_op() is not None:
            raise ParseError("comparison operators do not chain; add parentheses",
                             self.here())
        return ast.Binary(op, left, right, span=left.span.to(right.span))

    def _left_assoc(self, ops, sub):
        left = sub()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in ("symbol", "keyword") or tok.value not in ops:
                return left
            self.next()
            right = sub()
            left = ast.Binary(tok.value, left, right, span=left.span.to(right.span))

    def parse_setop(self):
        return self._left_assoc(("union", "inter", "\\"), self.parse_add)

    def parse_add(self):
        return self._left_assoc(("+", "-"), self.parse_mul)

    def parse_mul(self):
        return self._left_assoc(("*", "/", "div", "mod"), self.parse_unary)

    def parse_unary(self):
        if self.at_sym("-") or self.at_kw("card"):
            tok = self.next()
            operand = self.parse_unary()
            return ast.Unary(tok.value, operand, span=tok.span.to(operand.span))
        return self.parse_postfix()

    def parse_postfix(self):
        e = self.parse_primary()
        while self.at_sym("."):
            self.next()
            fld = self.expect_ident()
            e = ast.FieldAccess(e, fld.value, span=e.span.to(fld.span))
        return e

    def parse_args(self) -> tuple[ast.Expr, ...]:
        self.expect_sym("(")
        args = []
        if not self.at_sym(")"):
            args.append(self.parse_expr())
            while self.at_sym(","):
                self.next()
                args.append(self.parse_expr())
        self.expect_sym(")")
        return tuple(args)

    def parse_binders(self) -> tuple[tuple[str, ast.TypeExpr], ...]:
        binders = []
        while True:
            names = [self.expect_ident().value]
            while self.at_sym(","):
                self.next()
                names.append(self.expect_ident().value)
            self.expect_sym(":")
            typ = self.parse_type()
            binders.extend((n, typ) for n in names)
            if not self.at_sym(","):
                return tuple(binders)
            self.next()

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        if tok is None:
            self.fail(["expression"])
        k, v = tok.kind, tok.value
        if k == "int":
            self.next()
            return ast.IntLit(v, span=tok.span)
        if k == "real":
            self.next()
            return ast.RealLit(v, span=tok.span)
        if k == "quote":
            self.next()
            return ast.QuoteLit(v, span=tok.span)
        if k == "keyword" and v in ("true", "false"):
            self.next()
            return ast.BoolLit(v == "true", span=tok.span)
        if k == "mk_ident":
            self.next()
            args = self.parse_args()
            return ast.RecordCtor(v, args, span=self.span_from(tok.span))
        if k == "ident":
            self.next()
            if self.at_sym("("):
                args = self.parse_args()
                return ast.Apply(v, args, span=self.span_from(tok.span))
            return ast.VarRef(v, span=tok.span)
        if tok.is_("symbol", "{"):
            self.next()
            elems = []
            if not self.at_sym("}"):
                elems.append(self.parse_expr())
                while self.at_sym(","):
                    self.next()
                    elems.append(self.parse_expr())
            self.expect_sym("}")
            return ast.SetEnum(tuple(elems), span=self.span_from(tok.span))
        if tok.is_("symbol", "("):
            self.next()
            inner = self.parse_expr()
            self.expect_sym(")")
            return inner
        if tok.is_("keyword", "if"):
            self.next()
            cond = self.parse_expr()
            self.expect_kw("then")
            then = self.parse_expr()
            self.expect_kw("else")
            else_ = self.parse_expr()
            return ast.IfThenElse(cond, then, else_, span=self.span_from(tok.span))
        if k == "keyword" and v in ("forall", "exists"):
            self.next()
            binders = self.parse_binders()
            self.expect_sym("&")
            body = self.parse_expr()
            return ast.Quantifier(v, binders, body, span=self.span_from(tok.span))
        self.fail(["expression"])


def parse_model(text: str, file: str = "<string>") -> ast.ModelAst:
    return Parser(tokenize(text, file), file).parse_model()


def parse_expression(text: str, file: str = "<string>") -> ast.Expr:
    p = Parser(tokenize(text, file), file)
    e = p.parse_expr()
    if not p.done():
        p.fail(["end of input"])
    return e


def parse_type(text: str, file: str = "<string>") -> ast.TypeExpr:
    p = Parser(tokenize(text, file), file)
    t = p.parse_type()
    if not p.done():
        p.fail(["end of input"])
    return t
