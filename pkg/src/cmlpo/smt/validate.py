"""A minimal SMT-LIB 2.6 checker for the subset of commands the emitter produces.

It parses the script into s-expressions and checks that every command is
known, that every sort and function symbol is declared before it is used,
that applications of user definitions have the right arity, and that the
script has exactly one ``assert`` followed by ``check-sat``.
"""

from __future__ import annotations

import re

from ..errors import CmlError


class SmtSyntaxError(CmlError):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<quoted>\|[^|\\]*\|)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<keyword>:[A-Za-z0-9~!@$%^&*_+=<>.?/\-]+)
  | (?P<decimal>[0-9]+\.[0-9]+)
  | (?P<numeral>0|[1-9][0-9]*)
  | (?P<symbol>[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*)
""", re.VERBOSE)


class Atom(str):
    kind = "symbol"


def _atom(kind: str, text: str) -> Atom:
    a = Atom(text[1:-1] if kind == "quoted" else text)
    a.kind = "symbol" if kind == "quoted" else kind
    return a


def parse_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SmtSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "open":
            stack.append([])
        elif kind == "close":
            if len(stack) == 1:
                raise SmtSyntaxError(f"unbalanced ')' at offset {m.start()}")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(_atom(kind, m.group()))
    if len(stack) != 1:
        raise SmtSyntaxError("unbalanced '(' at end of script")
    return stack[0]


BUILTIN_SORTS = {"Int", "Real", "Bool"}
BUILTIN_FUNS = {
    "true", "false", "not", "and", "or", "xor", "=>", "=", "distinct", "ite",
    "+", "-", "*", "/", "div", "mod", "abs", "<", "<=", ">", ">=", "to_real", "to_int", "is_int",
}
COMMANDS = {"set-logic", "set-option", "set-info", "declare-datatypes", "declare-datatype",
            "declare-fun", "declare-const", "define-fun", "define-fun-rec", "assert",
            "check-sat", "get-model", "exit"}


class _Checker:
    def __init__(self):
        self.sorts = set(BUILTIN_SORTS)
        self.funs: dict[str, int | None] = {f: None for f in BUILTIN_FUNS}  # arity or None

    def sort(self, s, extra=()):
        if isinstance(s, list) or s.kind != "symbol" or (s not in self.sorts and s not in extra):
            raise SmtSyntaxError(f"undeclared sort {s!r}")

    def symbol(self, s) -> str:
        if isinstance(s, list) or s.kind != "symbol":
            raise SmtSyntaxError(f"expected a symbol, found {s!r}")
        return str(s)

    def sorted_vars(self, lst, extra=()) -> list[str]:
        if not isinstance(lst, list):
            raise SmtSyntaxError(f"expected a variable list, found {lst!r}")
        names = []
        for item in lst:
            if not (isinstance(item, list) and len(item) == 2):
                raise SmtSyntaxError(f"malformed sorted variable {item!r}")
            names.append(self.symbol(item[0]))
            self.sort(item[1], extra)
        return names

    def term(self, t, bound: frozenset):
        if not isinstance(t, list):
            if t.kind in ("numeral", "decimal", "string"):
                return
            if t.kind == "keyword":
                raise SmtSyntaxError(f"keyword {t} in term position")
            if t in bound:
                return
            if t not in self.funs:
                raise SmtSyntaxError(f"undeclared symbol {t!r}")
            arity = self.funs[t]
            if arity not in (None, 0):
                raise SmtSyntaxError(f"{t} expects {arity} argument(s), given 0")
            return
        if not t:
            raise SmtSyntaxError("empty application")
        head = t[0]
        if isinstance(head, list):
            raise SmtSyntaxError(f"unsupported application head {head!r}")
        if head in ("forall", "exists") and head not in bound:
            if len(t) != 3:
                raise SmtSyntaxError(f"malformed {head}")
            names = self.sorted_vars(t[1])
            self.term(t[2], bound | set(names))
            return
        if head == "let" and head not in bound:
            if len(t) != 3 or not isinstance(t[1], list):
                raise SmtSyntaxError("malformed let")
            names = []
            for item in t[1]:
                if not (isinstance(item, list) and len(item) == 2):
                    raise SmtSyntaxError(f"malformed let binding {item!r}")
                names.append(self.symbol(item[0]))
                self.term(item[1], bound)
            self.term(t[2], bound | set(names))
            return
        if head not in self.funs:
            raise SmtSyntaxError(f"undeclared function {head!r}")
        arity = self.funs[head]
        if arity is not None and arity != len(t) - 1:
            raise SmtSyntaxError(f"{head} expects {arity} argument(s), given {len(t) - 1}")
        for arg in t[1:]:
            self.term(arg, bound)

    def datatypes(self, cmd):
        if len(cmd) != 3 or not isinstance(cmd[1], list) or not isinstance(cmd[2], list) \
                or len(cmd[1]) != len(cmd[2]):
            raise SmtSyntaxError("malformed declare-datatypes")
        new = []
        for decl in cmd[1]:
            if not (isinstance(decl, list) and len(decl) == 2 and decl[1] == "0"):
                raise SmtSyntaxError(f"malformed sort declaration {decl!r}")
            new.append(self.symbol(decl[0]))
        for name in new:
            if name in self.sorts:
                raise SmtSyntaxError(f"sort {name} declared twice")
        for ctors in cmd[2]:
            if not isinstance(ctors, list) or not ctors:
                raise SmtSyntaxError("datatype needs at least one constructor")
            for ctor in ctors:
                if not isinstance(ctor, list) or not ctor:
                    raise SmtSyntaxError(f"malformed constructor {ctor!r}")
                cname = self.symbol(ctor[0])
                self.declare(cname, len(ctor) - 1)
                for sel in ctor[1:]:
                    if not (isinstance(sel, list) and len(sel) == 2):
                        raise SmtSyntaxError(f"malformed selector {sel!r}")
                    self.sort(sel[1], new)
                    self.declare(self.symbol(sel[0]), 1)
        self.sorts.update(new)

    def declare(self, name: str, arity: int):
        if name in self.funs:
            raise SmtSyntaxError(f"symbol {name} declared twice")
        self.funs[name] = arity

    def run(self, cmds) -> list:
        asserts = 0
        checked = False
        for cmd in cmds:
            if not isinstance(cmd, list) or not cmd or isinstance(cmd[0], list):
                raise SmtSyntaxError(f"expected a command, found {cmd!r}")
            head = cmd[0]
            if head not in COMMANDS:
                raise SmtSyntaxError(f"unknown command {head!r}")
            if checked and head not in ("get-model", "exit"):
                raise SmtSyntaxError(f"{head} after check-sat")
            if head in ("declare-datatypes",):
                self.datatypes(cmd)
            elif head == "declare-datatype":
                self.datatypes([head, [[cmd[1], Atom("0")]], [cmd[2]]])
            elif head == "declare-const":
                self.sort(cmd[2])
                self.declare(self.symbol(cmd[1]), 0)
            elif head == "declare-fun":
                for s in cmd[2]:
                    self.sort(s)
                self.sort(cmd[3])
                self.declare(self.symbol(cmd[1]), len(cmd[2]))
            elif head in ("define-fun", "define-fun-rec"):
                if len(cmd) != 5:
                    raise SmtSyntaxError(f"malformed {head}")
                name = self.symbol(cmd[1])
                params = self.sorted_vars(cmd[2])
                self.sort(cmd[3])
                if head == "define-fun-rec":
                    self.declare(name, len(params))
                self.term(cmd[4], frozenset(params))
                if head == "define-fun":
                    self.declare(name, len(params))
            elif head == "assert":
                if len(cmd) != 2:
                    raise SmtSyntaxError("assert takes one term")
                self.term(cmd[1], frozenset())
                asserts += 1
            elif head == "check-sat":
                if asserts != 1:
                    raise SmtSyntaxError(f"expected exactly one assert, found {asserts}")
                checked = True
        if not checked:
            raise SmtSyntaxError("missing check-sat")
        return cmds


def validate(text: str) -> list:
    """Parse and check ``text``; raises :class:`SmtSyntaxError` on the first problem."""
    return _Checker().run(parse_sexprs(text))
