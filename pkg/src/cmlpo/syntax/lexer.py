"""Hand-written lexer for the model language.

Comments run from ``--`` to end of line. A ``<`` opens a quote literal when it
appears where an operand is expected (after an operator, separator or at the
start of input) and is the less-than operator otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from ..errors import LexError
from .ast import SourceSpan

KEYWORDS = frozenset({
    "types", "values", "functions", "process", "state", "operations",
    "inv", "pre", "post", "begin", "end", "forall", "exists", "and", "or",
    "not", "in set", "not in set", "set of", "card", "union", "inter", "div",
    "mod", "if", "then", "else", "true", "false", "int", "real", "bool",
    # recognised only so the parser can reject them by name
    "actions", "channels", "channel", "chansets",
})

# longest first
SYMBOLS = ("==>", "<=>", "==", "=>", "->", "::", ":=", "<>", "<=", ">=",
           ":", "=", "<", ">", "+", "-", "*", "/", "\\", "(", ")", "{", "}",
           ",", ".", "&", "|", ";", "@")

# tokens after which an operand has just finished
_OPERAND_END = {"ident", "mk_ident", "int", "real", "quote"}
_OPERAND_END_TEXT = {")", "}", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | mk_ident | int | real | quote | keyword | symbol
    value: Union[str, int, Fraction]
    span: SourceSpan

    @property
    def text(self) -> str:
        return str(self.value)

    def is_(self, kind: str, value=None) -> bool:
        return self.kind == kind and (value is None or self.value == value)


def _ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


class _Scanner:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def advance(self, n: int = 1):
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def span_from(self, line, col) -> SourceSpan:
        # end column is inclusive of the last character
        return SourceSpan(self.file, line, col, self.line, self.col - 1)

    def skip_layout(self):
        while self.pos < len(self.text):
            c = self.peek()
            if c in " \t\r\n\f":
                self.advance()
            elif c == "-" and self.peek(1) == "-":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            else:
                break

    def word_at(self, pos: int) -> tuple[str, int]:
        end = pos
        while end < len(self.text) and _ident_char(self.text[end]):
            end += 1
        return self.text[pos:end], end

    def next_word_after_layout(self, pos: int) -> tuple[str, int]:
        while pos < len(self.text) and self.text[pos] in " \t\r\n":
            pos += 1
        return self.word_at(pos)

    def operand_expected(self) -> bool:
        if not self.tokens:
            return True
        last = self.tokens[-1]
        if last.kind in _OPERAND_END:
            return False
        return last.text not in _OPERAND_END_TEXT

    def run(self) -> list[Token]:
        while True:
            self.skip_layout()
            if self.pos >= len(self.text):
                return self.tokens
            line, col = self.line, self.col
            c = self.peek()
            if c.isalpha() or c == "_":
                self.lex_word(line, col)
            elif c.isdigit():
                self.lex_number(line, col)
            elif c == "<" and self.operand_expected() and (self.peek(1).isalpha() or self.peek(1) == "_"):
                self.lex_quote(line, col)
            else:
                for sym in SYMBOLS:
                    if self.text.startswith(sym, self.pos):
                        self.advance(len(sym))
                        self.tokens.append(Token("symbol", sym, self.span_from(line, col)))
                        break
                else:
                    raise LexError(f"illegal character {c!r}",
                                   SourceSpan(self.file, line, col, line, col))

    def lex_word(self, line, col):
        word, end = self.word_at(self.pos)
        # multi-word keywords
        if word in ("in", "set", "not"):
            nxt, nxt_end = self.next_word_after_layout(end)
            if word == "in" and nxt == "set":
                word, end = "in set", nxt_end
            elif word == "set" and nxt == "of":
                word, end = "set of", nxt_end
            elif word == "not" and nxt == "in":
                third, third_end = self.next_word_after_layout(nxt_end)
                if third == "set":
                    word, end = "not in set", third_end
        self.advance(end - self.pos)
        span = self.span_from(line, col)
        if word in KEYWORDS:
            self.tokens.append(Token("keyword", word, span))
        elif word in ("in", "set", "of"):
            raise LexError(f"stray {word!r}; expected 'in set', 'not in set' or 'set of'", span)
        elif word.startswith("mk_") and len(word) > 3:
            self.tokens.append(Token("mk_ident", word[3:], span))
        else:
            self.tokens.append(Token("ident", word, span))

    def lex_number(self, line, col):
        start = self.pos
        while self.peek().isdigit():
            self.advance()
        if self.peek() == "." and self.peek(1).isdigit():
            self.advance()
            while self.peek().isdigit():
                self.advance()
            text = self.text[start:self.pos]
            self.tokens.append(Token("real", Fraction(text), self.span_from(line, col)))
        else:
            self.tokens.append(Token("int", int(self.text[start:self.pos]), self.span_from(line, col)))
        if _ident_char(self.peek()):
            raise LexError("identifier immediately after number",
                           SourceSpan(self.file, self.line, self.col, self.line, self.col))

    def lex_quote(self, line, col):
        self.advance()  # <
        name, end = self.word_at(self.pos)
        self.advance(end - self.pos)
        if self.peek() != ">":
            raise LexError(f"unterminated quote literal <{name}",
                           self.span_from(line, col))
        self.advance()
        self.tokens.append(Token("quote", name, self.span_from(line, col)))


def tokenize(text: str, file: str = "<string>") -> list[Token]:
    """Split ``text`` into tokens. Raises :class:`LexError` on bad input."""
    return _Scanner(text, file).run()
