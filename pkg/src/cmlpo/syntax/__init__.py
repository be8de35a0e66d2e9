"""Lexing, parsing and printing of the model language."""

from .ast import *  # noqa: F401,F403
from .lexer import Token, tokenize
from .parser import parse_expression, parse_model, parse_type
from .printer import format_real, pretty_print, print_model, print_type

__all__ = ["Token", "tokenize", "parse_expression", "parse_model", "parse_type",
           "format_real", "pretty_print", "print_model", "print_type"]
