"""OpenQASM 2.0 frontend: lexer, parser, macro expansion, pretty-printing."""

from .ast import Ast, SourceProgram, pretty_print
from .lexer import tokenize
from .parser import parse
from .expand import expand

__all__ = ["Ast", "SourceProgram", "tokenize", "parse", "expand", "pretty_print"]
