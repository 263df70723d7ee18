"""Front end: lexing, parsing and lowering to the canonical form."""

from .lexer import Token, lex
from .lower import (
    CanonicalProgram,
    CanonicalStmt,
    analyze,
    canonicalize,
    canonicalize_source,
    emit,
    parse_canonical,
    user_identifiers,
)
from .parser import Node, parse
from .unpack import unpack

__all__ = [
    "CanonicalProgram",
    "CanonicalStmt",
    "Node",
    "Token",
    "analyze",
    "canonicalize",
    "canonicalize_source",
    "emit",
    "lex",
    "parse",
    "parse_canonical",
    "unpack",
    "user_identifiers",
]
