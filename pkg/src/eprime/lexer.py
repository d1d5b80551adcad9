"""Tokenizer for Essence' model and parameter files.

Tokens are produced by maximal munch: at each position the longest matching
operator wins, so `<=lex` is one token and `1..9` is INT, DOTDOT, INT.
Comments run from `$` to end of line. Integer literals must fit in a signed
64-bit word; anything larger is a lex error (the unary minus is an operator,
not part of the literal).

Reserved words can never be identifiers. Everything else that looks like a
word (`matrix`, `indexed`, `minimising`, function names like `allDiff`) is an
ordinary identifier that the parser recognizes by context.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# Appendix-style reserved word list. `forall` is accepted and normalized to
# `forAll` by the parser.
RESERVED = frozenset(
    [
        "forall",
        "forAll",
        "exists",
        "sum",
        "such",
        "that",
        "letting",
        "given",
        "where",
        "find",
        "language",
        "int",
        "bool",
        "union",
        "intersect",
        "in",
        "false",
        "true",
    ]
)

# Longest first so maximal munch is a simple linear scan.
OPERATORS = [
    "<=lex",
    ">=lex",
    "<lex",
    ">lex",
    "<->",
    "!=",
    "<=",
    ">=",
    "->",
    "/\\",
    "\\/",
    "**",
    "..",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "!",
    "|",
    "(",
    ")",
    "[",
    "]",
    ",",
    ";",
    ":",
    ".",
    "'",
]

KIND_INT = "int"
KIND_IDENT = "ident"
KIND_KEYWORD = "keyword"
KIND_OP = "op"
KIND_EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    value: int | None = None  # parsed payload for KIND_INT

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    """Tokenize source text, ending with a single EOF token."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "$":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            lit = text[start:i]
            value = int(lit)
            if value > INT64_MAX:
                raise LexError(f"integer literal {lit} exceeds 64-bit signed range", line, col)
            tokens.append(Token(KIND_INT, lit, line, col, value))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = KIND_KEYWORD if word in RESERVED else KIND_IDENT
            tokens.append(Token(kind, word, line, col))
            col += i - start
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token(KIND_OP, op, line, col))
                i += len(op)
                col += len(op)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token(KIND_EOF, "", line, col))
    return tokens
