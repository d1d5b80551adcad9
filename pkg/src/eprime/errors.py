"""Error types raised by the toolchain.

Every error carries a source position when one is known. The CLI maps any
EssenceError to exit code 2; everything else is a bug.
"""

from __future__ import annotations


class EssenceError(Exception):
    """Base class for all user-facing errors."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.message} (line {self.line}, column {self.col})"
        return self.message


class LexError(EssenceError):
    """Bad character, malformed token, or out-of-range integer literal."""


class ParseError(EssenceError):
    """Token stream does not match the grammar."""


class TypeCheckError(EssenceError):
    """Type or category rule violation."""


class InstanceError(EssenceError):
    """Parameter binding, letting evaluation, or where-clause failure."""


class EvalError(EssenceError):
    """Hard evaluation failure: 64-bit overflow, enumeration over an open
    domain, or a structural error such as an index-domain cardinality
    mismatch. Distinct from UNDEFINED, which is a value, not an error."""


class ExpandError(EssenceError):
    """Failure while unrolling a model into a flat CSP."""


class SolverError(EssenceError):
    """Internal solver failure (a found solution failing verification)."""
