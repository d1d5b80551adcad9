"""Recursive-descent / precedence-climbing parser for Essence'.

Binary operator precedence (higher binds tighter, all left-associative except
`**` which is right-associative):

    **                                    18
    * / %                                 10
    intersect                              2
    union + -                              1
    = != <= < >= > lex-compares in         0
    /\\                                    -1
    \\/                                    -2
    -> <->                                 -4

Unary `!` and the |x| absolute value bind at 20, unary minus at 15 (so
`-2**2**3` is -(2**(2**3))). Quantifier bodies extend as far right as
precedence -10 allows; the comma that separates constraints binds lower than
everything and is handled structurally, never as an operator.

Keywords recognized by context only (they are legal identifiers elsewhere):
`matrix indexed by ... of`, `be domain`, `minimising`, `maximising`,
`branching on`, `heuristic`.
"""

from __future__ import annotations

from .ast_nodes import (
    SLICE_ALL,
    BinOp,
    BoolLit,
    BranchingOn,
    Call,
    Comprehension,
    DomItem,
    DomainBoolAtom,
    DomainIntAtom,
    DomainMatrix,
    Find,
    Generator,
    Given,
    Heuristic,
    Ident,
    IntLit,
    LangHeader,
    LettingDomain,
    LettingValue,
    MatrixLit,
    Model,
    Node,
    Objective,
    Quantifier,
    Statement,
    Subscript,
    SuchThat,
    UnaryOp,
    Where,
)
from .errors import ParseError
from .lexer import KIND_EOF, KIND_IDENT, KIND_INT, KIND_KEYWORD, KIND_OP, Token, tokenize

BINOP_PREC = {
    "**": 18,
    "*": 10,
    "/": 10,
    "%": 10,
    "intersect": 2,
    "union": 1,
    "+": 1,
    "-": 1,
    "=": 0,
    "!=": 0,
    "<=": 0,
    "<": 0,
    ">=": 0,
    ">": 0,
    "<=lex": 0,
    "<lex": 0,
    ">=lex": 0,
    ">lex": 0,
    "in": 0,
}
BINOP_PREC["/\\"] = -1
BINOP_PREC["\\/"] = -2
BINOP_PREC["->"] = -4
BINOP_PREC["<->"] = -4

RIGHT_ASSOC = frozenset(["**"])

QUANTIFIER_BODY_PREC = -10
NEG_OPERAND_PREC = 16  # one above unary minus's 15: absorbs ** only
NOT_OPERAND_PREC = 21  # one above 20: absorbs nothing, atom only
LOWEST = -19  # everything except the structural comma

QUANTIFIER_KINDS = {"forall": "forAll", "forAll": "forAll", "exists": "exists", "sum": "sum"}
HEURISTIC_NAMES = ("static", "sdf", "conflict", "srf")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- cursor helpers ----------------------------------------------------

    def _current(self) -> Token:
        return self.tokens[self.pos]

    def _peek(self, offset: int = 1) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def _advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != KIND_EOF:
            self.pos += 1
        return tok

    def _at_op(self, text: str) -> bool:
        tok = self._current()
        return tok.kind == KIND_OP and tok.text == text

    def _at_keyword(self, text: str) -> bool:
        tok = self._current()
        return tok.kind == KIND_KEYWORD and tok.text == text

    def _at_ident(self, text: str) -> bool:
        tok = self._current()
        return tok.kind == KIND_IDENT and tok.text == text

    def _match_op(self, text: str) -> bool:
        if self._at_op(text):
            self._advance()
            return True
        return False

    def _expect_op(self, text: str) -> Token:
        tok = self._current()
        if tok.kind != KIND_OP or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return self._advance()

    def _expect_keyword(self, text: str) -> Token:
        tok = self._current()
        if tok.kind != KIND_KEYWORD or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return self._advance()

    def _expect_ident_text(self, text: str) -> Token:
        tok = self._current()
        if tok.kind != KIND_IDENT or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return self._advance()

    def _expect_name(self) -> Token:
        tok = self._current()
        if tok.kind != KIND_IDENT:
            if tok.kind == KIND_KEYWORD:
                raise ParseError(f"reserved word {tok.text!r} cannot be an identifier", tok.line, tok.col)
            raise ParseError(f"expected identifier, found {tok.text!r}", tok.line, tok.col)
        return self._advance()

    def _expect_int(self) -> Token:
        tok = self._current()
        if tok.kind != KIND_INT:
            raise ParseError(f"expected integer, found {tok.text!r}", tok.line, tok.col)
        return self._advance()

    # -- expressions -------------------------------------------------------

    def parse_expr(self, min_prec: int = LOWEST) -> Node:
        left = self._parse_atom()
        while True:
            tok = self._current()
            if tok.kind not in (KIND_OP, KIND_KEYWORD):
                break
            prec = BINOP_PREC.get(tok.text)
            if prec is None or prec < min_prec:
                break
            self._advance()
            next_min = prec if tok.text in RIGHT_ASSOC else prec + 1
            right = self.parse_expr(next_min)
            left = BinOp(tok.line, tok.col, tok.text, left, right)
        return left

    def _parse_atom(self) -> Node:
        tok = self._current()
        if tok.kind == KIND_INT:
            self._advance()
            return self._postfix(IntLit(tok.line, tok.col, tok.value))
        if tok.kind == KIND_OP:
            if tok.text == "-":
                self._advance()
                operand = self.parse_expr(NEG_OPERAND_PREC)
                return UnaryOp(tok.line, tok.col, "-", operand)
            if tok.text == "!":
                self._advance()
                operand = self.parse_expr(NOT_OPERAND_PREC)
                return UnaryOp(tok.line, tok.col, "!", operand)
            if tok.text == "|":
                self._advance()
                inner = self.parse_expr(LOWEST)
                self._expect_op("|")
                return self._postfix(UnaryOp(tok.line, tok.col, "abs", inner))
            if tok.text == "(":
                self._advance()
                inner = self.parse_expr(LOWEST)
                self._expect_op(")")
                return self._postfix(inner)
            if tok.text == "[":
                return self._postfix(self._parse_bracket())
        if tok.kind == KIND_KEYWORD:
            if tok.text == "true":
                self._advance()
                return BoolLit(tok.line, tok.col, True)
            if tok.text == "false":
                self._advance()
                return BoolLit(tok.line, tok.col, False)
            if tok.text in QUANTIFIER_KINDS:
                # `sum(` is the matrix function, not the quantifier
                if tok.text == "sum" and self._peek().kind == KIND_OP and self._peek().text == "(":
                    self._advance()
                    return self._postfix(self._parse_call("sum", tok))
                return self._parse_quantifier()
            if tok.text == "int":
                return self._parse_int_domain()
            if tok.text == "bool":
                self._advance()
                return DomainBoolAtom(tok.line, tok.col)
        if tok.kind == KIND_IDENT:
            if tok.text == "matrix" and self._peek().kind == KIND_IDENT and self._peek().text == "indexed":
                return self._parse_matrix_domain()
            self._advance()
            if self._at_op("("):
                return self._postfix(self._parse_call(tok.text, tok))
            return self._postfix(Ident(tok.line, tok.col, tok.text))
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    def _postfix(self, base: Node) -> Node:
        while self._at_op("["):
            tok = self._advance()
            items = []
            while True:
                if self._at_op(".."):
                    self._advance()
                    items.append(SLICE_ALL)
                else:
                    items.append(self.parse_expr(LOWEST))
                if not self._match_op(","):
                    break
            self._expect_op("]")
            base = Subscript(tok.line, tok.col, base, items)
        return base

    def _parse_call(self, name: str, tok: Token) -> Node:
        self._expect_op("(")
        args = []
        if not self._at_op(")"):
            while True:
                args.append(self.parse_expr(LOWEST))
                if not self._match_op(","):
                    break
        self._expect_op(")")
        return Call(tok.line, tok.col, name, args)

    def _parse_quantifier(self) -> Node:
        tok = self._advance()
        kind = QUANTIFIER_KINDS[tok.text]
        names = [self._expect_name().text]
        while self._match_op(","):
            names.append(self._expect_name().text)
        self._expect_op(":")
        domain = self.parse_domain()
        self._expect_op(".")
        body = self.parse_expr(QUANTIFIER_BODY_PREC)
        return Quantifier(tok.line, tok.col, kind, names, domain, body)

    def _parse_bracket(self) -> Node:
        """Matrix literal `[a, b ; dom]` or comprehension `[e | gens ; dom]`."""
        tok = self._expect_op("[")
        if self._at_op("]") or self._at_op(";"):
            elements: list[Node] = []
            index_dom = None
            if self._match_op(";"):
                index_dom = self.parse_domain()
            self._expect_op("]")
            return MatrixLit(tok.line, tok.col, elements, index_dom)
        first = self.parse_expr(LOWEST)
        if self._at_op("|"):
            self._advance()
            return self._parse_comprehension_tail(tok, first)
        elements = [first]
        while self._match_op(","):
            elements.append(self.parse_expr(LOWEST))
        index_dom = None
        if self._match_op(";"):
            index_dom = self.parse_domain()
        self._expect_op("]")
        return MatrixLit(tok.line, tok.col, elements, index_dom)

    def _try_generator_names(self) -> list[str] | None:
        """Consume `name (, name)* :` when the upcoming tokens form generator
        names, else consume nothing. A bare identifier before a `name :` pair
        reads as part of the same generator, not as a condition."""
        i = self.pos
        names: list[str] = []
        while True:
            t = self.tokens[i]
            if t.kind != KIND_IDENT:
                return None
            names.append(t.text)
            i += 1
            nxt = self.tokens[i]
            if nxt.kind == KIND_OP and nxt.text == ":":
                self.pos = i + 1
                return names
            if nxt.kind == KIND_OP and nxt.text == ",":
                i += 1
                continue
            return None

    def _parse_comprehension_tail(self, tok: Token, head: Node) -> Node:
        generators: list[Generator] = []
        conditions: list[Node] = []
        while True:
            names = self._try_generator_names()
            if names is not None:
                generators.append(Generator(names, self.parse_domain()))
            else:
                conditions.append(self.parse_expr(LOWEST))
            if not self._match_op(","):
                break
        index_dom = None
        if self._match_op(";"):
            index_dom = self.parse_domain()
        self._expect_op("]")
        return Comprehension(tok.line, tok.col, head, generators, conditions, index_dom)

    # -- domains -----------------------------------------------------------

    def parse_domain(self) -> Node:
        """Domains combine with union/intersect/- only, so min precedence 1
        keeps comparisons and everything looser out."""
        return self.parse_expr(1)

    def _parse_int_domain(self) -> Node:
        tok = self._expect_keyword("int")
        if not self._at_op("("):
            return DomainIntAtom(tok.line, tok.col, None)
        self._advance()
        items: list[DomItem] = []
        if not self._at_op(")"):
            while True:
                items.append(self._parse_dom_item())
                if not self._match_op(","):
                    break
        self._expect_op(")")
        return DomainIntAtom(tok.line, tok.col, items)

    def _parse_dom_item(self) -> DomItem:
        if self._match_op(".."):
            hi = self.parse_expr(1)
            return DomItem(None, hi, True)
        lo = self.parse_expr(1)
        if self._match_op(".."):
            if self._at_op(")") or self._at_op(","):
                return DomItem(lo, None, True)
            hi = self.parse_expr(1)
            return DomItem(lo, hi, True)
        return DomItem(lo, None, False)

    def _parse_matrix_domain(self) -> Node:
        tok = self._expect_ident_text("matrix")
        self._expect_ident_text("indexed")
        self._expect_ident_text("by")
        self._expect_op("[")
        index_doms = [self.parse_domain()]
        while self._match_op(","):
            index_doms.append(self.parse_domain())
        self._expect_op("]")
        self._expect_ident_text("of")
        base = self.parse_domain()
        return DomainMatrix(tok.line, tok.col, index_doms, base)

    # -- statements ----------------------------------------------------------

    def parse_model(self) -> Model:
        statements: list[Statement] = [self._parse_header()]
        while self._current().kind != KIND_EOF:
            statements.append(self._parse_statement())
        return Model(statements)

    def _parse_header(self) -> LangHeader:
        tok = self._current()
        if not self._at_keyword("language"):
            raise ParseError("file must start with the language header", tok.line, tok.col)
        self._advance()
        self._expect_ident_text("ESSENCE")
        self._expect_op("'")
        major = self._expect_int().value
        self._expect_op(".")
        minor = self._expect_int().value
        return LangHeader(tok.line, tok.col, major, minor)

    def _parse_statement(self) -> Statement:
        tok = self._current()
        if self._at_keyword("given"):
            self._advance()
            names = self._parse_name_list()
            self._expect_op(":")
            return Given(tok.line, tok.col, names, self.parse_domain())
        if self._at_keyword("letting"):
            self._advance()
            name = self._expect_name().text
            if self._at_ident("be"):
                self._advance()
                self._expect_ident_text("domain")
                return LettingDomain(tok.line, tok.col, name, self.parse_domain())
            if self._match_op(":"):
                domain = self.parse_domain()
                self._expect_op("=")
                return LettingValue(tok.line, tok.col, name, domain, self.parse_expr(LOWEST))
            self._expect_op("=")
            return LettingValue(tok.line, tok.col, name, None, self.parse_expr(LOWEST))
        if self._at_keyword("find"):
            self._advance()
            names = self._parse_name_list()
            self._expect_op(":")
            return Find(tok.line, tok.col, names, self.parse_domain())
        if self._at_keyword("where"):
            self._advance()
            return Where(tok.line, tok.col, self.parse_expr(LOWEST))
        if self._at_keyword("such"):
            self._advance()
            self._expect_keyword("that")
            constraints = [self.parse_expr(LOWEST)]
            while self._match_op(","):
                constraints.append(self.parse_expr(LOWEST))
            return SuchThat(tok.line, tok.col, constraints)
        if self._at_ident("minimising") or self._at_ident("maximising"):
            sense = self._advance().text
            return Objective(tok.line, tok.col, sense, self.parse_expr(LOWEST))
        if self._at_ident("branching"):
            self._advance()
            self._expect_ident_text("on")
            self._expect_op("[")
            entries = []
            if not self._at_op("]"):
                while True:
                    entries.append(self.parse_expr(LOWEST))
                    if not self._match_op(","):
                        break
            self._expect_op("]")
            return BranchingOn(tok.line, tok.col, entries)
        if self._at_ident("heuristic"):
            self._advance()
            name_tok = self._expect_name()
            if name_tok.text not in HEURISTIC_NAMES:
                raise ParseError(
                    f"unknown heuristic {name_tok.text!r} (expected one of {', '.join(HEURISTIC_NAMES)})",
                    name_tok.line,
                    name_tok.col,
                )
            return Heuristic(tok.line, tok.col, name_tok.text)
        if self._at_keyword("language"):
            raise ParseError("duplicate language header", tok.line, tok.col)
        raise ParseError(f"unexpected token {tok.text!r} at statement start", tok.line, tok.col)

    def _parse_name_list(self) -> list[str]:
        names = [self._expect_name().text]
        while self._match_op(","):
            names.append(self._expect_name().text)
        return names

    def _expect_eof(self):
        tok = self._current()
        if tok.kind != KIND_EOF:
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)


def parse_model(text: str) -> Model:
    """Parse a .eprime model file."""
    p = _Parser(tokenize(text))
    model = p.parse_model()
    p._expect_eof()
    return model


def parse_param_file(text: str) -> Model:
    """Parse a .param file: the header plus letting-value statements only."""
    model = parse_model(text)
    for s in model.statements[1:]:
        if not isinstance(s, LettingValue):
            kind = type(s).__name__
            raise ParseError(
                f"{kind} statement not allowed in a parameter file (only letting value bindings)",
                s.line,
                s.col,
            )
    return model


def parse_expression(text: str) -> Node:
    """Parse a single expression (no trailing input)."""
    p = _Parser(tokenize(text))
    e = p.parse_expr(LOWEST)
    p._expect_eof()
    return e


def parse_domain_text(text: str) -> Node:
    """Parse a single domain expression (no trailing input)."""
    p = _Parser(tokenize(text))
    d = p.parse_domain()
    p._expect_eof()
    return d
