"""Recursive-descent parser for the identity language.

Grammar (whitespace insignificant, variables are single identifiers):

    identity := expr "=" expr
    expr     := term (("+"|"-") term)*
    term     := factor ("*" factor)*
    factor   := base ("^" UINT)?
    base     := "F" "[" index "]" | "L" "[" index "]"
              | "G" "(" rat "," rat ")" "[" index "]"
              | "(-1)" "^" "(" index ")" | rat | "(" expr ")"
              | "sum" "(" VAR "=" INT ".." index "," expr ")"
    index    := INT | VAR | INT "*" VAR | index ("+"|"-") index
    rat      := INT ("/" UINT)?

Printing an AST produced by this parser and reparsing it yields the same
tree, and printing is idempotent on the printed text.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .expr import (
    Add,
    Const,
    Expr,
    ExprError,
    Fib,
    GenFib,
    Identity,
    LinearIndex,
    Luc,
    Mul,
    Pow,
    SignPow,
    Sub,
    Sum,
    free_vars,
)

RESERVED = {"F", "L", "G", "sum"}

_SYMBOLS = ("..", "+", "-", "*", "^", "/", "=", "(", ")", "[", "]", ",")


class ParseError(ValueError):
    """Syntax error with source position and the set of expected tokens."""

    def __init__(self, message: str, line: int, column: int, expected: Sequence[str] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        suffix = ""
        if self.expected:
            suffix = " (expected: " + ", ".join(self.expected) + ")"
        super().__init__(f"{message} at line {line}, column {column}{suffix}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'int', 'ident', 'sym', 'eof'
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], variables: Optional[Sequence[str]]):
        self.tokens = tokens
        self.pos = 0
        self.allowed_vars = set(variables) if variables is not None else None

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_sym(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t.kind == "sym" and t.text == text

    def expect_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            self.fail(f"'{text}'")
        return self.advance()

    def fail(self, *expected: str) -> None:
        t = self.peek()
        shown = t.text if t.kind != "eof" else "end of input"
        raise ParseError(f"unexpected {shown!r}", t.line, t.column, expected)

    # -- grammar -----------------------------------------------------------

    def parse_identity(self) -> Identity:
        lhs = self.parse_expr()
        self.expect_sym("=")
        rhs = self.parse_expr()
        self.expect_eof()
        return self.make_identity(lhs, rhs)

    def make_identity(self, lhs: Expr, rhs: Expr, name: str = "") -> Identity:
        if self.allowed_vars is not None:
            variables = tuple(self.declared_order)
        else:
            variables = tuple(self.appearance_order(lhs, rhs))
        return Identity(name, variables, lhs, rhs)

    def appearance_order(self, *exprs: Expr) -> list[str]:
        seen: list[str] = []
        for v in self.var_appearances:
            occurring = frozenset().union(*(free_vars(e) for e in exprs))
            if v in occurring and v not in seen:
                seen.append(v)
        return seen

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            rhs = self.parse_term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.at_sym("*"):
            self.advance()
            node = Mul(node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        base = self.parse_base()
        if self.at_sym("^"):
            self.advance()
            tok = self.peek()
            if tok.kind != "int":
                self.fail("nonnegative integer exponent")
            self.advance()
            return Pow(base, int(tok.text))
        return base

    def parse_base(self) -> Expr:
        tok = self.peek()
        if tok.kind == "ident":
            if tok.text == "F" and self.at_sym("[", 1):
                self.advance()
                return Fib(self.parse_bracketed_index())
            if tok.text == "L" and self.at_sym("[", 1):
                self.advance()
                return Luc(self.parse_bracketed_index())
            if tok.text == "G" and self.at_sym("(", 1):
                self.advance()
                self.expect_sym("(")
                s0 = self.parse_rat()
                self.expect_sym(",")
                s1 = self.parse_rat()
                self.expect_sym(")")
                return GenFib(s0, s1, self.parse_bracketed_index())
            if tok.text == "sum" and self.at_sym("(", 1):
                return self.parse_sum()
            self.fail("'F['", "'L['", "'G('", "'sum('", "number", "'('")
        if tok.kind == "sym" and tok.text == "(":
            if self.is_sign_power():
                return self.parse_sign_power()
            self.advance()
            inner = self.parse_expr()
            self.expect_sym(")")
            return inner
        if tok.kind == "int" or (tok.kind == "sym" and tok.text == "-"):
            return Const(self.parse_rat())
        self.fail("'F['", "'L['", "'G('", "'sum('", "'(-1)^('", "number", "'('", "'sum'")

    def is_sign_power(self) -> bool:
        return (
            self.at_sym("(", 0)
            and self.at_sym("-", 1)
            and self.peek(2).kind == "int"
            and self.peek(2).text == "1"
            and self.at_sym(")", 3)
            and self.at_sym("^", 4)
            and self.at_sym("(", 5)
        )

    def parse_sign_power(self) -> Expr:
        for _ in range(5):  # consume ( - 1 ) ^
            self.advance()
        self.expect_sym("(")
        index = self.parse_index()
        self.expect_sym(")")
        return SignPow(index)

    def parse_sum(self) -> Expr:
        self.advance()  # 'sum'
        self.expect_sym("(")
        var_tok = self.peek()
        if var_tok.kind != "ident" or var_tok.text in RESERVED:
            self.fail("bound variable name")
        self.advance()
        self.expect_sym("=")
        lower = self.parse_int()
        self.expect_sym("..")
        upper = self.parse_index(exclude={var_tok.text})
        self.expect_sym(",")
        outer = self.bound_stack
        self.bound_stack = outer | {var_tok.text}
        body = self.parse_expr()
        self.bound_stack = outer
        self.expect_sym(")")
        try:
            return Sum(var_tok.text, lower, upper, body)
        except ExprError as exc:
            raise ParseError(str(exc), var_tok.line, var_tok.column) from exc

    def parse_int(self) -> int:
        sign = 1
        if self.at_sym("-"):
            self.advance()
            sign = -1
        tok = self.peek()
        if tok.kind != "int":
            self.fail("integer")
        self.advance()
        return sign * int(tok.text)

    def parse_rat(self) -> Fraction:
        num = self.parse_int()
        if self.at_sym("/"):
            self.advance()
            tok = self.peek()
            if tok.kind != "int":
                self.fail("positive integer denominator")
            self.advance()
            den = int(tok.text)
            if den == 0:
                raise ParseError("zero denominator", tok.line, tok.column)
            return Fraction(num, den)
        return Fraction(num)

    def parse_bracketed_index(self) -> LinearIndex:
        self.expect_sym("[")
        index = self.parse_index()
        self.expect_sym("]")
        return index

    def parse_index(self, exclude: frozenset[str] | set[str] = frozenset()) -> LinearIndex:
        offset = 0
        coeffs: dict[str, int] = {}

        def add_term(sign: int) -> None:
            nonlocal offset
            tok = self.peek()
            if tok.kind == "int":
                self.advance()
                value = int(tok.text)
                if self.at_sym("*"):
                    self.advance()
                    var = self.parse_index_var(exclude)
                    coeffs[var] = coeffs.get(var, 0) + sign * value
                else:
                    offset += sign * value
            elif tok.kind == "ident":
                var = self.parse_index_var(exclude)
                coeffs[var] = coeffs.get(var, 0) + sign
            else:
                self.fail("integer", "variable")

        sign = 1
        if self.at_sym("-"):
            self.advance()
            sign = -1
        add_term(sign)
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            add_term(1 if op == "+" else -1)
        return LinearIndex.from_dict(offset, coeffs)

    def parse_index_var(self, exclude) -> str:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail("variable")
        if tok.text in RESERVED:
            raise ParseError(
                f"'{tok.text}' is reserved and cannot be a variable",
                tok.line,
                tok.column,
            )
        if tok.text in exclude:
            raise ParseError(
                f"bound variable '{tok.text}' may not appear in its own upper bound",
                tok.line,
                tok.column,
            )
        if (
            self.allowed_vars is not None
            and tok.text not in self.allowed_vars
            and tok.text not in self.bound_stack
        ):
            raise ParseError(
                f"unknown variable '{tok.text}'", tok.line, tok.column
            )
        self.advance()
        if tok.text not in self.bound_stack and tok.text not in self.var_appearances:
            self.var_appearances.append(tok.text)
        return tok.text

    def expect_eof(self) -> None:
        if self.peek().kind != "eof":
            self.fail("end of input")

    # mutable parse state initialised in parse()
    bound_stack: frozenset[str] | set[str] = frozenset()
    var_appearances: list[str]
    declared_order: tuple[str, ...] = ()


def _prepare(text: str, variables: Optional[Sequence[str]]) -> _Parser:
    p = _Parser(tokenize(text), variables)
    p.bound_stack = set()
    p.var_appearances = []
    p.declared_order = tuple(variables) if variables is not None else ()
    return p


def parse_expression(text: str, variables: Optional[Sequence[str]] = None) -> Expr:
    p = _prepare(text, variables)
    e = p.parse_expr()
    p.expect_eof()
    return e


def parse_identity(
    text: str,
    variables: Optional[Sequence[str]] = None,
    name: str = "",
) -> Identity:
    p = _prepare(text, variables)
    lhs = p.parse_expr()
    p.expect_sym("=")
    rhs = p.parse_expr()
    p.expect_eof()
    return p.make_identity(lhs, rhs, name)


def parse(text: str, variables: Optional[Sequence[str]] = None) -> Union[Expr, Identity]:
    """Parse an identity if the text contains '=', otherwise an expression."""
    tokens = tokenize(text)
    has_eq = any(t.kind == "sym" and t.text == "=" for t in tokens)
    if has_eq:
        # 'sum(k=...)' uses '=' too; only treat top-level '=' as identity.
        depth = 0
        top_eq = False
        for t in tokens:
            if t.kind == "sym" and t.text in ("(", "["):
                depth += 1
            elif t.kind == "sym" and t.text in (")", "]"):
                depth -= 1
            elif t.kind == "sym" and t.text == "=" and depth == 0:
                top_eq = True
        if top_eq:
            return parse_identity(text, variables)
    return parse_expression(text, variables)
