"""Canonical text form of radical trees.

Grammar (whitespace ignored)::

    expr    := term ('+' term)*
    term    := factor ('*' factor)*
    factor  := unary ('/' unary)?
    unary   := '-' '(' expr ')' | '-' literal | primary
    primary := literal | 'sqrt' '(' expr ')' | '(' expr ')'
    literal := INT ('/' INT)?

``INT '/' INT`` with nothing in between is always a rational constant, so the
renderer writes a quotient of two integers as ``(p)/q``.  Sums, products,
quotients and non-integer rationals are parenthesised whenever they appear
as an operand; ``render_expr`` followed by ``parse_expr`` reproduces the tree
exactly.
"""
from __future__ import annotations

import re

from ..errors import RadicalSyntaxError
from .tree import Neg, Product, Quotient, RadicalExpr, RationalConst, Sqrt, Sum


def _is_int_const(e) -> bool:
    return isinstance(e, RationalConst) and e.is_integer


def _is_atomic(e) -> bool:
    return isinstance(e, (Sqrt, Neg)) or _is_int_const(e)


def _operand(e) -> str:
    s = render_expr(e)
    return s if _is_atomic(e) else f"({s})"


def render_expr(e: RadicalExpr) -> str:
    if isinstance(e, RationalConst):
        return str(e.numerator) if e.is_integer else f"{e.numerator}/{e.denominator}"
    if isinstance(e, Sqrt):
        return f"sqrt({render_expr(e.child)})"
    if isinstance(e, Neg):
        return f"-({render_expr(e.child)})"
    if isinstance(e, Sum):
        return " + ".join(_operand(c) for c in e.children)
    if isinstance(e, Product):
        return " * ".join(_operand(c) for c in e.children)
    if isinstance(e, Quotient):
        num = _operand(e.num)
        if _is_int_const(e.num) and _is_int_const(e.den):
            num = f"({num})"
        return f"{num}/{_operand(e.den)}"
    raise TypeError(f"not a radical expression: {e!r}")


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|(sqrt)|([()+*/-]))")


def _tokenize(s: str):
    tokens = []
    pos = 0
    while pos < len(s):
        if s[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(s, pos)
        if not m:
            start = len(s) - len(s[pos:].lstrip())
            raise RadicalSyntaxError(f"unexpected character {s[start]!r}", start)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("INT", m.group(1), start))
        elif m.group(2):
            tokens.append(("SQRT", "sqrt", start))
        else:
            tokens.append((m.group(3), m.group(3), start))
        pos = m.end()
    tokens.append(("END", "", len(s)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            want = "end of input" if kind == "END" else repr(kind)
            got = "end of input" if tok[0] == "END" else repr(tok[1])
            raise RadicalSyntaxError(f"expected {want}, found {got}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        terms = [self.term()]
        while self.peek()[0] == "+":
            self.i += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        factors = [self.factor()]
        while self.peek()[0] == "*":
            self.i += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        left = self.unary()
        if self.peek()[0] == "/":
            self.i += 1
            left = Quotient(left, self.unary())
            if self.peek()[0] == "/":
                raise RadicalSyntaxError("chained '/' is ambiguous; parenthesise", self.peek()[2])
        return left

    def unary(self):
        if self.peek()[0] == "-":
            self.i += 1
            if self.peek()[0] == "(":
                self.i += 1
                inner = self.expr()
                self.take(")")
                return Neg(inner)
            if self.peek()[0] == "INT":
                return self.literal(-1)
            tok = self.peek()
            raise RadicalSyntaxError("'-' must be followed by '(' or an integer", tok[2])
        return self.primary()

    def literal(self, sign):
        num = int(self.take("INT")[1])
        if self.peek()[0] == "/" and self.peek(1)[0] == "INT":
            self.i += 1
            tok = self.take("INT")
            den = int(tok[1])
            if den == 0:
                raise RadicalSyntaxError("zero denominator", tok[2])
            return RationalConst(sign * num, den)
        return RationalConst(sign * num)

    def primary(self):
        kind, _, pos = self.peek()
        if kind == "INT":
            return self.literal(1)
        if kind == "SQRT":
            self.i += 1
            self.take("(")
            inner = self.expr()
            self.take(")")
            return Sqrt(inner)
        if kind == "(":
            self.i += 1
            inner = self.expr()
            self.take(")")
            return inner
        found = "end of input" if kind == "END" else repr(self.peek()[1])
        raise RadicalSyntaxError(f"unexpected {found}", pos)


def parse_expr(s: str) -> RadicalExpr:
    """Inverse of :func:`render_expr`.

    Raises RadicalSyntaxError (with a character position) on malformed text and
    IntervalCheckError when the parsed tree breaks a node invariant, e.g.
    ``sqrt(-1)``.
    """
    parser = _Parser(s)
    e = parser.expr()
    parser.take("END")
    return e
