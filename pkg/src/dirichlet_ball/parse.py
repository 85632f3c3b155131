"""Text syntax for bivariate polynomials.

Grammar (whitespace is ignored, multiplication is always explicit)::

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INTEGER)?
    atom   := NUMBER | NUMBER "i" | "(" NUMBER ("+" | "-") NUMBER "i" ")"
            | "z" | "w" | "(" expr ")"

``NUMBER`` is a decimal literal such as ``2``, ``0.5`` or ``1e-3``; a
number directly followed by ``i`` is imaginary, so ``(1-2i)`` is a complex
constant.
"""

from __future__ import annotations

import re

from .errors import ExponentNotInteger, PolySyntaxError
from .poly2 import Poly2

__all__ = ["parse_poly", "format_poly"]

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
# "(a+bi)" read as one literal so tiny parts are not pruned before they combine
_COMPLEX = re.compile(rf"\(\s*([+-]?{_NUM})\s*([+-])\s*({_NUM})\s*i\s*\)")
_OPERAND = ("number", "'z'", "'w'", "'('", "'+'", "'-'")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message, expected):
        raise PolySyntaxError(message, self.pos, expected)

    def _unexpected(self, expected):
        ch = self.peek()
        what = f"unexpected {ch!r}" if ch else "unexpected end of input"
        self.fail(what, expected)

    def parse(self):
        if not self.peek():
            self.fail("empty expression", _OPERAND)
        value = self.expr()
        if self.peek():
            self._unexpected(("'+'", "'-'", "'*'", "'^'", "end of input"))
        return value

    def expr(self):
        value = self.term()
        while self.peek() in ("+", "-") and self.peek():
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() == "*":
            self.pos += 1
            value = value * self.unary()
        return value

    def unary(self):
        ch = self.peek()
        if ch in ("+", "-") and ch:
            self.pos += 1
            operand = self.unary()
            return operand if ch == "+" else -operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() != "^":
            return base
        self.pos += 1
        self._skip()
        start = self.pos
        m = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").match(self.text, self.pos)
        if not m:
            self.fail("missing exponent", ("integer",))
        literal = m.group(0)
        if not re.fullmatch(r"\+?\d+", literal):
            raise ExponentNotInteger(f"exponent {literal!r} is not a nonnegative integer", start,
                                     ("integer",))
        self.pos = m.end()
        return base ** int(literal)

    def atom(self):
        ch = self.peek()
        m = _COMPLEX.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            imag = float(m.group(3))
            return Poly2.constant(complex(float(m.group(1)), imag if m.group(2) == "+" else -imag))
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                self._unexpected(("')'", "'+'", "'-'", "'*'", "'^'"))
            self.pos += 1
            return value
        if ch in ("z", "w"):
            self.pos += 1
            return Poly2.monomial(1, 0) if ch == "z" else Poly2.monomial(0, 1)
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            value = float(m.group(0))
            if self.pos < len(self.text) and self.text[self.pos] == "i":
                self.pos += 1
                return Poly2.constant(complex(0.0, value))
            return Poly2.constant(value)
        self._unexpected(("number", "'z'", "'w'", "'('"))


def parse_poly(text):
    """Parse ``text`` into a :class:`Poly2`.

    Raises :class:`PolySyntaxError` (a ``SyntaxError``) carrying the
    character offset and the accepted tokens, or :class:`ExponentNotInteger`.

    >>> parse_poly("1 - 2*z*w").coeffs[(1, 1)]
    (-2+0j)
    """
    return _Parser(str(text)).parse()


def format_poly(p):
    """Text form that :func:`parse_poly` maps back to exactly the same coefficients."""
    if p.is_zero():
        return "0"
    terms = []
    for (k, l), a in p.coeffs.items():
        parts = [f"({a.real!r}{'+' if a.imag >= 0 else '-'}{abs(a.imag)!r}i)"]
        if k:
            parts.append("z" if k == 1 else f"z^{k}")
        if l:
            parts.append("w" if l == 1 else f"w^{l}")
        terms.append("*".join(parts))
    return " + ".join(terms)
