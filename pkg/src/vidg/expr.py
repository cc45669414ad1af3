"""A small, total expression language for user-supplied coefficients.

Grammar (``^`` and ``**`` are right-associative powers)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | 't' | 'pi' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: exp, sin, cos, sqrt, gamma, pow(x, y), ml(mu, x).  Nothing is
ever passed to ``eval``.
"""

from __future__ import annotations

import math
import re
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .functions import constant
from .special import mittag_leffler


class ParseError(ValueError):
    def __init__(self, message: str, token: str = "", pos: int = -1):
        super().__init__(message)
        self.token = token
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^(),]))")

_FUNCS = {
    "exp": (1, np.exp),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "sqrt": (1, np.sqrt),
    "gamma": (1, gamma_fn),
    "pow": (2, np.power),
    "ml": (2, None),
}


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = text[pos:].lstrip()[:1]
            at = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {bad!r} at position {at}", bad, at)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, tok, what="unexpected token"):
        label = tok[1] if tok[0] != "end" else "end of input"
        raise ParseError(f"{what} {label!r} at position {tok[2]} in {self.text!r}", tok[1], tok[2])

    def expect(self, op):
        tok = self.take()
        if tok != ("op", op, tok[2]):
            self.fail(tok, f"expected {op!r}, got")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(self.peek())
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            inner = self.unary()
            return ("neg", inner) if tok[1] == "-" else inner
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] in ("^", "**"):
            self.take()
            node = ("^", node, self.unary())
        return node

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return ("const", float(val))
        if kind == "name":
            if val == "t":
                return ("t",)
            if val == "pi":
                return ("const", math.pi)
            if val in _FUNCS:
                arity = _FUNCS[val][0]
                self.expect("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                if len(args) != arity:
                    self.fail(tok, f"function takes {arity} argument(s):")
                self.expect(")")
                return ("call", val, args)
            self.fail(tok, "unknown name")
        if tok[:2] == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail(tok)


def _depends_on_t(node) -> bool:
    if node[0] == "t":
        return True
    if node[0] == "const":
        return False
    if node[0] == "call":
        return any(_depends_on_t(a) for a in node[2])
    return any(_depends_on_t(a) for a in node[1:])


def _build(node) -> Callable:
    kind = node[0]
    if kind == "const":
        v = node[1]
        return lambda t: v
    if kind == "t":
        return lambda t: t
    if kind == "neg":
        f = _build(node[1])
        return lambda t: -f(t)
    if kind == "call":
        name, args = node[1], node[2]
        fs = [_build(a) for a in args]
        if name == "ml":
            if _depends_on_t(args[0]):
                raise ParseError("ml(mu, x) needs a constant mu", "ml")
            mu = float(fs[0](0.0))
            return lambda t: mittag_leffler(mu, fs[1](t))
        fn = _FUNCS[name][1]
        return lambda t: fn(*(f(t) for f in fs))
    op, lhs, rhs = kind, _build(node[1]), _build(node[2])
    if op == "+":
        return lambda t: lhs(t) + rhs(t)
    if op == "-":
        return lambda t: lhs(t) - rhs(t)
    if op == "*":
        return lambda t: lhs(t) * rhs(t)
    if op == "/":
        return lambda t: lhs(t) / rhs(t)
    return lambda t: np.power(lhs(t), rhs(t))


def compile_expr(text) -> Callable:
    """Vectorized function of t; t-free expressions become :func:`constant`."""
    if isinstance(text, (int, float)):
        return constant(float(text))
    if not isinstance(text, str):
        raise ParseError(f"expression must be a string or number, got {type(text).__name__}")
    tree = _Parser(text).parse()
    fn = _build(tree)
    if not _depends_on_t(tree):
        return constant(float(fn(0.0)))

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape).copy()

    f.source = text
    return f
