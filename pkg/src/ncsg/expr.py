"""A small expression language for real-valued functions on the group.

Grammar (``^`` binds tightest and is right-associative; unary minus sits
between ``^`` and ``* /``, so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is allowed)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'pi' | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := cos | sin | exp | sqrt | abs

Names are the coordinate functions of the group (``x1 .. xn`` on the torus;
``alpha beta gamma qw qx qy qz`` on SU(2)) or, for multiplier expressions,
the dual variables (``w``, ``lam2``, ``d``, ``k1 .. kn`` / ``ell``).
Positions in error messages are 1-based columns.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError

FUNCS = ("cos", "sin", "exp", "sqrt", "abs")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = 0


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    pos: int = 0


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind) + 1
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            _, _, pos = self.take()
            return BinOp("^", base, self.unary(), pos)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg, pos)
            if val == "pi":
                return Const("pi")
            if self.names is not None and val not in self.names:
                raise ExprSyntaxError(f"unknown identifier {val!r}", pos)
            return Var(val, pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse_expr(text: str, names=None):
    """Parse ``text``; if ``names`` is given, unknown identifiers are rejected."""
    return _Parser(text, None if names is None else set(names)).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def to_text(node) -> str:
    """Canonical text; ``parse_expr(to_text(ast)) == ast`` up to positions."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return f"(-({to_text(node.arg)}))"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


def strip_positions(node):
    """The AST with all source positions zeroed, for structural comparison."""
    if isinstance(node, Var):
        return Var(node.name)
    if isinstance(node, Neg):
        return Neg(strip_positions(node.arg))
    if isinstance(node, Call):
        return Call(node.func, strip_positions(node.arg))
    if isinstance(node, BinOp):
        return BinOp(node.op, strip_positions(node.left), strip_positions(node.right))
    return node


def variables(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set()


def evaluate(node, env):
    """Evaluate vectorized over numpy arrays in ``env``; guards raise :class:`DomainError`."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return math.pi
    if isinstance(node, Var):
        if node.name not in env:
            raise DomainError(f"unknown identifier {node.name!r} at position {node.pos}")
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        if node.func == "sqrt":
            if np.any(np.asarray(arg) < 0):
                raise DomainError(f"sqrt of a negative value at position {node.pos}")
            return np.sqrt(arg)
        return getattr(np, node.func)(arg)
    left = evaluate(node.left, env)
    right = evaluate(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise DomainError(f"division by zero at position {node.pos}")
        return left / right
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.power(np.asarray(left, dtype=float), right)
    if not np.all(np.isfinite(out)):
        raise DomainError(f"power is undefined at position {node.pos}")
    return out
