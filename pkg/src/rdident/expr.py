"""A small arithmetic expression language for user-supplied functions.

Grammar (``^`` is right associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are the variables u, v, w, x, t and the constants pi and e.
Expressions evaluate elementwise on numpy arrays and can be differentiated
symbolically with respect to any variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

VARIABLES = ("u", "v", "w", "x", "t")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": (1, np.sin), "cos": (1, np.cos), "exp": (1, np.exp), "atan": (1, np.arctan),
    "sqrt": (1, np.sqrt), "abs": (1, np.abs), "max": (2, np.maximum), "min": (2, np.minimum),
}


class ExprError(ValueError):
    """Malformed expression; ``pos`` is the 0-based character offset."""

    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} at column {pos + 1}")


# ---------------------------------------------------------------- nodes

class Node:
    def variables(self) -> set:
        return set().union(*(c.variables() for c in self.children())) if self.children() else set()

    def children(self):
        return ()


@dataclass(frozen=True)
class Num(Node):
    value: float

    def eval(self, env):
        return self.value

    def diff(self, var):
        return ZERO

    def __str__(self):
        return repr(self.value) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True)
class Var(Node):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ExprError(f"variable {self.name!r} is not available here") from None

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


ZERO, ONE = Num(0.0), Num(1.0)


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return np.power(a, b)

    def diff(self, var):
        a, b = self.left, self.right
        da, db = a.diff(var), b.diff(var)
        if self.op in "+-":
            return binop(self.op, da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        if self.op == "/":
            return div(sub(mul(da, b), mul(a, db)), mul(b, b))
        if isinstance(b, Num):
            return mul(mul(b, pow_(a, Num(b.value - 1.0))), da)
        # general a^b = exp(b log a); only valid for a > 0
        return mul(self, add(mul(db, Call("log", (a,))), div(mul(b, da), a)))

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def eval(self, env):
        return -self.arg.eval(env)

    def diff(self, var):
        d = self.arg.diff(var)
        return ZERO if d == ZERO else Neg(d)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple

    def children(self):
        return self.args

    def eval(self, env):
        vals = [a.eval(env) for a in self.args]
        if self.name == "log":
            return np.log(vals[0])
        if self.name == "step":  # Heaviside, used by derivatives of max/min/abs
            return np.where(np.asarray(vals[0]) > 0, 1.0, 0.0)
        return FUNCTIONS[self.name][1](*vals)

    def diff(self, var):
        name, args = self.name, self.args
        if name in ("step",):
            return ZERO
        if name in ("max", "min"):
            a, b = args
            sel = Call("step", (sub(a, b) if name == "max" else sub(b, a),))
            return add(mul(sel, a.diff(var)), mul(sub(ONE, sel), b.diff(var)))
        (a,) = args
        da = a.diff(var)
        if da == ZERO:
            return ZERO
        outer = {
            "sin": lambda: Call("cos", (a,)),
            "cos": lambda: Neg(Call("sin", (a,))),
            "exp": lambda: self,
            "atan": lambda: div(ONE, add(ONE, mul(a, a))),
            "sqrt": lambda: div(Num(0.5), self),
            "abs": lambda: sub(mul(Num(2.0), Call("step", (a,))), ONE),
            "log": lambda: div(ONE, a),
        }[name]()
        return mul(outer, da)

    def __str__(self):
        return f"{self.name}({', '.join(map(str, self.args))})"


# light constant folding keeps derivative trees small
def binop(op, a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(float(BinOp(op, a, b).eval({})))
    return BinOp(op, a, b)


def add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return binop("+", a, b)


def sub(a, b):
    if b == ZERO:
        return a
    if a == ZERO:
        return Neg(b)
    return binop("-", a, b)


def mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return binop("*", a, b)


def div(a, b):
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return binop("/", a, b)


def pow_(a, b):
    if b == ONE:
        return a
    if b == ZERO:
        return ONE
    return binop("^", a, b)


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^(),]))")


def tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text) - len(text[pos:].lstrip()) if pos < len(text) else pos
            raise ExprError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        tok = m.group(m.lastindex)
        out.append((kind, "^" if tok == "**" else tok, start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise ExprError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise ExprError(f"unknown function {val!r}", pos)
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                arity = FUNCTIONS[val][0]
                if len(args) != arity:
                    raise ExprError(f"{val} takes {arity} argument(s), got {len(args)}", pos)
                return Call(val, tuple(args))
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            if val in VARIABLES:
                return Var(val)
            raise ExprError(f"unknown name {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ExprError(f"unexpected {val or 'end of input'!r}", pos)


@dataclass(frozen=True)
class Expression:
    """Parsed expression with its source text."""

    text: str
    tree: Node

    def __call__(self, **env):
        return self.tree.eval({k: np.asarray(v, dtype=float) for k, v in env.items()})

    def derivative(self, var: str) -> "Expression":
        return Expression(f"d/d{var}[{self.text}]", self.tree.diff(var))

    @property
    def variables(self) -> set:
        return self.tree.variables()


def parse(text) -> Expression:
    """Parse ``text``; numbers are accepted as constant expressions."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return Expression(repr(float(text)), Num(float(text)))
    if not isinstance(text, str) or not text.strip():
        raise ExprError("expression must be a non-empty string")
    return Expression(text, _Parser(text).parse())
