"""A small arithmetic expression language over the variables x, s and y.

Grammar, loosest binding first::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?          # right associative
    primary := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``0.5``.  Evaluation goes through
numpy ufuncs, so bindings may be scalars or arrays; domain violations such
as ``ln(0)`` come back as non-finite values rather than exceptions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

VARIABLES = ("x", "s", "y")

FUNCTIONS = {
    "ln": np.log,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
}

_BINARY = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


class ExpressionError(ValueError):
    """Raised for malformed expressions; `offset` is a byte offset into the text."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            # skip leading whitespace to report the offending character
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(
                f"unexpected character {text[bad]!r}",
                len(text[:bad].encode("utf-8")),
            )
        kind = m.lastgroup
        start = len(text[: m.start(kind)].encode("utf-8"))
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r}, found {what}", off)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {val!r}", off)
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
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}", off)
                self.take()
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ExpressionError(
                        f"{val}() takes exactly one argument", self.peek()[2]
                    )
                self.expect(")")
                return Call(val, arg)
            if val in FUNCTIONS:
                raise ExpressionError(f"function {val!r} needs an argument", off)
            if val not in VARIABLES:
                raise ExpressionError(f"unknown identifier {val!r}", off)
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionError(f"unexpected {what}", off)


def parse_expression(text: str) -> Expr:
    """Parse `text` into an expression tree.

    >>> eval_expression(parse_expression("2+3*4"), {})
    14.0
    """
    return _Parser(text).parse()


def variables(node: Expr) -> set:
    """Names of the variables referenced by `node`."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return variables(node.operand if isinstance(node, Neg) else node.arg)
    return variables(node.left) | variables(node.right)


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise KeyError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, env))
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, env))
    return _BINARY[node.op](_eval(node.left, env), _eval(node.right, env))


def eval_expression(node: Expr, bindings: dict):
    """Evaluate `node`; array bindings broadcast.  Scalars come back as float."""
    env = {k: np.asarray(v, dtype=float) if not np.isscalar(v) else float(v)
           for k, v in bindings.items()}
    with np.errstate(all="ignore"):
        value = _eval(node, env)
    if np.ndim(value) == 0:
        return float(value)
    return value


def to_text(node: Expr) -> str:
    """Fully parenthesised rendering that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
