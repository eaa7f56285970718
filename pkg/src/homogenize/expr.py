"""Small arithmetic expression language for coefficient fields and charts.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-2^2 == -4`` and ``2^3^2 == 512``.  Evaluation is vectorised: bindings may
be floats or numpy arrays that broadcast against each other.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

VARIABLES = ("X1", "X2", "Y1", "Y2", "ETA")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

Number = Union[float, np.ndarray]


class ExprError(ValueError):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected: str | None = None):
        self.offset = offset
        self.expected = expected
        text = f"{message} at byte {offset}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset)


class UnboundVariableError(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name} is not bound")


class DomainError(ExprError):
    def __init__(self, message: str, node: "Expr"):
        self.node = node
        super().__init__(f"{message} in {to_string(node)!r}")


# -- AST ---------------------------------------------------------------------
# ``offset`` is excluded from equality so that re-parsed trees compare equal.

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    offset: int = field(default=0, compare=False)


Expr = Union[Num, Const, Var, Neg, BinOp, Call]


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, name, op, end
    text: str
    offset: int  # byte offset into the UTF-8 source


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", byte_pos,
                             "number, name, operator or parenthesis")
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, text, byte_pos))
        byte_pos += len(text.encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"unexpected {self._describe(self.tok)}", self.tok.offset, repr(text))
        return self.advance()

    @staticmethod
    def _describe(t: _Token) -> str:
        return "end of input" if t.kind == "end" else f"token {t.text!r}"

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self._describe(self.tok)}", self.tok.offset,
                             "operator or end of input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.advance()
            node = BinOp(t.text, node, self.term(), t.offset)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.advance()
            node = BinOp(t.text, node, self.unary(), t.offset)
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            t = self.advance()
            return Neg(self.unary(), t.offset)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.advance()
            return BinOp("^", base, self.unary(), t.offset)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise ParseError(f"numeric literal {t.text!r} overflows", t.offset)
            return Num(value, t.offset)
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg, t.offset)
            if t.text in CONSTANTS:
                return Const(t.text, t.offset)
            if t.text in VARIABLES:
                return Var(t.text, t.offset)
            raise UnknownIdentifierError(t.text, t.offset)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {self._describe(t)}", t.offset,
                         "number, variable, function call or '('")


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return 5


def to_string(node: Expr) -> str:
    """Render ``node`` with the minimal parentheses needed to re-parse it."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        if _prec(node.operand) < _NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[node.op]
    left = to_string(node.left)
    right = to_string(node.right)
    if node.op == "^":
        # base must be an atom; exponent may be any unary-level expression
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


def free_variables(node: Expr) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, (Num, Const)):
        return frozenset()
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, Call):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


# -- evaluation --------------------------------------------------------------

def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def evaluate(node: Expr, bindings: Mapping[str, Number]) -> Number:
    """Evaluate ``node`` under ``bindings`` in double precision.

    Raises :class:`UnboundVariableError` for a free variable without a value
    and :class:`DomainError` (naming the offending sub-expression) for
    division by zero, square roots of negatives and other non-finite results.
    """
    with np.errstate(all="ignore"):
        return _eval(node, bindings)


def _eval(node: Expr, b: Mapping[str, Number]) -> Number:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            v = b[node.name]
        except KeyError:
            raise UnboundVariableError(node.name) from None
        return v if isinstance(v, np.ndarray) else float(v)
    if isinstance(node, Neg):
        return -_eval(node.operand, b)
    if isinstance(node, Call):
        arg = _eval(node.arg, b)
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise DomainError("square root of a negative number", node)
        out = FUNCTIONS[node.func](arg)
        if not _finite(out):
            raise DomainError(f"{node.func} produced a non-finite value", node)
        return out if isinstance(out, np.ndarray) else float(out)

    left = _eval(node.left, b)
    right = _eval(node.right, b)
    op = node.op
    if op == "+":
        out = left + right
    elif op == "-":
        out = left - right
    elif op == "*":
        out = left * right
    elif op == "/":
        if np.any(np.asarray(right) == 0):
            raise DomainError("division by zero", node)
        out = left / right
    else:
        out = np.power(left, right) if isinstance(left, np.ndarray) or isinstance(right, np.ndarray) \
            else _scalar_pow(left, right, node)
    if not _finite(out):
        raise DomainError("non-finite result", node)
    return out


def _scalar_pow(a: float, b: float, node: Expr) -> float:
    try:
        out = a ** b
    except (OverflowError, ZeroDivisionError):
        raise DomainError("power out of domain", node) from None
    if isinstance(out, complex):
        raise DomainError("fractional power of a negative number", node)
    return float(out)


class Expression:
    """A parsed expression together with its source text."""

    __slots__ = ("source", "tree", "variables")

    def __init__(self, source: str | Expr):
        if isinstance(source, str):
            self.source = source
            self.tree = parse(source)
        else:
            self.tree = source
            self.source = to_string(source)
        self.variables = free_variables(self.tree)

    def __call__(self, **bindings: Number) -> Number:
        return evaluate(self.tree, bindings)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"
