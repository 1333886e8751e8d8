"""
Expression Parser Module

Recursive descent parser for the command-line expression language:
numbers (integers, decimals, ratios written a/b), variables x1..x9,
+ - * / ^ with the usual precedence (^ binds tightest and associates to
the right, unary minus binds looser than ^), parentheses and the
functions sin, cos, exp, log.

Text that is a polynomial in x1..x9 with rational coefficients becomes an
exact PolyMap over Q; anything else becomes a SmoothFn whose evaluator
works on float arrays and on object arrays of DualNumber.
"""
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .errors import ExprSyntaxError, UnknownFunction
from .numdiff import SmoothFn
from .rings import ring_from_id
from .symcalc import PolyMap

logger = logging.getLogger(__name__)

FUNCTIONS: Dict[str, Callable] = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log}
MAX_VARIABLES = 9

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    position: int


# syntax tree

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    position: int


@dataclass(frozen=True)
class Call:
    name: str
    argument: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


def tokenize(text: str) -> List[Token]:
    """
    Split text into tokens with 1-based positions; the last token is "eof".

    Raises:
        ExprSyntaxError: On a character that starts no token
    """
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), pos + 1))
        pos = match.end()
    tokens.append(Token("eof", "", len(text) + 1))
    return tokens


class Parser:
    """
    Grammar:

        expr   := term (("+" | "-") term)*
        term   := unary (("*" | "/") unary)*
        unary  := "-" unary | power
        power  := atom ("^" unary)?
        atom   := number | variable | function "(" expr ")" | "(" expr ")"
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.token
        if token.kind != "eof":
            self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.token.text != text:
            found = "end of input" if self.token.kind == "eof" else repr(self.token.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", self.token.position)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.token.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.token.text!r}", self.token.position)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.token.text in ("+", "-"):
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.position)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.token.text in ("*", "/"):
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.position)
        return node

    def unary(self) -> Node:
        if self.token.text == "-":
            self.advance()
            return Neg(self.unary())
        if self.token.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        if self.token.text == "^":
            op = self.advance()
            node = BinOp("^", node, self.unary(), op.position)
        return node

    def atom(self) -> Node:
        token = self.token
        if token.kind == "number":
            self.advance()
            return Num(Fraction(token.text))
        if token.kind == "name":
            self.advance()
            match = re.fullmatch(r"x([1-9])", token.text)
            if match:
                return Var(int(match.group(1)) - 1)
            if token.text not in FUNCTIONS:
                raise UnknownFunction(token.text, token.position)
            self.expect("(")
            argument = self.expr()
            self.expect(")")
            return Call(token.text, argument)
        if token.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if token.kind == "eof" else repr(token.text)
        raise ExprSyntaxError(f"expected a number, variable or '(' but found {found}", token.position)


def arity(node: Node) -> int:
    """Highest variable index used, counted from one; constants have arity 1."""
    if isinstance(node, Var):
        return node.index + 1
    if isinstance(node, Num):
        return 1
    if isinstance(node, Neg):
        return arity(node.operand)
    if isinstance(node, Call):
        return arity(node.argument)
    return max(arity(node.left), arity(node.right))


class _NotPolynomial(Exception):
    pass


def _constant_value(node: Node) -> Optional[Fraction]:
    """Exact value of a variable-free polynomial subtree, else None."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        inner = _constant_value(node.operand)
        return None if inner is None else -inner
    if isinstance(node, BinOp):
        left, right = _constant_value(node.left), _constant_value(node.right)
        if left is None or right is None:
            return None
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right == 0:
                raise ExprSyntaxError("division by zero", node.position)
            return left / right
        if right.denominator == 1 and right >= 0:
            return left ** int(right)
    return None


def to_poly(node: Node, n: int) -> PolyMap:
    """
    Exact polynomial for node over Q.

    Raises:
        _NotPolynomial: For functions, division by non-constants and
            exponents that are not non-negative integer constants
    """
    ring = ring_from_id("Q")
    if isinstance(node, Num):
        return PolyMap.constant(ring, n, [node.value])
    if isinstance(node, Var):
        return PolyMap.variable(ring, n, node.index)
    if isinstance(node, Neg):
        return -to_poly(node.operand, n)
    if isinstance(node, Call):
        raise _NotPolynomial(node.name)
    if node.op == "+":
        return to_poly(node.left, n) + to_poly(node.right, n)
    if node.op == "-":
        return to_poly(node.left, n) - to_poly(node.right, n)
    if node.op == "*":
        return to_poly(node.left, n) * to_poly(node.right, n)
    divisor = _constant_value(node.right)
    if node.op == "/":
        if divisor is None:
            raise _NotPolynomial("/")
        if divisor == 0:
            raise ExprSyntaxError("division by zero", node.position)
        return to_poly(node.left, n).scale(1 / divisor)
    if divisor is None or divisor.denominator != 1 or divisor < 0:
        raise _NotPolynomial("^")
    return to_poly(node.left, n) ** int(divisor)


def to_evaluator(node: Node) -> Callable:
    """Numpy evaluator for node acting on arrays of shape (..., n)."""
    if isinstance(node, Num):
        value = float(node.value)
        return lambda x: x[..., 0] * 0.0 + value
    if isinstance(node, Var):
        index = node.index
        return lambda x: x[..., index]
    if isinstance(node, Neg):
        inner = to_evaluator(node.operand)
        return lambda x: -inner(x)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name]
        inner = to_evaluator(node.argument)
        return lambda x: fn(inner(x))
    left, right = to_evaluator(node.left), to_evaluator(node.right)
    if node.op == "+":
        return lambda x: left(x) + right(x)
    if node.op == "-":
        return lambda x: left(x) - right(x)
    if node.op == "*":
        return lambda x: left(x) * right(x)
    if node.op == "/":
        return lambda x: left(x) / right(x)
    exponent = _constant_value(node.right)
    if exponent is not None:
        power = int(exponent) if exponent.denominator == 1 else float(exponent)
        return lambda x: left(x) ** power
    return lambda x: left(x) ** right(x)


def parse_tree(text: str) -> Node:
    """Parse text into a syntax tree."""
    return Parser(text).parse()


def parse_expr(text: str, n: Optional[int] = None) -> Union[PolyMap, SmoothFn]:
    """
    Parse an expression.

    Args:
        text: Expression source
        n: Arity override; must be at least the highest variable index

    Returns:
        PolyMap over Q for polynomial text, otherwise a scalar SmoothFn

    Raises:
        ExprSyntaxError: Malformed text, with the 1-based position
        UnknownFunction: Unknown identifier
        ValueError: If n is smaller than the inferred arity
    """
    node = parse_tree(text)
    inferred = arity(node)
    if n is None:
        n = inferred
    elif n < inferred:
        raise ValueError(f"expression uses x{inferred} but arity {n} was requested")
    try:
        f = to_poly(node, n)
        logger.debug("parsed %r as polynomial with %d monomials", text, f.monomial_count)
        return f
    except _NotPolynomial as exc:
        logger.debug("parsed %r as smooth map (%s is not polynomial)", text, exc)
    return SmoothFn(n, 1, to_evaluator(node), None, text.strip())


def parse_point(text: str) -> Tuple[float, ...]:
    """
    Parse a comma separated vector such as "1,0.5,-2".

    Raises:
        ExprSyntaxError: For an empty or non-numeric entry
    """
    values = []
    offset = 0
    for part in text.split(","):
        stripped = part.strip()
        try:
            values.append(float(Fraction(stripped)))
        except (ValueError, ZeroDivisionError):
            raise ExprSyntaxError(f"bad number {stripped!r}", offset + 1)
        offset += len(part) + 1
    return tuple(values)
