"""Activation-function expression trees.

Grammar (no whitespace allowed)::

    expr := PRIMITIVE | "(" OP ":" expr ":" expr ")"
    OP   := "+" | "-" | "*" | "/" | "^" | "min" | "max" | "comp"

Every subtree is a function of the same input x. ``(comp:f:g)`` is f(g(x)).
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from primitives import Primitive, value_and_derivative


class Operator(Enum):
    ADD = '+'
    SUB = '-'
    MUL = '*'
    DIV = '/'
    POW = '^'
    MIN = 'min'
    MAX = 'max'
    COMP = 'comp'

    @property
    def token(self):
        return self.value


_OPERATORS = {op.value: op for op in Operator}


class ExpressionSyntaxError(ValueError):
    def __init__(self, position, reason):
        super().__init__(f'position {position}: {reason}')
        self.position = position
        self.reason = reason


@dataclass(frozen=True)
class Leaf:
    primitive: Primitive


@dataclass(frozen=True)
class Node:
    op: Operator
    left: 'Leaf | Node'
    right: 'Leaf | Node'


@dataclass(frozen=True)
class DualValue:
    value: object
    deriv: object


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
_DELIMITERS = '():'

# Deepest tree the parser accepts, counting a leaf as depth 1
DEPTH_LIMIT = 200


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.nesting = 0

    def word(self):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _DELIMITERS:
            self.pos += 1
        return start, self.text[start:self.pos]

    def expect(self, char, reason):
        if self.pos >= len(self.text):
            raise ExpressionSyntaxError(self.pos, f'unexpected end of input, {reason}')
        if self.text[self.pos] != char:
            raise ExpressionSyntaxError(self.pos, f"found '{self.text[self.pos]}', {reason}")
        self.pos += 1

    def expr(self):
        if self.pos >= len(self.text):
            raise ExpressionSyntaxError(self.pos, 'unexpected end of input, expected an expression')
        if self.text[self.pos] == '(':
            self.nesting += 1
            if self.nesting >= DEPTH_LIMIT:
                raise ExpressionSyntaxError(self.pos, f'expression deeper than {DEPTH_LIMIT} levels')
            self.pos += 1
            start, token = self.word()
            op = _OPERATORS.get(token)
            if op is None:
                raise ExpressionSyntaxError(start, f"unknown operator '{token}'")
            self.expect(':', f"expected ':' after operator '{token}'")
            left = self.expr()
            self.expect(':', f"operator '{token}' takes 2 operands")
            right = self.expr()
            self.expect(')', f"expected ')' to close operator '{token}'")
            self.nesting -= 1
            return Node(op, left, right)
        start, token = self.word()
        if not token:
            raise ExpressionSyntaxError(start, f"unexpected '{self.text[start]}', expected an expression")
        primitive = Primitive.from_token(token)
        if primitive is None:
            raise ExpressionSyntaxError(start, f"unknown primitive '{token}'")
        return Leaf(primitive)


def parse(text, offset=0):
    """Parse a prefix expression; ``offset`` shifts reported error positions."""
    try:
        if not text:
            raise ExpressionSyntaxError(0, 'empty expression')
        parser = _Parser(text)
        tree = parser.expr()
        if parser.pos != len(text):
            raise ExpressionSyntaxError(parser.pos, f"trailing input '{text[parser.pos:]}'")
        return tree
    except ExpressionSyntaxError as e:
        if offset:
            raise ExpressionSyntaxError(e.position + offset, e.reason) from None
        raise


def serialize(e):
    if isinstance(e, Leaf):
        return e.primitive.token
    return f'({e.op.token}:{serialize(e.left)}:{serialize(e.right)})'


def node_count(e):
    if isinstance(e, Leaf):
        return 1
    return 1 + node_count(e.left) + node_count(e.right)


def depth(e):
    if isinstance(e, Leaf):
        return 1
    return 1 + max(depth(e.left), depth(e.right))


# ---------------------------------------------------------------------------
# Forward-mode evaluation
# ---------------------------------------------------------------------------
def _taint(v, d):
    bad = ~(np.isfinite(v) & np.isfinite(d))
    if np.any(bad):
        v = np.where(bad, np.nan, v)
        d = np.where(bad, np.nan, d)
    return v, d


def _pow(a, da, b, db):
    v = np.power(a, b)
    # a term whose tangent is exactly zero contributes nothing, even where
    # the other factor is infinite or undefined
    base_term = np.where(da == 0, 0.0, b * np.power(a, b - 1.0) * da)
    exp_term = np.where(db == 0, 0.0, v * np.log(a) * db)
    return v, base_term + exp_term


def _eval(e, x):
    if isinstance(e, Leaf):
        return _taint(*value_and_derivative(e.primitive, x))

    op = e.op
    if op is Operator.COMP:
        inner, dinner = _eval(e.right, x)
        outer, douter = _eval(e.left, inner)
        return _taint(outer, douter * dinner)

    a, da = _eval(e.left, x)
    b, db = _eval(e.right, x)
    if op is Operator.ADD:
        v, d = a + b, da + db
    elif op is Operator.SUB:
        v, d = a - b, da - db
    elif op is Operator.MUL:
        v, d = a * b, da * b + a * db
    elif op is Operator.DIV:
        v, d = a / b, (da * b - a * db) / (b * b)
    elif op is Operator.POW:
        v, d = _pow(a, da, b, db)
    elif op is Operator.MIN:
        v, d = np.minimum(a, b), np.where(a <= b, da, db)
    else:
        v, d = np.maximum(a, b), np.where(a >= b, da, db)
    return _taint(v, d)


def eval_dual_array(e, x):
    """Value and derivative of ``e`` over a float64 array, as arrays."""
    with np.errstate(all='ignore'):
        return _eval(e, x)


def eval_dual(e, x):
    arr = np.asarray(x, dtype=np.float64)
    v, d = eval_dual_array(e, arr)
    if np.ndim(v) == 0:
        return DualValue(float(v), float(d))
    return DualValue(np.asarray(v), np.asarray(d))
