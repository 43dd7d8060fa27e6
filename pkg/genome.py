"""Piecewise individuals and the genetic operators that breed them."""
from dataclasses import dataclass

import numpy as np

from config import GA_DEFAULTS
from expr import DualValue, ExpressionSyntaxError, Leaf, Node, Operator, depth, eval_dual_array, node_count, parse, serialize
from primitives import Primitive

OPERATORS = tuple(Operator)
PRIMITIVES = tuple(Primitive)


@dataclass(frozen=True)
class Genome:
    left: Leaf | Node   # applied for x < 0
    right: Leaf | Node  # applied for x >= 0

    @property
    def key(self):
        return f'{serialize(self.left)}|{serialize(self.right)}'

    @property
    def complexity(self):
        return node_count(self.left) + node_count(self.right)

    @property
    def depth(self):
        return max(depth(self.left), depth(self.right))

    def __str__(self):
        return self.key


def whole_line(p):
    return Genome(Leaf(p), Leaf(p))


# Initial-population candidates, in catalogue order
CANDIDATES = tuple(whole_line(p) for p in (
    Primitive.HARD_ELISH, Primitive.ELISH, Primitive.SWISH, Primitive.RELU,
    Primitive.ELU, Primitive.SELU, Primitive.SOFTPLUS, Primitive.HARD_SIGMOID,
    Primitive.SIGMOID, Primitive.SIN, Primitive.LINEAR,
))


def parse_genome(text):
    """Parse ``left|right`` into a Genome."""
    if text.count('|') != 1:
        position = text.find('|', text.find('|') + 1) if text.count('|') > 1 else len(text)
        raise ExpressionSyntaxError(position, "a genome needs exactly one '|' between its left and right gene")
    left_text, right_text = text.split('|')
    return Genome(parse(left_text), parse(right_text, offset=len(left_text) + 1))


class RngStream:
    """Seeded draw stream over numpy's PCG64 generator.

    PCG64 is a 128-bit permuted congruential generator; numpy documents its
    state transition and guarantees the same stream for the same seed on
    every platform.
    """

    algorithm = 'PCG64'

    def __init__(self, seed):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def coin(self, p):
        return bool(self._gen.random() < p)

    def index(self, n):
        return int(self._gen.integers(n))

    def choice(self, items):
        return items[self.index(len(items))]


def genome_value_dual(g, x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        gene = g.left if arr < 0 else g.right
        v, d = eval_dual_array(gene, arr)
        return DualValue(float(v), float(d))

    value = np.empty_like(arr)
    deriv = np.empty_like(arr)
    negative = arr < 0
    # each gene only sees its own piece of the input
    for gene, mask in ((g.left, negative), (g.right, ~negative)):
        if np.any(mask):
            value[mask], deriv[mask] = eval_dual_array(gene, arr[mask])
    return DualValue(value, deriv)


def inheritance(mom, dad):
    return Genome(mom.left, dad.right), Genome(dad.left, mom.right)


def hybrid(mom, dad, rng, max_depth=GA_DEFAULTS['max_depth']):
    op1 = rng.choice(OPERATORS)
    op2 = rng.choice(OPERATORS)
    first = Genome(Node(op1, mom.left, dad.left), Node(op2, mom.right, dad.right))
    second = Genome(Node(op1, dad.left, mom.left), Node(op2, dad.right, mom.right))
    if first.depth > max_depth or second.depth > max_depth:
        return inheritance(mom, dad)
    return first, second


def crossover(mom, dad, rng, p_hybrid=GA_DEFAULTS['p_hybrid'], max_depth=GA_DEFAULTS['max_depth']):
    if rng.coin(p_hybrid):
        return hybrid(mom, dad, rng, max_depth)
    return inheritance(mom, dad)


def mutate(g, rng, p_mutate=GA_DEFAULTS['p_mutate']):
    if not rng.coin(p_mutate):
        return g
    replace_left = rng.coin(0.5)
    leaf = Leaf(rng.choice(PRIMITIVES))
    return Genome(leaf, g.right) if replace_left else Genome(g.left, leaf)
