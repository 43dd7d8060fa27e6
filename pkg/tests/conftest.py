import numpy as np
import pytest

from datasets import make_synthetic
from expr import Leaf, Node, Operator
from primitives import Primitive
from trainer import FitnessReport
from utils import hash64

NESTED_EXPR = '(max:(+:(min:ELU:ReLU):Swish):(*:ELU:Linear))'


def _random_expr(rng, max_depth, operators=tuple(Operator), p_leaf=0.3):
    primitives = tuple(Primitive)
    if max_depth == 1 or rng.random() < p_leaf:
        return Leaf(primitives[rng.integers(len(primitives))])
    op = operators[rng.integers(len(operators))]
    return Node(op, _random_expr(rng, max_depth - 1, operators, p_leaf),
                _random_expr(rng, max_depth - 1, operators, p_leaf))


@pytest.fixture
def random_expr():
    return _random_expr


@pytest.fixture
def nested_example():
    return NESTED_EXPR


@pytest.fixture
def tiny_moons():
    return make_synthetic('two-moons', 40, 0.1, 3)


class CountingScorer:
    """Fast stand-in for training: fitness is a fixed hash of the genome key.

    Genomes containing a division are reported invalid.
    """

    def __init__(self):
        self.calls = 0

    def __call__(self, genome, data, cfg, shuffle_seed=None):
        self.calls += 1
        key = genome.key
        if '(/:' in key:
            return FitnessReport.invalid('non-finite activation value in hidden layer 1')
        score = (hash64(7, key) % 1000) / 1000
        return FitnessReport(score, score, 0.5, True)


@pytest.fixture
def scorer():
    return CountingScorer()


class ScriptedRng:
    """RngStream stand-in returning pre-arranged draws."""

    def __init__(self, coins=(), choices=(), indices=()):
        self.coins = list(coins)
        self.choices = list(choices)
        self.indices = list(indices)

    def coin(self, p):
        return self.coins.pop(0)

    def choice(self, items):
        picked = self.choices.pop(0)
        assert picked in items
        return picked

    def index(self, n):
        return self.indices.pop(0)


@pytest.fixture
def scripted_rng():
    return ScriptedRng


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240601)
