"""The eleven candidate activation functions, with exact derivatives.

Every function takes a float or a numpy array and returns the same shape.
At a kink the right-hand derivative is returned, matching the genome rule
that x = 0 belongs to the right piece.
"""
from enum import Enum

import numpy as np

# Fixed SeLU scaling factors
SELU_ALPHA = 1.6732632423543772
SELU_LAMBDA = 1.0507009873554805


class Primitive(Enum):
    ELISH = 'ELiSH'
    HARD_ELISH = 'HardELiSH'
    SWISH = 'Swish'
    RELU = 'ReLU'
    ELU = 'ELU'
    SELU = 'SeLU'
    SOFTPLUS = 'Softplus'
    HARD_SIGMOID = 'HardSigmoid'
    SIGMOID = 'Sigmoid'
    SIN = 'Sin'
    LINEAR = 'Linear'

    @property
    def token(self):
        return self.value

    @classmethod
    def from_token(cls, token):
        return _BY_TOKEN.get(token)


_BY_TOKEN = {p.value: p for p in Primitive}

# Kink locations, excluded from finite-difference checks
KINKS = {
    Primitive.RELU: (0.0,),
    Primitive.ELU: (0.0,),
    Primitive.SELU: (0.0,),
    Primitive.ELISH: (0.0,),
    Primitive.HARD_SIGMOID: (-1.0, 1.0),
    Primitive.HARD_ELISH: (-1.0, 0.0, 1.0),
}


def _sigmoid(x):
    # exp of a non-positive argument never overflows
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _expm1_neg(x):
    return np.expm1(np.minimum(x, 0.0))


def _exp_neg(x):
    return np.exp(np.minimum(x, 0.0))


def _hard_sigmoid(x):
    return np.clip((x + 1.0) / 2.0, 0.0, 1.0)


def _hard_sigmoid_slope(x):
    return np.where((x >= -1.0) & (x < 1.0), 0.5, 0.0)


def _swish(x):
    return x * _sigmoid(x)


def _swish_slope(x):
    s = _sigmoid(x)
    return s + x * s * (1.0 - s)


def _elish(x):
    return np.where(x >= 0, _swish(x), _expm1_neg(x) * _sigmoid(x))


def _elish_slope(x):
    s = _sigmoid(x)
    left = _exp_neg(x) * s + _expm1_neg(x) * s * (1.0 - s)
    return np.where(x >= 0, _swish_slope(x), left)


def _hard_elish(x):
    h = _hard_sigmoid(x)
    return np.where(x >= 0, x * h, _expm1_neg(x) * h)


def _hard_elish_slope(x):
    h = _hard_sigmoid(x)
    dh = _hard_sigmoid_slope(x)
    return np.where(x >= 0, h + x * dh, _exp_neg(x) * h + _expm1_neg(x) * dh)


def _selu(x):
    return SELU_LAMBDA * np.where(x >= 0, x, SELU_ALPHA * _expm1_neg(x))


def _selu_slope(x):
    return SELU_LAMBDA * np.where(x >= 0, 1.0, SELU_ALPHA * _exp_neg(x))


_FORMULAS = {
    Primitive.ELISH: (_elish, _elish_slope),
    Primitive.HARD_ELISH: (_hard_elish, _hard_elish_slope),
    Primitive.SWISH: (_swish, _swish_slope),
    Primitive.RELU: (lambda x: np.maximum(x, 0.0), lambda x: np.where(x >= 0, 1.0, 0.0)),
    Primitive.ELU: (lambda x: np.where(x >= 0, x, _expm1_neg(x)), lambda x: np.where(x >= 0, 1.0, _exp_neg(x))),
    Primitive.SELU: (_selu, _selu_slope),
    Primitive.SOFTPLUS: (lambda x: np.logaddexp(0.0, x), _sigmoid),
    Primitive.HARD_SIGMOID: (_hard_sigmoid, _hard_sigmoid_slope),
    Primitive.SIGMOID: (_sigmoid, lambda x: _sigmoid(x) * (1.0 - _sigmoid(x))),
    Primitive.SIN: (np.sin, np.cos),
    Primitive.LINEAR: (lambda x: x + 0.0, lambda x: np.ones_like(x)),
}


def _apply(fn, x):
    arr = np.asarray(x, dtype=np.float64)
    out = fn(arr)
    return float(out) if np.ndim(out) == 0 else out


def value(p, x):
    return _apply(_FORMULAS[p][0], x)


def derivative(p, x):
    return _apply(_FORMULAS[p][1], x)


def value_and_derivative(p, x):
    """Both at once on an array already converted to float64."""
    fn, slope = _FORMULAS[p]
    return fn(x), slope(x)
