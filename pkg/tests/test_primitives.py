import math

import numpy as np
import pytest

from primitives import KINKS, SELU_ALPHA, SELU_LAMBDA, Primitive, derivative, value

GRID = np.linspace(-6.0, 6.0, 500)


def _smooth_points(p, margin=1e-3):
    kinks = np.array(KINKS.get(p, ()))
    if not len(kinks):
        return GRID
    return GRID[np.min(np.abs(GRID[:, None] - kinks[None, :]), axis=1) > margin]


@pytest.mark.parametrize('p, x, expected', [
    (Primitive.SIGMOID, 0.0, 0.5),
    (Primitive.RELU, -1.0, 0.0),
    (Primitive.HARD_ELISH, 0.5, 0.375),
    (Primitive.HARD_ELISH, -3.0, 0.0),
    (Primitive.SELU, 1.0, 1.0507009873554805),
    (Primitive.SOFTPLUS, 0.0, math.log(2.0)),
])
def test_spot_values(p, x, expected):
    assert value(p, x) == pytest.approx(expected, abs=1e-12)


def test_elish_negative_piece():
    expected = (math.exp(-1.0) - 1.0) / (1.0 + math.exp(1.0))
    assert value(Primitive.ELISH, -1.0) == pytest.approx(expected, rel=1e-12)
    assert value(Primitive.ELISH, -1.0) == pytest.approx(-0.170003, abs=1e-6)


@pytest.mark.parametrize('p, x, expected', [
    (Primitive.SIGMOID, 0.0, 0.25),
    (Primitive.SWISH, 0.0, 0.5),
    (Primitive.LINEAR, 7.3, 1.0),
    (Primitive.RELU, 0.0, 1.0),
    (Primitive.HARD_SIGMOID, -1.0, 0.5),
    (Primitive.HARD_SIGMOID, 1.0, 0.0),
])
def test_spot_derivatives(p, x, expected):
    assert derivative(p, x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('p', list(Primitive))
def test_derivative_matches_central_difference(p):
    xs = _smooth_points(p)
    h = 1e-5
    analytic = derivative(p, xs)
    numeric = (value(p, xs + h) - value(p, xs - h)) / (2 * h)
    assert np.all(np.abs(analytic - numeric) <= 1e-6 * (1 + np.abs(analytic)))


@pytest.mark.parametrize('p', list(Primitive))
def test_total_over_extreme_inputs(p):
    xs = np.array([-1e4, -750.0, -40.0, 40.0, 750.0, 1e4])
    assert np.all(np.isfinite(value(p, xs)))
    assert np.all(np.isfinite(derivative(p, xs)))


def test_softplus_large_input_is_linear():
    assert value(Primitive.SOFTPLUS, 800.0) == pytest.approx(800.0)


def test_elish_equals_swish_on_positive_axis():
    xs = np.linspace(0.0, 20.0, 2001)
    assert np.max(np.abs(value(Primitive.ELISH, xs) - value(Primitive.SWISH, xs))) == 0.0


def test_hard_elish_saturation(np_rng):
    low = -1.0 - np_rng.uniform(0.0, 50.0, 100)
    low[0] = -1.0
    high = 1.0 + np_rng.uniform(0.0, 50.0, 100)
    high[0] = 1.0
    assert np.all(value(Primitive.HARD_ELISH, low) == 0.0)
    assert np.all(value(Primitive.HARD_ELISH, high) == high)


def test_selu_formula():
    xs = np.linspace(-6.0, 6.0, 241)
    expected = SELU_LAMBDA * np.where(xs >= 0, xs, SELU_ALPHA * (np.exp(xs) - 1.0))
    np.testing.assert_allclose(value(Primitive.SELU, xs), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize('p', [
    Primitive.ELISH, Primitive.HARD_ELISH, Primitive.SWISH, Primitive.RELU,
    Primitive.ELU, Primitive.SELU, Primitive.SIN, Primitive.LINEAR,
])
def test_zero_at_origin(p):
    assert value(p, 0.0) == 0.0


def test_nonzero_at_origin():
    assert value(Primitive.SIGMOID, 0.0) == 0.5
    assert value(Primitive.HARD_SIGMOID, 0.0) == 0.5
    assert value(Primitive.SOFTPLUS, 0.0) == pytest.approx(math.log(2.0), abs=1e-12)


def test_scalar_in_scalar_out_and_shape_preserved():
    assert isinstance(value(Primitive.SWISH, 1.0), float)
    xs = np.zeros((3, 4))
    assert value(Primitive.SWISH, xs).shape == (3, 4)
    assert derivative(Primitive.LINEAR, xs).shape == (3, 4)


def test_canonical_tokens():
    assert [p.token for p in Primitive] == [
        'ELiSH', 'HardELiSH', 'Swish', 'ReLU', 'ELU', 'SeLU',
        'Softplus', 'HardSigmoid', 'Sigmoid', 'Sin', 'Linear',
    ]
    assert Primitive.from_token('relu') is None
