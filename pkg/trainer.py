"""Fitness scoring: train a small MLP with the genome as hidden activation.

Hidden pre-activations go through ``genome_value_dual`` once per step; the
value feeds the forward pass and the derivative is kept for backprop.
"""
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from genome import genome_value_dual

logger = logging.getLogger(__name__)


class NonFiniteError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FitnessReport:
    train_accuracy: float
    test_accuracy: float
    final_loss: float | None
    valid: bool
    failure_reason: str | None = None

    @property
    def fitness(self):
        return self.test_accuracy if self.valid else 0.0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def invalid(cls, reason):
        return cls(0.0, 0.0, None, False, reason)


def init_params(layer_sizes, seed):
    """He fan-in initialisation; biases start at zero."""
    rng = np.random.default_rng(seed)
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        w = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        params.append((w, np.zeros(fan_out)))
    return params


def _check(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f'non-finite {what}')


def forward(params, x, genome):
    """Return logits and the per-layer (input, activation slope) pairs."""
    a = x
    trace = []
    for depth, (w, b) in enumerate(params[:-1], start=1):
        z = a @ w + b
        _check(z, f'pre-activation in hidden layer {depth}')
        act = genome_value_dual(genome, z)
        _check(act.value, f'activation value in hidden layer {depth}')
        _check(act.deriv, f'activation derivative in hidden layer {depth}')
        trace.append((a, act.deriv))
        a = act.value
    w, b = params[-1]
    logits = a @ w + b
    _check(logits, 'output logits')
    trace.append((a, None))
    return logits, trace


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_gradients(params, x, y, genome):
    """Mean cross-entropy over the batch and its gradient for every (W, b)."""
    with np.errstate(all='ignore'):
        logits, trace = forward(params, x, genome)
        log_probs = _log_softmax(logits)
        m = len(y)
        loss = float(-log_probs[np.arange(m), y].mean())
        if not math.isfinite(loss):
            raise NonFiniteError('non-finite loss')

        delta = np.exp(log_probs)
        delta[np.arange(m), y] -= 1.0
        delta /= m

        grads = [None] * len(params)
        for layer in range(len(params) - 1, -1, -1):
            a_in, _ = trace[layer]
            w, _ = params[layer]
            grads[layer] = (a_in.T @ delta, delta.sum(axis=0))
            if layer:
                _, slope = trace[layer - 1]
                delta = (delta @ w.T) * slope
        for gw, gb in grads:
            _check(gw, 'weight gradient')
            _check(gb, 'bias gradient')
    return loss, grads


def predict(params, x, genome):
    with np.errstate(all='ignore'):
        logits, _ = forward(params, x, genome)
    return logits.argmax(axis=1)


def accuracy(params, x, y, genome):
    if len(y) == 0:
        return 0.0
    return float((predict(params, x, genome) == y).mean())


def standardize(data):
    """Z-score features with training-split statistics."""
    train = data.features[data.train]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std[std == 0] = 1.0
    return (data.features - mean) / std


def train_and_score(genome, data, cfg, shuffle_seed=None):
    features = standardize(data)
    x_train, y_train = features[data.train], data.labels[data.train]
    x_test, y_test = features[data.test], data.labels[data.test]

    sizes = [data.dim, *cfg.hidden_layers, data.num_classes]
    params = init_params(sizes, cfg.init_seed)
    rng = np.random.default_rng(cfg.init_seed if shuffle_seed is None else shuffle_seed)

    loss = None
    try:
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(y_train))
            for start in range(0, len(order), cfg.batch_size):
                batch = order[start:start + cfg.batch_size]
                loss, grads = loss_and_gradients(params, x_train[batch], y_train[batch], genome)
                params = [(w - cfg.learning_rate * gw, b - cfg.learning_rate * gb)
                          for (w, b), (gw, gb) in zip(params, grads)]
                for w, b in params:
                    _check(w, 'weight')
                    _check(b, 'bias')
        report = FitnessReport(
            train_accuracy=accuracy(params, x_train, y_train, genome),
            test_accuracy=accuracy(params, x_test, y_test, genome),
            final_loss=loss,
            valid=True,
        )
    except NonFiniteError as e:
        logger.warning(f'Genome {genome} invalidated: {e}')
        return FitnessReport.invalid(str(e))

    logger.debug(f'Genome {genome}: train {report.train_accuracy:.4f} test {report.test_accuracy:.4f}')
    return report
