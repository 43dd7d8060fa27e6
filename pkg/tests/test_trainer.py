import numpy as np
import pytest

from config import MlpConfig
from datasets import make_synthetic
from genome import parse_genome
from trainer import FitnessReport, accuracy, init_params, loss_and_gradients, standardize, train_and_score

GRADIENT_GENOMES = [
    'ReLU|ReLU',
    'Swish|Swish',
    'ELiSH|ELiSH',
    'HardELiSH|HardELiSH',
    'Sin|(+:Swish:Swish)',
    '(comp:Sigmoid:ELU)|Softplus',
    'SeLU|(*:Linear:Sigmoid)',
    '(min:ELU:Sin)|(max:ReLU:Swish)',
    'Sigmoid|Sigmoid',
    'Linear|(^:Softplus:Sigmoid)',
]


@pytest.fixture
def tiny_batch():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 2))
    y = np.array([0, 1, 1, 0])
    return x, y


@pytest.mark.parametrize('text', GRADIENT_GENOMES)
def test_backprop_matches_finite_differences(text, tiny_batch):
    genome = parse_genome(text)
    x, y = tiny_batch
    params = init_params([2, 3, 2], seed=5)
    _, grads = loss_and_gradients(params, x, y, genome)
    h = 1e-6

    for layer, (w, b) in enumerate(params):
        for which, arr in ((0, w), (1, b)):
            for idx in np.ndindex(arr.shape):
                def loss_at(delta):
                    bumped = arr.copy()
                    bumped[idx] += delta
                    trial = list(params)
                    trial[layer] = (bumped, b) if which == 0 else (w, bumped)
                    return loss_and_gradients(trial, x, y, genome)[0]

                numeric = (loss_at(h) - loss_at(-h)) / (2 * h)
                analytic = grads[layer][which][idx]
                assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-7), (layer, which, idx)


def test_init_params_shapes_and_zero_biases():
    params = init_params([2, 16, 16, 3], seed=0)
    assert [w.shape for w, _ in params] == [(2, 16), (16, 16), (16, 3)]
    assert all(not b.any() for _, b in params)
    np.testing.assert_array_equal(params[0][0], init_params([2, 16, 16, 3], seed=0)[0][0])


def test_standardize_uses_training_statistics():
    data = make_synthetic('circles', 100, 0.1, 2)
    z = standardize(data)[data.train]
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(z.std(axis=0), 1.0, rtol=1e-12)


def test_accuracy_on_empty_split_is_zero():
    params = init_params([2, 3, 2], seed=0)
    assert accuracy(params, np.zeros((0, 2)), np.zeros(0, dtype=np.int64), parse_genome('ReLU|ReLU')) == 0.0


def test_fitness_is_test_accuracy_or_zero():
    assert FitnessReport(0.9, 0.8, 0.3, True).fitness == 0.8
    assert FitnessReport.invalid('non-finite loss').fitness == 0.0


def test_relu_learns_two_moons():
    data = make_synthetic('two-moons', 400, 0.2, 7)
    report = train_and_score(parse_genome('ReLU|ReLU'), data, MlpConfig())
    assert report.valid
    assert report.test_accuracy >= 0.95
    # regression values for this dataset and the default trainer settings
    assert report.test_accuracy == 0.9625
    assert report.train_accuracy == 0.9875


def test_division_genome_is_invalid(tiny_moons):
    report = train_and_score(parse_genome('(/:Linear:HardSigmoid)|Linear'), tiny_moons, MlpConfig(epochs=5))
    assert not report.valid
    assert report.fitness == 0.0
    assert 'non-finite' in report.failure_reason


def test_linear_network_cannot_separate_circles():
    data = make_synthetic('circles', 400, 0.05, 7)
    report = train_and_score(parse_genome('Linear|Linear'), data, MlpConfig(epochs=50))
    assert report.valid
    assert report.test_accuracy < 0.8


def test_training_is_bit_reproducible(tiny_moons):
    cfg = MlpConfig(hidden_layers=(8,), epochs=20)
    genome = parse_genome('Sin|(+:Swish:Swish)')
    first = train_and_score(genome, tiny_moons, cfg, shuffle_seed=123)
    assert first == train_and_score(genome, tiny_moons, cfg, shuffle_seed=123)
    assert first.valid and np.isfinite(first.final_loss)
