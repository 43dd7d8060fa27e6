import json
import math
import os
from dataclasses import asdict, dataclass

from expr import DEPTH_LIMIT

BASE_DIR = os.path.abspath(os.path.dirname(__file__))


class Config:
    # Load from environment variables with defaults for development
    LOG_LEVEL = os.environ.get('AFEVOLVE_LOG_LEVEL') or 'INFO'
    LOGGING_CONFIG = os.environ.get('AFEVOLVE_LOGGING_CONFIG') or os.path.join(BASE_DIR, 'logging.ini')
    OUTPUT_DIR = os.environ.get('AFEVOLVE_OUTPUT_DIR') or 'output'

    # Persistent fitness store, off unless a database URL is given
    if os.environ.get('AFEVOLVE_CACHE_DATABASE_URL'):
        CACHE_DATABASE_URL = os.environ['AFEVOLVE_CACHE_DATABASE_URL'].replace('postgres://', 'postgresql://', 1)
    else:
        CACHE_DATABASE_URL = None


TOOL_VERSION = '1.0.0'

# Genetic algorithm settings
GA_DEFAULTS = {
    'population_size': 40,
    'generations': 8,
    'elite_fraction': 0.15,
    'p_hybrid': 0.5,
    'p_select_coin': 0.5,
    'p_mutate': 1.0,
    'max_depth': 8,
    'seed': 0,
    'seed_genomes': (),
}

# Desk-scale classifier used for scoring
MLP_DEFAULTS = {
    'hidden_layers': (16, 16),
    'epochs': 200,
    'learning_rate': 0.05,
    'batch_size': 32,
    'init_seed': 0,
}

DATASET_DEFAULTS = {
    'dataset': 'two-moons',
    'samples': 400,
    'noise': 0.2,
    'data_seed': 7,
}

DATASET_KINDS = ('two-moons', 'circles', 'spirals', 'csv')

SEED_LIMIT = 2 ** 64


class ConfigError(ValueError):
    pass


def elite_count(population_size, elite_fraction):
    # 0.15 * 40 is 6.000000000000001 in binary floating point
    return math.ceil(round(elite_fraction * population_size, 9))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = GA_DEFAULTS['population_size']
    generations: int = GA_DEFAULTS['generations']
    elite_fraction: float = GA_DEFAULTS['elite_fraction']
    p_hybrid: float = GA_DEFAULTS['p_hybrid']
    p_select_coin: float = GA_DEFAULTS['p_select_coin']
    p_mutate: float = GA_DEFAULTS['p_mutate']
    max_depth: int = GA_DEFAULTS['max_depth']
    seed: int = GA_DEFAULTS['seed']
    seed_genomes: tuple = GA_DEFAULTS['seed_genomes']

    @property
    def elite_count(self):
        return elite_count(self.population_size, self.elite_fraction)

    def validate(self):
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigError(f'population_size must be even and at least 4, got {self.population_size}')
        if self.generations < 0:
            raise ConfigError(f'generations must be non-negative, got {self.generations}')
        if not 0 < self.elite_fraction < 1:
            raise ConfigError(f'elite_fraction must lie in (0, 1), got {self.elite_fraction}')
        if self.elite_count < 2:
            raise ConfigError(
                f'elite_fraction {self.elite_fraction} keeps {self.elite_count} parent(s) '
                f'of {self.population_size}; breeding needs at least 2')
        for name in ('p_hybrid', 'p_select_coin', 'p_mutate'):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(f'{name} must lie in [0, 1], got {value}')
        if not 1 <= self.max_depth <= DEPTH_LIMIT:
            raise ConfigError(f'max_depth must lie in [1, {DEPTH_LIMIT}], got {self.max_depth}')
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError(f'seed must be an unsigned 64-bit integer, got {self.seed}')
        if len(self.seed_genomes) > self.population_size:
            raise ConfigError(f'{len(self.seed_genomes)} seed genomes exceed population_size {self.population_size}')
        return self


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple = MLP_DEFAULTS['hidden_layers']
    epochs: int = MLP_DEFAULTS['epochs']
    learning_rate: float = MLP_DEFAULTS['learning_rate']
    batch_size: int = MLP_DEFAULTS['batch_size']
    init_seed: int = MLP_DEFAULTS['init_seed']

    def validate(self):
        if not self.hidden_layers or any(width < 1 for width in self.hidden_layers):
            raise ConfigError(f'hidden layer widths must be at least 1, got {list(self.hidden_layers)}')
        if self.epochs < 1:
            raise ConfigError(f'epochs must be at least 1, got {self.epochs}')
        if not self.learning_rate > 0:
            raise ConfigError(f'learning_rate must be positive, got {self.learning_rate}')
        if self.batch_size < 1:
            raise ConfigError(f'batch_size must be at least 1, got {self.batch_size}')
        if not 0 <= self.init_seed < SEED_LIMIT:
            raise ConfigError(f'init_seed must be an unsigned 64-bit integer, got {self.init_seed}')
        return self


@dataclass(frozen=True)
class DatasetSpec:
    kind: str = DATASET_DEFAULTS['dataset']
    samples: int = DATASET_DEFAULTS['samples']
    noise: float = DATASET_DEFAULTS['noise']
    data_seed: int = DATASET_DEFAULTS['data_seed']
    path: str | None = None

    @classmethod
    def from_text(cls, text, samples=DATASET_DEFAULTS['samples'], noise=DATASET_DEFAULTS['noise'],
                  data_seed=DATASET_DEFAULTS['data_seed']):
        if text.startswith('csv:'):
            path = text[len('csv:'):]
            if not path:
                raise ConfigError('csv dataset needs a path, e.g. csv:data.csv')
            return cls('csv', samples, noise, data_seed, path)
        return cls(text, samples, noise, data_seed)

    def to_text(self):
        return f'csv:{self.path}' if self.kind == 'csv' else self.kind

    def validate(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(f"unknown dataset '{self.kind}', expected one of two-moons, circles, spirals, csv:PATH")
        if self.kind != 'csv' and self.samples < 8:
            raise ConfigError(f'samples must be at least 8, got {self.samples}')
        if self.noise < 0:
            raise ConfigError(f'noise must be non-negative, got {self.noise}')
        return self


# Expected JSON type per flat config key
_KEY_TYPES = {
    'population_size': int, 'generations': int, 'elite_fraction': float,
    'p_hybrid': float, 'p_select_coin': float, 'p_mutate': float,
    'max_depth': int, 'seed': int, 'seed_genomes': list,
    'hidden_layers': list, 'epochs': int, 'learning_rate': float,
    'batch_size': int, 'init_seed': int,
    'dataset': str, 'samples': int, 'noise': float, 'data_seed': int,
}


def _check_type(key, value):
    expected = _KEY_TYPES[key]
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, bool) or not isinstance(value, expected):
        raise ConfigError(f"config key '{key}' expects {expected.__name__}, got {value!r}")
    if key == 'hidden_layers':
        if not all(isinstance(w, int) and not isinstance(w, bool) for w in value):
            raise ConfigError(f"config key 'hidden_layers' expects a list of integers, got {value!r}")
        return tuple(value)
    if key == 'seed_genomes':
        if not all(isinstance(g, str) for g in value):
            raise ConfigError(f"config key 'seed_genomes' expects a list of strings, got {value!r}")
        return tuple(value)
    return value


# Manifest-only keys, accepted and ignored so a manifest can be replayed
_MANIFEST_KEYS = ('tool_version',)


def read_config_file(path):
    """Read a flat JSON config, a manifest, or the manifest line of a runlog."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.readline() if path.endswith('.jsonl') else f.read()
        data = json.loads(text)
    except OSError as e:
        raise ConfigError(f'cannot read config file {path}: {e.strerror}') from e
    except json.JSONDecodeError as e:
        raise ConfigError(f'config file {path} is not valid JSON: {e.msg} (line {e.lineno})') from e
    if isinstance(data, dict) and set(data) == {'manifest'}:
        data = data['manifest']
    if not isinstance(data, dict):
        raise ConfigError(f'config file {path} must hold a JSON object')
    return {k: v for k, v in data.items() if k not in _MANIFEST_KEYS}


def load_settings(path=None, overrides=None):
    """Merge defaults, an optional JSON file and command-line overrides.

    Returns validated ``(GaConfig, MlpConfig, DatasetSpec)``.
    """
    merged = {**GA_DEFAULTS, **MLP_DEFAULTS, **DATASET_DEFAULTS}
    layers = [read_config_file(path)] if path else []
    layers.append({k: v for k, v in (overrides or {}).items() if v is not None})
    for layer in layers:
        for key, value in layer.items():
            if key not in _KEY_TYPES:
                raise ConfigError(f"unknown config key '{key}'")
            merged[key] = _check_type(key, value)

    ga = GaConfig(**{k: merged[k] for k in GA_DEFAULTS}).validate()
    mlp = MlpConfig(**{k: merged[k] for k in MLP_DEFAULTS}).validate()
    data = DatasetSpec.from_text(merged['dataset'], merged['samples'], merged['noise'],
                                 merged['data_seed']).validate()
    return ga, mlp, data


def settings_dict(ga, mlp, data):
    """Flat key/value form of the settings, the inverse of ``load_settings``."""
    out = asdict(ga)
    out['seed_genomes'] = list(ga.seed_genomes)
    out.update(asdict(mlp))
    out['hidden_layers'] = list(mlp.hidden_layers)
    out.update({'dataset': data.to_text(), 'samples': data.samples,
                'noise': data.noise, 'data_seed': data.data_seed})
    return out
