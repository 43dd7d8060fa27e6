import csv
import hashlib
import logging
import math
import re
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

TEST_FRACTION = 0.2


class DatasetError(ValueError):
    pass


class FormatError(DatasetError):
    def __init__(self, line, reason):
        super().__init__(f'line {line}: {reason}')
        self.line = line
        self.reason = reason


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # n x d
    labels: np.ndarray    # n, class ids in [0, num_classes)
    train: np.ndarray     # row indices
    test: np.ndarray
    num_classes: int

    @property
    def n(self):
        return len(self.labels)

    @property
    def dim(self):
        return self.features.shape[1]

    def fingerprint(self):
        digest = hashlib.sha256()
        for arr in (self.features, self.labels, self.train, self.test):
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()[:16]

    def validate(self):
        if np.isnan(self.features).any():
            raise DatasetError('features contain NaN')
        if len(np.intersect1d(self.train, self.test)):
            raise DatasetError('train and test splits overlap')
        missing = set(range(self.num_classes)) - set(self.labels[self.train].tolist())
        if missing:
            raise DatasetError(f'classes {sorted(missing)} have no training samples')
        return self


def stratified_split(labels, seed):
    """80/20 split drawn per class, so every class keeps training samples."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        n_test = int(math.floor(TEST_FRACTION * len(members)))
        test.extend(members[:n_test].tolist())
        train.extend(members[n_test:].tolist())
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64)


def _two_moons(n, rng):
    n_outer = n // 2
    n_inner = n - n_outer
    t_outer = np.linspace(0.0, math.pi, n_outer)
    t_inner = np.linspace(0.0, math.pi, n_inner)
    outer = np.column_stack([np.cos(t_outer), np.sin(t_outer)])
    inner = np.column_stack([1.0 - np.cos(t_inner), 0.5 - np.sin(t_inner)])
    return np.vstack([outer, inner]), np.repeat([0, 1], [n_outer, n_inner])


def _circles(n, rng, factor=0.5):
    n_outer = n // 2
    n_inner = n - n_outer
    t_outer = np.linspace(0.0, 2 * math.pi, n_outer, endpoint=False)
    t_inner = np.linspace(0.0, 2 * math.pi, n_inner, endpoint=False)
    inner = factor * np.column_stack([np.cos(t_inner), np.sin(t_inner)])
    outer = np.column_stack([np.cos(t_outer), np.sin(t_outer)])
    # class 0 is the inner ring
    return np.vstack([inner, outer]), np.repeat([0, 1], [n_inner, n_outer])


def _spirals(n, rng, turns=1.5):
    n_first = n // 2
    n_second = n - n_first
    points = []
    for count, phase in ((n_first, 0.0), (n_second, math.pi)):
        t = np.linspace(0.25, 1.0, count) * turns * 2 * math.pi
        r = t / (turns * 2 * math.pi)
        points.append(np.column_stack([r * np.cos(t + phase), r * np.sin(t + phase)]))
    return np.vstack(points), np.repeat([0, 1], [n_first, n_second])


GENERATORS = {
    'two-moons': _two_moons,
    'circles': _circles,
    'spirals': _spirals,
}


def make_synthetic(kind, n, noise, seed):
    if kind not in GENERATORS:
        raise DatasetError(f"unknown synthetic dataset '{kind}'")
    if n < 8:
        raise DatasetError(f'synthetic datasets need at least 8 samples, got {n}')
    rng = np.random.default_rng(seed)
    features, labels = GENERATORS[kind](n, rng)
    if noise > 0:
        features = features + rng.normal(0.0, noise, size=features.shape)
    train, test = stratified_split(labels, rng.integers(2 ** 63))
    return Dataset(features.astype(np.float64), labels.astype(np.int64), train, test, 2).validate()


_FEATURE_COLUMN = re.compile(r'^x(\d+)$')


def _check_header(header):
    if not header or header[-1] != 'label':
        raise FormatError(1, "header must end with a 'label' column")
    expected = [f'x{i}' for i in range(1, len(header))]
    if len(header) < 2 or header[:-1] != expected:
        raise FormatError(1, f"header must read {','.join(expected or ['x1'])},label")


def load_csv(path, seed):
    """Read ``x1,...,xd,label`` rows and split them 80/20 with ``seed``."""
    try:
        f = open(path, 'r', encoding='utf-8', newline='')
    except OSError as e:
        raise DatasetError(f'cannot open dataset {path}: {e.strerror}') from e

    rows, labels = [], []
    with f:
        reader = csv.reader(f)
        try:
            header = next(reader, None)
            _check_header(header)
            dim = len(header) - 1
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != dim + 1:
                    raise FormatError(line, f'expected {dim + 1} columns, found {len(row)}')
                try:
                    values = [float(cell) for cell in row[:-1]]
                except ValueError:
                    raise FormatError(line, f'non-numeric feature in {row[:-1]}') from None
                if not all(math.isfinite(v) for v in values):
                    raise FormatError(line, f'non-finite feature in {row[:-1]}')
                cell = row[-1].strip()
                if not re.fullmatch(r'[+-]?\d+', cell):
                    raise FormatError(line, f"label '{row[-1]}' is not a base-10 integer")
                label = int(cell)
                if label < 0:
                    raise FormatError(line, f'label {label} is negative')
                rows.append(values)
                labels.append(label)
        except UnicodeDecodeError as e:
            raise FormatError(reader.line_num + 1, f'not valid UTF-8 ({e.reason})') from None

    if not rows:
        raise FormatError(2, 'no data rows')
    labels = np.array(labels, dtype=np.int64)
    num_classes = int(labels.max()) + 1
    missing = sorted(set(range(num_classes)) - set(labels.tolist()))
    if missing:
        raise FormatError(len(rows) + 1, f'labels must cover 0..{num_classes - 1}; class {missing[0]} never occurs')

    train, test = stratified_split(labels, seed)
    logger.info(f'Loaded {len(rows)} rows with {num_classes} classes from {path}')
    return Dataset(np.array(rows, dtype=np.float64), labels, train, test, num_classes).validate()


def load_dataset(spec):
    """Build the dataset a ``config.DatasetSpec`` describes."""
    if spec.kind == 'csv':
        return load_csv(spec.path, spec.data_seed)
    return make_synthetic(spec.kind, spec.samples, spec.noise, spec.data_seed)
