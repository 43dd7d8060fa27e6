"""Command line front end: evolve, eval-af, parse, train, clear-cache."""
import csv
import io
import json
import logging
import logging.config
import math
import os
from dataclasses import dataclass

import click
import numpy as np

from config import TOOL_VERSION, Config, ConfigError, DatasetSpec, GaConfig, MlpConfig, load_settings, settings_dict
from datasets import load_dataset
from engine import FitnessEvaluator, run, top
from expr import depth, node_count, parse, serialize
from genome import genome_value_dual, parse_genome
from models import FitnessStore
from trainer import train_and_score
from utils import handle_cli_errors, hash64

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunManifest:
    ga: GaConfig
    mlp: MlpConfig
    data: DatasetSpec
    tool_version: str = TOOL_VERSION

    def to_dict(self):
        return {'tool_version': self.tool_version, **settings_dict(self.ga, self.mlp, self.data)}


def configure_logging(level=None):
    if os.path.exists(Config.LOGGING_CONFIG):
        logging.config.fileConfig(Config.LOGGING_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(format='%(asctime)s %(levelname)-5.5s [%(name)s] %(message)s', datefmt='%H:%M:%S')
    logging.getLogger().setLevel((level or Config.LOG_LEVEL).upper())


def _parse_hidden(ctx, param, value):
    if value is None:
        return None
    try:
        widths = [int(part) for part in value.split(',')]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers such as 16,16, got '{value}'")
    return widths


def _options(*decorators):
    def apply(f):
        for decorator in reversed(decorators):
            f = decorator(f)
        return f
    return apply


training_options = _options(
    click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='JSON config file or runlog.jsonl.'),
    click.option('--seed', type=int, help='Run seed.'),
    click.option('--dataset', help='two-moons | circles | spirals | csv:PATH'),
    click.option('--samples', type=int, help='Synthetic dataset size.'),
    click.option('--noise', type=float, help='Synthetic dataset noise.'),
    click.option('--data-seed', 'data_seed', type=int, help='Dataset generation and split seed.'),
    click.option('--epochs', type=int),
    click.option('--lr', 'learning_rate', type=float),
    click.option('--hidden', 'hidden_layers', callback=_parse_hidden, help='Hidden widths, e.g. 16,16.'),
    click.option('--batch', 'batch_size', type=int),
    click.option('--init-seed', 'init_seed', type=int, help='Weight initialisation seed.'),
)

ga_options = _options(
    click.option('--pop', 'population_size', type=int),
    click.option('--gens', 'generations', type=int),
    click.option('--elite', 'elite_fraction', type=float),
    click.option('--p-hybrid', 'p_hybrid', type=float),
    click.option('--p-mutate', 'p_mutate', type=float),
    click.option('--p-select-coin', 'p_select_coin', type=float),
    click.option('--max-depth', 'max_depth', type=int),
    click.option('--seed-genome', 'seed_genomes', multiple=True, help='Genome placed in the initial population.'),
)


def _open_store(url):
    url = url or Config.CACHE_DATABASE_URL
    return FitnessStore(url) if url else None


def _write_text(path, text):
    tmp = f'{path}.tmp'
    with open(tmp, 'w', encoding='utf-8') as f:
        f.write(text)
    os.replace(tmp, path)


@click.group()
@click.option('--log-level', default=None, help='Override AFEVOLVE_LOG_LEVEL.')
def cli(log_level):
    configure_logging(log_level)


@cli.command()
@training_options
@ga_options
@click.option('--workers', type=click.IntRange(min=1), default=1, help='Parallel fitness evaluations.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Output directory.')
@click.option('--cache-db', 'cache_db', default=None, help='SQLAlchemy URL of a persistent fitness store.')
@click.option('--top', 'top_k', type=click.IntRange(min=0), default=6, help='Final genomes to list.')
@handle_cli_errors
def evolve(config_path, workers, out_dir, cache_db, top_k, **overrides):
    """Evolve piecewise activation functions."""
    overrides['seed_genomes'] = list(overrides['seed_genomes']) or None
    ga, mlp, data_spec = load_settings(config_path, overrides)
    manifest = RunManifest(ga, mlp, data_spec)
    data = load_dataset(data_spec)
    store = _open_store(cache_db)
    evaluator = FitnessEvaluator(data, mlp, ga.seed, workers=workers, store=store)

    logger.info(f'Evolving on {data_spec.to_text()}: population {ga.population_size}, '
                f'{ga.generations} generations, seed {ga.seed}')
    click.echo(f"{'Gen':<5} {'Best':<8} {'Mean':<8} {'Median':<8} {'Best genome'}")
    click.echo('-' * 60)

    def report(pop):
        snap = pop.snapshot()
        click.echo(f"{snap['generation']:<5} {snap['best_fitness']:<8.4f} {snap['mean_fitness']:<8.4f} "
                   f"{snap['median_fitness']:<8.4f} {snap['best_genome']}")

    try:
        log = run(ga, evaluator, manifest.to_dict(), on_generation=report)
    finally:
        if store:
            store.close()

    if top_k:
        click.echo(f'\nTop {top_k} functions:')
        for rank, member in enumerate(top(log.population, top_k), start=1):
            click.echo(f'{rank:<3} {member.fitness:<8.4f} {member.genome_key}')
    click.echo(f'\n{log.evaluations} evaluations, {log.cache_hits} cache hits')

    out_dir = out_dir or Config.OUTPUT_DIR
    os.makedirs(out_dir, exist_ok=True)
    _write_text(os.path.join(out_dir, 'runlog.jsonl'), log.to_jsonl())
    _write_text(os.path.join(out_dir, 'best.genome'),
                f'{log.best_genome}\n# manifest {json.dumps(log.manifest)}\n')
    logger.info(f'Wrote runlog.jsonl and best.genome to {out_dir}')


@cli.command('eval-af')
@click.argument('genome_text')
@click.option('--xmin', type=float, default=-5.0, show_default=True)
@click.option('--xmax', type=float, default=5.0, show_default=True)
@click.option('--step', type=float, default=0.1, show_default=True)
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None, help='Write here instead of stdout.')
@handle_cli_errors
def eval_af(genome_text, xmin, xmax, step, csv_path):
    """Tabulate a genome's value and derivative over a grid."""
    genome = parse_genome(genome_text)
    if not xmin < xmax:
        raise ConfigError(f'xmin ({xmin}) must be below xmax ({xmax})')
    if not step > 0:
        raise ConfigError(f'step must be positive, got {step}')

    count = math.floor((xmax - xmin) / step + 1e-9) + 1
    xs = xmin + step * np.arange(count)
    dual = genome_value_dual(genome, xs)
    rows = [['x', 'value', 'derivative']]
    rows.extend([repr(float(x)), repr(float(v)), repr(float(d))] for x, v, d in zip(xs, dual.value, dual.deriv))

    buf = io.StringIO()
    csv.writer(buf, lineterminator='\n').writerows(rows)
    if csv_path:
        manifest = {'tool_version': TOOL_VERSION, 'genome': genome.key, 'xmin': xmin, 'xmax': xmax, 'step': step}
        _write_text(csv_path, f'{buf.getvalue()}# manifest {json.dumps(manifest)}\n')
    else:
        click.echo(buf.getvalue(), nl=False)


@cli.command('parse')
@click.argument('text', default='')
@handle_cli_errors
def parse_cmd(text):
    """Check a genome or expression and print its canonical form."""
    if '|' in text:
        genome = parse_genome(text)
        roundtrip = parse_genome(genome.key) == genome
        click.echo(f'canonical: {genome.key}')
        for side, gene in (('left', genome.left), ('right', genome.right)):
            click.echo(f'{side}: nodes {node_count(gene)}, depth {depth(gene)}')
        click.echo(f'nodes: {node_count(genome.left)}+{node_count(genome.right)}')
        click.echo(f'depth: {genome.depth}')
    else:
        tree = parse(text)
        roundtrip = parse(serialize(tree)) == tree
        click.echo(f'canonical: {serialize(tree)}')
        click.echo(f'nodes: {node_count(tree)}')
        click.echo(f'depth: {depth(tree)}')
    if not roundtrip:
        click.echo('round trip failed', err=True)
        raise SystemExit(1)


@cli.command()
@click.argument('genome_text')
@training_options
@handle_cli_errors
def train(genome_text, config_path, **overrides):
    """Train one genome and print its fitness report as JSON."""
    genome = parse_genome(genome_text)
    ga, mlp, data_spec = load_settings(config_path, overrides)
    data = load_dataset(data_spec)
    report = train_and_score(genome, data, mlp, shuffle_seed=hash64(ga.seed, genome.key))
    manifest = RunManifest(ga, mlp, data_spec)
    click.echo(json.dumps({'manifest': manifest.to_dict(), 'genome': genome.key, 'report': report.to_dict()}, indent=2))


@cli.command('clear-cache')
@click.option('--cache-db', 'cache_db', default=None, help='SQLAlchemy URL of the fitness store.')
@handle_cli_errors
def clear_cache(cache_db):
    """Delete every stored evaluation."""
    store = _open_store(cache_db)
    if store is None:
        raise click.UsageError('no fitness store configured; pass --cache-db or set AFEVOLVE_CACHE_DATABASE_URL')
    try:
        click.echo(f'Deleted {store.clear()} stored evaluations')
    finally:
        store.close()
