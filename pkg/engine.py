"""Genetic algorithm main loop and cached, parallel fitness evaluation."""
import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from config import ConfigError
from genome import CANDIDATES, Genome, RngStream, crossover, mutate, parse_genome
from trainer import FitnessReport, train_and_score
from utils import config_hash, hash64

logger = logging.getLogger(__name__)


class InsufficientParents(ValueError):
    pass


@dataclass(frozen=True)
class EvaluatedGenome:
    genome: Genome
    fitness: float
    report: FitnessReport
    genome_key: str

    @classmethod
    def from_report(cls, genome, report):
        return cls(genome, report.fitness, report, genome.key)

    def to_dict(self):
        return {'genome': self.genome_key, 'fitness': self.fitness, 'valid': self.report.valid}


def rank_key(member):
    # ties go to the simpler genome
    return (-member.fitness, member.genome.complexity, member.genome_key)


@dataclass
class Population:
    members: list
    generation: int = 0

    @property
    def best(self):
        return self.members[0]

    @classmethod
    def ranked(cls, members, generation, size=None):
        ordered = sorted(members, key=rank_key)
        return cls(ordered[:size] if size else ordered, generation)

    def snapshot(self):
        fitnesses = [m.fitness for m in self.members]
        return {
            'generation': self.generation,
            'best_genome': self.best.genome_key,
            'best_fitness': self.best.fitness,
            'mean_fitness': statistics.fmean(fitnesses),
            'median_fitness': statistics.median(fitnesses),
            'population': [m.to_dict() for m in self.members],
        }


class FitnessEvaluator:
    """Scores genomes, caching by genome key within a run.

    Distinct new genomes are trained on up to ``workers`` threads; results
    are merged back in request order, so the outcome does not depend on the
    worker count. ``evaluations`` counts distinct keys, ``cache_hits``
    repeated requests. An optional ``models.FitnessStore`` persists reports
    across runs without affecting either counter.
    """

    def __init__(self, dataset, mlp_config, run_seed, workers=1, store=None, score=train_and_score):
        self.dataset = dataset
        self.mlp_config = mlp_config
        self.run_seed = run_seed
        self.workers = max(1, workers)
        self.store = store
        self.score = score
        self.config_hash = config_hash(asdict(mlp_config), dataset.fingerprint(), run_seed)
        self.evaluations = 0
        self.cache_hits = 0
        self._cache = {}

    def _train(self, genome):
        return self.score(genome, self.dataset, self.mlp_config, shuffle_seed=hash64(self.run_seed, genome.key))

    def __call__(self, genomes):
        pending = {}
        for g in genomes:
            if g.key in self._cache or g.key in pending:
                self.cache_hits += 1
            else:
                pending[g.key] = g
        self.evaluations += len(pending)

        fresh = []
        for key, g in pending.items():
            stored = self.store.lookup(self.config_hash, key) if self.store else None
            if stored is not None:
                logger.debug(f'Fitness store hit for {key}')
                self._cache[key] = stored
            else:
                fresh.append(g)

        if fresh:
            if self.workers > 1 and len(fresh) > 1:
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    reports = list(pool.map(self._train, fresh))
            else:
                reports = [self._train(g) for g in fresh]
            for g, report in zip(fresh, reports):
                self._cache[g.key] = report
            if self.store:
                self.store.save_many(self.config_hash, [(g.key, r) for g, r in zip(fresh, reports)])

        return [EvaluatedGenome.from_report(g, self._cache[g.key]) for g in genomes]


def initialize(cfg, rng, evaluator):
    genomes = [parse_genome(text) for text in cfg.seed_genomes]
    for g in genomes:
        if g.depth > cfg.max_depth:
            raise ConfigError(f'seed genome {g} has depth {g.depth}, above max_depth {cfg.max_depth}')
    while len(genomes) < cfg.population_size:
        genomes.append(rng.choice(CANDIDATES))
    return Population.ranked(evaluator(genomes), 0)


def select(pop, cfg, rng):
    n_elite = cfg.elite_count
    parents = [m.genome for m in pop.members[:n_elite]]
    for member in pop.members[n_elite:]:
        if rng.coin(cfg.p_select_coin):
            parents.append(mutate(member.genome, rng, p_mutate=1.0))
    return parents


def breed(parents, cfg, rng):
    n = len(parents)
    if n < 2:
        raise InsufficientParents(f'breeding needs at least 2 parents, got {n}')
    target = cfg.population_size - n
    children = []
    while len(children) < target:
        i = rng.index(n)
        j = rng.index(n - 1)
        if j >= i:
            j += 1
        for child in crossover(parents[i], parents[j], rng, cfg.p_hybrid, cfg.max_depth):
            children.append(mutate(child, rng, cfg.p_mutate))
    # odd remainder: the last offspring of the final pair is dropped
    return children[:max(target, 0)]


def step(pop, cfg, rng, evaluator):
    parents = select(pop, cfg, rng)
    children = breed(parents, cfg, rng)
    members = evaluator(parents + children)
    nxt = Population.ranked(members, pop.generation + 1, cfg.population_size)
    logger.info(f'Generation {nxt.generation}: {len(parents)} parents, {len(children)} children, '
                f'best {nxt.best.fitness:.4f} {nxt.best.genome_key}')
    return nxt


def top(pop, k=6):
    """The k best distinct genomes of a population."""
    seen, best = set(), []
    for m in pop.members:
        if m.genome_key not in seen:
            seen.add(m.genome_key)
            best.append(m)
        if len(best) == k:
            break
    return best


@dataclass
class RunLog:
    manifest: dict
    records: list = field(default_factory=list)
    evaluations: int = 0
    cache_hits: int = 0
    population: Population | None = None

    @property
    def best_genome(self):
        return self.records[-1]['best_genome']

    def best_fitness_trace(self):
        return [r['best_fitness'] for r in self.records]

    def to_jsonl(self):
        lines = [json.dumps({'manifest': self.manifest})]
        for i, record in enumerate(self.records):
            if i == len(self.records) - 1:
                record = {**record, 'evaluations': self.evaluations, 'cache_hits': self.cache_hits}
            lines.append(json.dumps(record))
        return '\n'.join(lines) + '\n'


def run(cfg, evaluator, manifest=None, on_generation=None):
    cfg.validate()
    rng = RngStream(cfg.seed)
    pop = initialize(cfg, rng, evaluator)
    logger.info(f'Initial population of {len(pop.members)}: best {pop.best.fitness:.4f} {pop.best.genome_key}')
    log = RunLog(manifest or {})
    log.records.append(pop.snapshot())
    if on_generation:
        on_generation(pop)

    for _ in range(cfg.generations):
        pop = step(pop, cfg, rng, evaluator)
        log.records.append(pop.snapshot())
        if on_generation:
            on_generation(pop)

    log.evaluations = getattr(evaluator, 'evaluations', 0)
    log.cache_hits = getattr(evaluator, 'cache_hits', 0)
    log.population = pop
    return log
