"""Generational genetic algorithm over fixed-length bit strings.

Chromosomes are 1-D boolean numpy arrays. Every chromosome that leaves an
operator has at least one set bit: all-zero strings are repaired by switching
on one uniformly chosen bit, which keeps downstream fitness functions total.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DimensionError, FitnessError, StateError


@dataclass(frozen=True)
class GaConfig:
    """GA parameters. ``chromosome_length`` may be left unset until the data is known."""

    chromosome_length: Optional[int] = None
    population_size: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_rate: Optional[float] = None  # None -> 1 / chromosome_length
    tournament_size: int = 3
    elite_count: int = 1
    init_one_prob: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.chromosome_length is not None:
            if self.chromosome_length < 1:
                raise ConfigError("chromosome_length must be at least 1")
            if self.mutation_rate is None:
                object.__setattr__(self, "mutation_rate", 1.0 / self.chromosome_length)
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.generations < 1:
            raise ConfigError("generations must be at least 1")
        for name in ("crossover_rate", "mutation_rate", "init_one_prob"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigError("tournament_size must lie in [1, population_size]")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigError("elite_count must lie in [0, population_size)")

    def resolved(self, chromosome_length: int, seed: Optional[int] = None) -> "GaConfig":
        """Copy with the length fixed; an unset mutation rate becomes ``1 / length``."""
        return replace(
            self,
            chromosome_length=chromosome_length,
            seed=self.seed if seed is None else seed,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GaTrace:
    best_fitness: list = field(default_factory=list)
    mean_fitness: list = field(default_factory=list)
    best_popcount: list = field(default_factory=list)

    def __len__(self):
        return len(self.best_fitness)

    def append(self, best: float, mean: float, popcount: int):
        self.best_fitness.append(float(best))
        self.mean_fitness.append(float(mean))
        self.best_popcount.append(int(popcount))

    def rows(self):
        for g, row in enumerate(zip(self.best_fitness, self.mean_fitness, self.best_popcount)):
            yield (g, *row)

    def to_dict(self) -> dict:
        return {
            "best_fitness": self.best_fitness,
            "mean_fitness": self.mean_fitness,
            "best_popcount": self.best_popcount,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["generation", "best_fitness", "mean_fitness", "best_popcount"])
            for g, best, mean, pc in self.rows():
                w.writerow([g, repr(best), repr(mean), pc])


def chromosome_key(c: np.ndarray) -> bytes:
    return np.packbits(np.asarray(c, dtype=bool)).tobytes() + len(c).to_bytes(4, "little")


def chromosome_digest(c: np.ndarray) -> int:
    """Process-independent 64-bit hash of a chromosome (Python's ``hash`` is salted)."""
    return int.from_bytes(hashlib.sha256(chromosome_key(c)).digest()[:8], "little")


def repair(c: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if not c.any():
        c = c.copy()
        c[rng.integers(c.size)] = True
    return c


def init_population(cfg: GaConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """``population_size x chromosome_length`` boolean matrix, each bit set with ``init_one_prob``."""
    if cfg.chromosome_length is None:
        raise ConfigError("chromosome_length is not set")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    pop = rng.random((cfg.population_size, cfg.chromosome_length)) < cfg.init_one_prob
    for i in range(cfg.population_size):
        pop[i] = repair(pop[i], rng)
    return pop


def _better(fa, pa, ia, fb, pb, ib) -> bool:
    """Ordering shared by selection and elitism: fitness, then fewer genes, then index."""
    return (fa, -pa, -ia) > (fb, -pb, -ib)


def tournament_select(population, fitnesses, tournament_size: int, rng: np.random.Generator) -> np.ndarray:
    """Winner of ``tournament_size`` uniform draws with replacement."""
    n = len(population)
    if n == 0:
        raise StateError("empty population")
    if len(fitnesses) != n:
        raise DimensionError("fitnesses not aligned with population")
    draws = rng.integers(n, size=tournament_size)
    best = int(draws[0])
    for j in draws[1:]:
        j = int(j)
        if _better(fitnesses[j], int(np.count_nonzero(population[j])), j,
                   fitnesses[best], int(np.count_nonzero(population[best])), best):
            best = j
    return population[best]


def uniform_crossover(a, b, crossover_rate: float, rng: np.random.Generator):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"parent lengths differ: {a.size} vs {b.size}")
    if rng.random() >= crossover_rate:
        return a.copy(), b.copy()
    swap = rng.random(a.size) < 0.5
    return np.where(swap, b, a), np.where(swap, a, b)


def mutate(c, mutation_rate: float, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(c, dtype=bool)
    flips = rng.random(c.size) < mutation_rate
    return repair(c ^ flips, rng)


class CachedFitness:
    """Memoises a chromosome -> fitness function and counts real evaluations."""

    def __init__(self, fn: Callable[[np.ndarray], float]):
        self.fn = fn
        self.cache: dict[bytes, float] = {}
        self.calls = 0

    def __call__(self, c: np.ndarray) -> float:
        key = chromosome_key(c)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        v = float(self.fn(c))
        self.calls += 1
        if math.isnan(v):
            on = np.flatnonzero(c).tolist()
            raise FitnessError(f"fitness returned NaN for chromosome with bits {on}")
        self.cache[key] = v
        return v


def _rank(pop: np.ndarray, fits: np.ndarray) -> list[int]:
    pcs = pop.sum(axis=1)
    return sorted(range(len(pop)), key=lambda i: (-fits[i], pcs[i], i))


def evolve(cfg: GaConfig, fitness: Callable[[np.ndarray], float]):
    """Maximise ``fitness`` and return ``(best_chromosome, trace)``.

    Each generation is evaluated, recorded, and (except after the last one)
    replaced by ``elite_count`` unchanged elites plus children bred by
    tournament selection, uniform crossover and bit-flip mutation.
    """
    if cfg.chromosome_length is None:
        raise ConfigError("chromosome_length is not set")
    rng = np.random.default_rng(cfg.seed)
    cached = fitness if isinstance(fitness, CachedFitness) else CachedFitness(fitness)
    pop = init_population(cfg, rng)
    trace = GaTrace()
    best_c, best_f = None, -math.inf

    for gen in range(cfg.generations):
        fits = np.array([cached(c) for c in pop])
        order = _rank(pop, fits)
        top = order[0]
        trace.append(fits[top], fits.mean(), int(pop[top].sum()))
        if best_c is None or _better(fits[top], int(pop[top].sum()), 0,
                                     best_f, int(best_c.sum()), 0):
            best_c, best_f = pop[top].copy(), fits[top]
        if gen == cfg.generations - 1:
            break

        children = [pop[i].copy() for i in order[: cfg.elite_count]]
        while len(children) < cfg.population_size:
            a = tournament_select(pop, fits, cfg.tournament_size, rng)
            b = tournament_select(pop, fits, cfg.tournament_size, rng)
            for child in uniform_crossover(a, b, cfg.crossover_rate, rng):
                if len(children) < cfg.population_size:
                    children.append(mutate(child, cfg.mutation_rate, rng))
        pop = np.array(children)

    return best_c, trace
