"""Evolutionary search for per-block extremal energies.

An individual is the vector of gen-set input words of one harness block.  The
loop is generational: tournament selection, even-odd crossover, XOR-mask
mutation and elitism.  The initial population counts as generation 1.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .cfg import HarnessBlock
from .simkernel import EnergyModelParams, run_block_batch

Genes = tuple[int, ...]
Oracle = Callable[[Sequence[Genes]], list[Fraction]]

UPPER, LOWER = "upper", "lower"
DIRECTIONS = (UPPER, LOWER)


@dataclass(frozen=True)
class EaConfig:
    population_size: int = 64
    max_generations: int = 20
    stagnation_limit: int = 4
    crossover_rate: float = 0.9
    mutation_rate: float = 0.3
    tournament_size: int = 3
    elitism_count: int = 2
    rng_seed: int = 0
    # inputs are drawn from the low ``gene_bits`` bits (32 = unrestricted words)
    gene_bits: int = 32

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if min(self.max_generations, self.stagnation_limit, self.tournament_size) < 1:
            raise ValueError("generation limits and tournament size must be at least 1")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count out of range")
        if not 1 <= self.gene_bits <= 32:
            raise ValueError("gene_bits must be in 1..32")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Individual:
    genes: Genes
    fitness: Fraction | None = None

    def __len__(self) -> int:
        return len(self.genes)


@dataclass(frozen=True)
class BlockBound:
    block_id: str
    direction: str
    value_pJ: Fraction
    witness: Genes
    generations_run: int
    evaluations: int
    # best fitness after each generation
    history: tuple[Fraction, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "block_id": self.block_id,
            "direction": self.direction,
            "value_pJ": str(self.value_pJ),
            "witness": list(self.witness),
            "generations_run": self.generations_run,
            "evaluations": self.evaluations,
            "history": [str(h) for h in self.history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlockBound":
        return cls(
            d["block_id"], d["direction"], Fraction(d["value_pJ"]), tuple(d["witness"]),
            d["generations_run"], d["evaluations"], tuple(Fraction(h) for h in d["history"]),
        )


def block_rng(cfg: EaConfig, key: str) -> np.random.Generator:
    """Independent stream per (seed, block, direction) so results do not depend on block order."""
    return np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, zlib.crc32(key.encode())]))


def _corners(n: int, bits: int) -> list[Genes]:
    ones = (1 << bits) - 1
    out = [
        (0,) * n,
        (ones,) * n,
        (0xAAAAAAAA & ones,) * n,
        (0x55555555 & ones,) * n,
    ]
    for j in range(n):
        out.append(tuple(ones if i == j else 0 for i in range(n)))
        out.append(tuple(0 if i == j else ones for i in range(n)))
    return list(dict.fromkeys(out))


def seed_population(
    n_inputs: int, cfg: EaConfig, rng: np.random.Generator | None = None
) -> list[Individual]:
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    if n_inputs == 0:
        return [Individual(()) for _ in range(cfg.population_size)]
    pop = [Individual(g) for g in _corners(n_inputs, cfg.gene_bits)[: cfg.population_size]]
    rest = cfg.population_size - len(pop)
    if rest:
        draws = rng.integers(0, 1 << cfg.gene_bits, size=(rest, n_inputs), dtype=np.uint64)
        pop.extend(Individual(tuple(int(v) for v in row)) for row in draws)
    return pop


def crossover_even_odd(p1: Individual, p2: Individual) -> tuple[Individual, Individual]:
    if len(p1) != len(p2):
        raise ValueError("parents differ in length")
    c1 = tuple(a if i % 2 == 0 else b for i, (a, b) in enumerate(zip(p1.genes, p2.genes)))
    c2 = tuple(b if i % 2 == 0 else a for i, (a, b) in enumerate(zip(p1.genes, p2.genes)))
    return Individual(c1), Individual(c2)


def apply_masks(ind: Individual, masks: Sequence[int]) -> Individual:
    return Individual(tuple(g ^ k for g, k in zip(ind.genes, masks)))


def mutate_xor(ind: Individual, rng: np.random.Generator, bits: int = 32) -> Individual:
    masks = rng.integers(0, 1 << bits, size=len(ind), dtype=np.uint64)
    return apply_masks(ind, [int(k) for k in masks])


def block_oracle(b: HarnessBlock, m: EnergyModelParams, word_bits: int = 32) -> Oracle:
    """Batch fitness function backed by the vectorised simulator."""

    def oracle(genes: Sequence[Genes]) -> list[Fraction]:
        arr = np.array(genes, dtype=np.uint64).reshape(len(genes), len(b.inputs))
        return [int(u) * m.unit for u in run_block_batch(b, arr, m, word_bits)]

    return oracle


def optimize_block(
    b: HarnessBlock,
    direction: str,
    cfg: EaConfig,
    oracle: Oracle,
    rng: np.random.Generator | None = None,
) -> BlockBound:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    sign = 1 if direction == UPPER else -1
    if rng is None:
        rng = block_rng(cfg, f"{b.id}/{direction}")
    k = len(b.inputs)
    if k == 0:
        value = oracle([()])[0]
        return BlockBound(b.id, direction, value, (), 1, 1, (value,))

    memo: dict[Genes, Fraction] = {}

    def evaluate(pop: list[Individual]) -> None:
        todo = list(dict.fromkeys(i.genes for i in pop if i.genes not in memo))
        if todo:
            memo.update(zip(todo, oracle(todo)))
        for ind in pop:
            ind.fitness = memo[ind.genes]

    def best_index(pop: list[Individual], idxs) -> int:
        # first index wins ties
        best = None
        for i in idxs:
            if best is None or sign * pop[i].fitness > sign * pop[best].fitness:
                best = i
        return best

    n = cfg.population_size
    pop = seed_population(k, cfg, rng)
    evaluate(pop)
    champion = pop[best_index(pop, range(n))]
    history = [champion.fitness]
    generations, stagnant = 1, 0
    while generations < cfg.max_generations and stagnant < cfg.stagnation_limit:
        order = sorted(range(n), key=lambda i: (-sign * pop[i].fitness, i))
        nxt = [Individual(pop[i].genes, pop[i].fitness) for i in order[: cfg.elitism_count]]
        while len(nxt) < n:
            p1 = pop[best_index(pop, rng.integers(0, n, size=cfg.tournament_size))]
            p2 = pop[best_index(pop, rng.integers(0, n, size=cfg.tournament_size))]
            if rng.random() < cfg.crossover_rate:
                c1, c2 = crossover_even_odd(p1, p2)
            else:
                c1, c2 = Individual(p1.genes), Individual(p2.genes)
            for c in (c1, c2):
                if rng.random() < cfg.mutation_rate:
                    c = mutate_xor(c, rng, cfg.gene_bits)
                nxt.append(c)
        pop = nxt[:n]
        evaluate(pop)
        generations += 1
        cand = pop[best_index(pop, range(n))]
        if sign * cand.fitness > sign * champion.fitness:
            champion, stagnant = cand, 0
        else:
            stagnant += 1
        history.append(champion.fitness)
    return BlockBound(
        b.id, direction, champion.fitness, champion.genes, generations, len(memo), tuple(history)
    )


class EaCache:
    """JSON file of block bounds keyed by block content, model, EA config and direction."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.entries: dict[str, dict] = {}
        if self.path and self.path.exists():
            self.entries = json.loads(self.path.read_text())

    @staticmethod
    def key(b: HarnessBlock, m: EnergyModelParams, cfg: EaConfig, direction: str, word_bits: int) -> str:
        text = "\n".join(str(i) for i in b.instructions)
        text += "|" + ",".join(str(x) for x in b.inputs)
        text += f"|{m.digest()}|{cfg.digest()}|{direction}|{word_bits}"
        return hashlib.sha256(text.encode()).hexdigest()[:24]

    def get(self, key: str, block_id: str) -> BlockBound | None:
        d = self.entries.get(key)
        if d is None:
            return None
        bb = BlockBound.from_dict(d)
        # identical blocks in different places share an entry
        return BlockBound(block_id, bb.direction, bb.value_pJ, bb.witness,
                          bb.generations_run, bb.evaluations, bb.history)

    def put(self, key: str, bound: BlockBound) -> None:
        self.entries[key] = bound.to_dict()

    def save(self) -> None:
        if self.path:
            self.path.write_text(json.dumps(self.entries, indent=1, sort_keys=True) + "\n")


def optimize(
    b: HarnessBlock,
    m: EnergyModelParams,
    cfg: EaConfig,
    direction: str,
    word_bits: int = 32,
    cache: EaCache | None = None,
) -> BlockBound:
    """Cached :func:`optimize_block` with the simulator as oracle."""
    key = EaCache.key(b, m, cfg, direction, word_bits) if cache is not None else None
    if cache is not None:
        hit = cache.get(key, b.id)
        if hit is not None:
            return hit
    # the rng stream depends on block content, not on its id, so cached and fresh runs agree
    rng = block_rng(cfg, key or EaCache.key(b, m, cfg, direction, word_bits))
    bound = optimize_block(b, direction, cfg, block_oracle(b, m, word_bits), rng)
    if cache is not None:
        cache.put(key, bound)
    return bound
