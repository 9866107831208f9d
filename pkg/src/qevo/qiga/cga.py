"""Conventional GA baselines for the 0-1 knapsack.

Eight variants share one loop (roulette selection, one-point crossover, per-gene
mutation, full replacement) and differ only in how a chromosome is scored:

* ``pen1``/``pen2``/``pen3``: bit strings scored by profit minus a penalty;
* ``rep1``/``rep2``: bit strings scored by the profit of their repaired copy
  (random or greedy repair), which replaces the original with probability 5%;
* ``dec1``/``dec2``: ordinal vectors decoded against the input-order or the
  ratio-sorted item list;
* ``pen2+rep1``: linear-penalty scoring where each chromosome is replaced by
  its random repair with probability 5% before scoring.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import knapsack
from .knapsack import GREEDY, RANDOM, KnapsackInstance

VARIANTS = ("pen1", "pen2", "pen3", "rep1", "rep2", "dec1", "dec2", "pen2+rep1")


@dataclass(frozen=True)
class CGAParams:
    population_size: int = 100
    generations: int = 500
    crossover_prob: float = 0.65
    mutation_prob: float = 0.05
    writeback_prob: float = 0.05

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob", "writeback_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class CGAResult:
    variant: str
    best: np.ndarray  # best feasible bit string found
    best_profit: float
    best_fitness: float  # best raw score, penalized for the pen variants
    history: np.ndarray  # best feasible profit after each generation
    seed: Optional[int] = None


def selection_weights(fit: np.ndarray) -> np.ndarray:
    """Fitness-proportional weights; negative scores shift everything up by the minimum."""
    lo = fit.min()
    return fit - lo if lo < 0 else fit


def _roulette(fit: np.ndarray, k: int, rng) -> np.ndarray:
    w = selection_weights(fit)
    total = w.sum()
    if not total > 0:
        return rng.integers(len(fit), size=k)
    cum = np.cumsum(w)
    return np.minimum(np.searchsorted(cum, rng.random(k) * cum[-1], side="right"), len(fit) - 1)


def one_point_crossover(a: np.ndarray, b: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    n, m = a.shape
    cut = rng.integers(1, m, size=n)[:, None] if m > 1 else np.ones((n, 1), dtype=int)
    tail = np.arange(m) >= cut
    return np.where(tail, b, a), np.where(tail, a, b)


def run_cga(inst: KnapsackInstance, variant: str, seed=None, params: CGAParams = CGAParams()
            ) -> CGAResult:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    rng = np.random.default_rng(seed)
    N, m = params.population_size, inst.m
    ordinal = variant.startswith("dec")
    if ordinal:
        pop = knapsack.random_ordinal(N, m, rng)
        hi = m - np.arange(m)
    else:
        pop = rng.integers(0, 2, (N, m)).astype(np.int8)

    def score(pop):
        """Scores, the bit strings they belong to, and the population after write-back."""
        if ordinal:
            X = knapsack.batch_decode_ordinal(pop, inst, RANDOM if variant == "dec1" else GREEDY)
            return knapsack.profit(X, inst), X, pop
        if variant.startswith("rep"):
            R = knapsack.batch_repair(pop, inst, RANDOM if variant == "rep1" else GREEDY, rng)
            back = rng.random(N) < params.writeback_prob
            return knapsack.profit(R, inst), R, np.where(back[:, None], R, pop)
        if variant == "pen2+rep1":
            R = knapsack.batch_repair(pop, inst, RANDOM, rng)
            back = rng.random(N) < params.writeback_prob
            pop = np.where(back[:, None], R, pop)
            return knapsack.penalty_fitness(pop, inst, 2), pop, pop
        return knapsack.penalty_fitness(pop, inst, int(variant[3])), pop, pop

    best, best_profit, best_fit = np.zeros(m, dtype=np.int8), 0.0, -np.inf
    history = np.empty(params.generations)

    def record(fit, X):
        nonlocal best, best_profit, best_fit
        best_fit = max(best_fit, float(fit.max()))
        prof = np.where(knapsack.is_feasible(X, inst), knapsack.profit(X, inst), -np.inf)
        i = int(np.argmax(prof))
        if prof[i] > best_profit:
            best, best_profit = X[i].astype(np.int8).copy(), float(prof[i])

    fit, X, pop = score(pop)
    record(fit, X)
    for t in range(params.generations):
        parents = pop[_roulette(fit, 2 * ((N + 1) // 2), rng)]
        pa, pb = parents[0::2], parents[1::2]
        ca, cb = one_point_crossover(pa, pb, rng)
        cross = (rng.random(len(pa)) < params.crossover_prob)[:, None]
        pop = np.concatenate([np.where(cross, ca, pa), np.where(cross, cb, pb)])[:N]
        hit = rng.random(pop.shape) < params.mutation_prob
        if ordinal:
            redraw = (np.floor(rng.random(pop.shape) * hi) + 1).astype(np.int64)
            pop = np.where(hit, redraw, pop)
        else:
            pop = np.where(hit, 1 - pop, pop).astype(np.int8)
        fit, X, pop = score(pop)
        record(fit, X)
        history[t] = best_profit
    return CGAResult(variant, best, best_profit, best_fit, history, seed)
