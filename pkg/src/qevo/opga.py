"""Real-coded GA that learns a linear operator from example input/output pairs.

Each individual is an ``n x n`` real matrix with entries in ``[-1, 1]``.  The
error of a matrix is the mean 1-norm residual over the learning set and the
fitness is ``exp(-error)``.  The population is sorted by error every
generation, the ``Ne`` best are copied unchanged and the rest are refilled by
entry-wise uniform crossover and sparse additive perturbation drawn from the
top ``Ps * N`` individuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class LearningSet:
    """``m`` example pairs stored row-wise: ``inputs[i] -> targets[i]``."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if x.shape != y.shape:
            raise ValueError(f"inputs {x.shape} and targets {y.shape} differ in shape")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("learning set contains non-finite values")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.inputs.shape[1]

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @classmethod
    def from_pairs(cls, pairs) -> "LearningSet":
        xs, ys = zip(*pairs)
        return cls(np.array(xs), np.array(ys))

    @classmethod
    def load(cls, path) -> "LearningSet":
        """Text format: ``n m`` on the first line, then ``m`` lines of ``2n`` reals."""
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
        n, m = (int(t) for t in lines[0].split())
        rows = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
        if rows.shape != (m, 2 * n):
            raise ValueError(f"{path}: expected {m} rows of {2 * n} values, got {rows.shape}")
        return cls(rows[:, :n], rows[:, n:])

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(f"{self.n} {self.m}\n")
            for x, y in zip(self.inputs, self.targets):
                fh.write(" ".join(repr(float(v)) for v in np.concatenate([x, y])) + "\n")


def quant02n() -> LearningSet:
    """Two Hadamard examples with orthonormal inputs."""
    return LearningSet(
        [np.array([2, 1]) / np.sqrt(5), np.array([-2, 4]) / np.sqrt(20)],
        [np.array([3, 1]) / np.sqrt(10), np.array([2, -6]) / np.sqrt(40)])


def example002() -> LearningSet:
    """Two Hadamard examples whose inputs are not orthonormal."""
    return LearningSet(
        [np.array([1, 2]) / np.sqrt(5), np.array([1, 1]) / np.sqrt(2)],
        [np.array([3, -1]) / np.sqrt(10), np.array([2, 0]) / np.sqrt(4)])


LEARNING_SETS: dict[str, Callable[[], LearningSet]] = {
    "quant02n": quant02n,
    "example002": example002,
    "identity2": lambda: LearningSet(np.eye(2), np.eye(2)),
}


@dataclass(frozen=True)
class GAParams:
    population_size: int = 200
    generations: int = 100
    crossover_prob: float = 0.85
    mutation_prob: float = 0.95
    selection_pressure: float = 0.30
    elite_count: int = 30
    mutation_number: int = 1
    perturbation: tuple[float, float] = (0.001, 0.1)

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob", "selection_pressure"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must satisfy 0 <= Ne < population_size")
        if self.mutation_number < 0:
            raise ValueError("mutation_number must be >= 0")
        a, b = self.perturbation
        if a > b:
            raise ValueError("perturbation range must satisfy a <= b")
        object.__setattr__(self, "perturbation", (float(a), float(b)))

    @property
    def pool_size(self) -> int:
        return max(1, int(round(self.selection_pressure * self.population_size)))


PRESETS = {
    "table1-row1": GAParams(generations=100),
    "table1-row2": GAParams(generations=200),
}


def batch_error(pop: np.ndarray, S: LearningSet) -> np.ndarray:
    """Errors of a stack of matrices shaped ``(P, n, n)``."""
    if pop.shape[-2:] != (S.n, S.n):
        raise ValueError(f"matrix shape {pop.shape[-2:]} does not match n={S.n}")
    out = np.einsum("pij,kj->pki", pop, S.inputs)
    return np.abs(out - S.targets).sum(axis=(1, 2)) / (S.n * S.m)


def error(A: np.ndarray, S: LearningSet) -> float:
    return float(batch_error(np.asarray(A, dtype=float)[None], S)[0])


def fitness(A: np.ndarray, S: LearningSet) -> float:
    return math.exp(-error(A, S))


def evaluate_sort(pop: np.ndarray, S: LearningSet) -> tuple[np.ndarray, np.ndarray]:
    """Population and errors reordered best first (stable on ties)."""
    errs = batch_error(pop, S)
    order = np.argsort(errs, kind="stable")
    return pop[order], errs[order]


def _crossover(a: np.ndarray, b: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    pick = rng.random((2,) + a.shape) < 0.5
    return np.where(pick[0], a, b), np.where(pick[1], a, b)


def _mutate(pop: np.ndarray, params: GAParams, rng) -> np.ndarray:
    P, n, _ = pop.shape
    k = min(params.mutation_number, n * n)
    if k == 0 or P == 0:
        return pop.copy()
    out = pop.reshape(P, n * n).copy()
    pos = np.argsort(rng.random((P, n * n)), axis=1)[:, :k]
    lo, hi = params.perturbation
    mag = rng.uniform(lo, hi, size=(P, k))
    sign = np.where(rng.random((P, k)) < 0.5, -1.0, 1.0)
    hit = rng.random((P, k)) < params.mutation_prob
    rows = np.arange(P)[:, None]
    out[rows, pos] += np.where(hit, sign * mag, 0.0)
    return np.clip(out, -1.0, 1.0).reshape(P, n, n)


def crossover(A: np.ndarray, B: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Two children; every entry of each child is copied from a random parent."""
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError("parents differ in shape")
    return _crossover(A, B, rng)


def mutate(A: np.ndarray, params: GAParams, rng) -> np.ndarray:
    """Perturb up to ``Nm`` distinct entries, each with probability ``Pm``.

    A perturbation has magnitude uniform in the configured range and a random
    sign; results are clamped to ``[-1, 1]``.
    """
    A = np.asarray(A, dtype=float)
    return _mutate(A[None], params, rng)[0]


@dataclass
class LearningResult:
    best: np.ndarray
    best_error: float
    history: np.ndarray  # best error after each generation
    seed: Optional[int] = None

    @property
    def best_fitness(self) -> float:
        return math.exp(-self.best_error)

    @property
    def fitness_history(self) -> np.ndarray:
        return np.exp(-self.history)


def run_learning_ga(S: LearningSet, params: GAParams = GAParams(), seed=None,
                    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None
                    ) -> LearningResult:
    """Evolve a matrix that maps ``S.inputs`` onto ``S.targets``.

    ``callback(t, population, errors)`` is called after each generation with
    the new (unsorted) population; it is meant for tests and diagnostics.
    """
    rng = np.random.default_rng(seed)
    N, n = params.population_size, S.n
    pop = rng.uniform(-1.0, 1.0, size=(N, n, n))
    errs = batch_error(pop, S)
    history = np.empty(params.generations)
    n_child = N - params.elite_count
    n_pairs = (n_child + 1) // 2
    for t in range(params.generations):
        order = np.argsort(errs, kind="stable")
        pop = pop[order]
        pool = pop[:params.pool_size]
        pa = pool[rng.integers(len(pool), size=n_pairs)]
        pb = pool[rng.integers(len(pool), size=n_pairs)]
        do_cross = (rng.random(n_pairs) < params.crossover_prob)[:, None, None]
        c1, c2 = _crossover(pa, pb, rng)
        c1 = np.where(do_cross, c1, pa)
        c2 = np.where(do_cross, c2, pb)
        children = np.concatenate([c1, c2])[:n_child]
        children = _mutate(children, params, rng)
        pop = np.concatenate([pop[:params.elite_count], children])
        errs = batch_error(pop, S)
        history[t] = errs.min()
        if callback is not None:
            callback(t, pop, errs)
    i = int(np.argmin(errs))
    return LearningResult(pop[i].copy(), float(errs[i]), history, seed)
