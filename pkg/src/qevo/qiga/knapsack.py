"""0-1 knapsack instances and the repair, penalty and decoder machinery shared
by the quantum-inspired GA and its classical baselines.

Functions whose name starts with ``batch_`` take a population of solutions
shaped ``(P, m)`` and work on all rows at once; the scalar versions wrap them.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

RANDOM, GREEDY = "random", "greedy"


@dataclass(frozen=True, eq=False)
class KnapsackInstance:
    weights: np.ndarray
    profits: np.ndarray
    capacity: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        p = np.asarray(self.profits, dtype=float).reshape(-1)
        if w.shape != p.shape or w.size == 0:
            raise ValueError("weights and profits must be non-empty and of equal length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not self.capacity > 0:
            raise ValueError("capacity must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "profits", p)
        object.__setattr__(self, "capacity", float(self.capacity))

    @property
    def m(self) -> int:
        return self.weights.size

    @property
    def ratios(self) -> np.ndarray:
        return self.profits / self.weights

    @property
    def rho(self) -> float:
        return float(self.ratios.max())

    def greedy_order(self) -> np.ndarray:
        """Items by decreasing profit/weight ratio (index order on ties)."""
        return np.argsort(-self.ratios, kind="stable")

    @classmethod
    def load(cls, path) -> "KnapsackInstance":
        """Text format: ``m C`` on the first line, then ``m`` lines ``w_i p_i``."""
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
        head = lines[0].split()
        m, cap = int(head[0]), float(head[1])
        rows = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
        if rows.shape != (m, 2):
            raise ValueError(f"{path}: expected {m} lines of 'w p', got shape {rows.shape}")
        return cls(rows[:, 0], rows[:, 1], cap)

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(f"{self.m} {self.capacity!r}\n")
            for w, p in zip(self.weights, self.profits):
                fh.write(f"{float(w)!r} {float(p)!r}\n")


def generate_instance(m: int, seed=None) -> KnapsackInstance:
    """Weights uniform in [1, 10), profits ``w + 5``, capacity half the total weight."""
    if m < 1:
        raise ValueError("m must be >= 1")
    w = np.random.default_rng(seed).uniform(1.0, 10.0, m)
    return KnapsackInstance(w, w + 5.0, 0.5 * w.sum())


def weight(x, inst: KnapsackInstance) -> np.ndarray:
    return np.asarray(x, dtype=float) @ inst.weights


def profit(x, inst: KnapsackInstance) -> np.ndarray:
    return np.asarray(x, dtype=float) @ inst.profits


def is_feasible(x, inst: KnapsackInstance) -> np.ndarray:
    return weight(x, inst) <= inst.capacity


def penalty(x, inst: KnapsackInstance, kind: int) -> np.ndarray:
    """Logarithmic (1), linear (2) or quadratic (3) overweight penalty; 0 when feasible."""
    over = np.maximum(weight(x, inst) - inst.capacity, 0.0)
    z = inst.rho * over
    if kind == 1:
        return np.log2(1.0 + z)
    if kind == 2:
        return z
    if kind == 3:
        return z ** 2
    raise ValueError(f"penalty kind must be 1, 2 or 3, got {kind}")


def penalty_fitness(x, inst: KnapsackInstance, kind: int) -> np.ndarray:
    return profit(x, inst) - penalty(x, inst, kind)


def _orders(P: int, inst: KnapsackInstance, mode: str, rng) -> np.ndarray:
    if mode == RANDOM:
        return np.argsort(rng.random((P, inst.m)), axis=1)
    if mode == GREEDY:
        return np.tile(inst.greedy_order(), (P, 1))
    raise ValueError(f"mode must be {RANDOM!r} or {GREEDY!r}, got {mode!r}")


def batch_repair(X: np.ndarray, inst: KnapsackInstance, mode: str = RANDOM, rng=None
                 ) -> np.ndarray:
    """Make every row feasible, then top it up.

    Removal: while overweight, drop a selected item (random one, or the one with
    the lowest profit/weight ratio).  Refill: add unselected items one at a
    time (random order, or by decreasing ratio) until an addition overflows,
    and take that last addition back out.
    """
    rng = np.random.default_rng(rng)
    X = np.asarray(X).astype(bool).copy()
    P, m = X.shape
    w, C = inst.weights, inst.capacity
    rows = np.arange(P)[:, None]

    order = _orders(P, inst, mode, rng)
    if mode == GREEDY:
        order = order[:, ::-1]  # removal takes the worst ratio first
    sel = X[rows, order]
    removed = np.cumsum(np.where(sel, w[order], 0.0), axis=1)
    excess = (X * w).sum(1) - C
    # an item goes if the weight removed before it has not yet cleared the excess
    before = removed - np.where(sel, w[order], 0.0)
    drop = sel & (before < excess[:, None])
    X[rows, order] &= ~drop

    order = _orders(P, inst, mode, rng)
    free = ~X[rows, order]
    room = C - (X * w).sum(1)
    added = np.cumsum(np.where(free, w[order], 0.0), axis=1)
    # prefix of free items that fits; the first overflowing one stops the refill
    fits = np.cumsum(free & (added > room[:, None]), axis=1) == 0
    X[rows, order] |= free & fits
    return X.astype(np.int8)


def repair(x, inst: KnapsackInstance, mode: str = RANDOM, rng=None) -> np.ndarray:
    return batch_repair(np.asarray(x)[None], inst, mode, rng)[0]


def random_ordinal(P: int, m: int, rng) -> np.ndarray:
    """``P`` ordinal vectors; component ``i`` (0-based) lies in ``1..m-i``."""
    return (np.floor(rng.random((P, m)) * (m - np.arange(m))) + 1).astype(np.int64)


def check_ordinal(V: np.ndarray):
    m = V.shape[-1]
    hi = m - np.arange(m)
    if np.any(V < 1) or np.any(V > hi):
        raise ValueError("ordinal component out of range 1..m-i+1")


def batch_decode_ordinal(V: np.ndarray, inst: KnapsackInstance, mode: str = RANDOM
                         ) -> np.ndarray:
    """Decode ordinal vectors against an item list, packing first-fit.

    The list is the input order (``random``) or decreasing ratio (``greedy``).
    Step ``i`` removes the ``V[i]``-th remaining list entry and packs it if it
    still fits.
    """
    V = np.atleast_2d(np.asarray(V, dtype=np.int64))
    check_ordinal(V)
    P, m = V.shape
    if m != inst.m:
        raise ValueError(f"ordinal length {m} does not match m={inst.m}")
    if mode not in (RANDOM, GREEDY):
        raise ValueError(f"mode must be {RANDOM!r} or {GREEDY!r}, got {mode!r}")
    base = np.arange(m) if mode == RANDOM else inst.greedy_order()
    lists = np.tile(base, (P, 1))
    left = np.full(P, inst.capacity)
    X = np.zeros((P, m), dtype=np.int8)
    rows = np.arange(P)
    cols = np.arange(m)
    for i in range(m):
        k = V[:, i] - 1
        item = lists[rows, k]
        take = inst.weights[item] <= left
        X[rows[take], item[take]] = 1
        left -= np.where(take, inst.weights[item], 0.0)
        # drop the chosen entry; the lists shrink by one column per step
        keep = cols[:m - i] != k[:, None]
        lists = lists[keep].reshape(P, m - i - 1)
    return X


def decode_ordinal(v, inst: KnapsackInstance, mode: str = RANDOM) -> np.ndarray:
    return batch_decode_ordinal(np.asarray(v)[None], inst, mode)[0]


def greedy_solution(inst: KnapsackInstance) -> np.ndarray:
    """Pack items by decreasing ratio, skipping those that no longer fit."""
    return decode_ordinal(np.ones(inst.m, dtype=np.int64), inst, GREEDY)
