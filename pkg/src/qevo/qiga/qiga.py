"""Quantum-inspired GA for the 0-1 knapsack.

Every individual is a string of ``m`` real qubits ``(α_i0, α_i1)``.  Observing
it yields a bit string, which is repaired to feasibility and scored by profit.
Qubits are then rotated by a small angle toward the bits of the fitter of the
observed string and the stored best, which slowly concentrates probability on
good solutions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import knapsack
from .knapsack import KnapsackInstance

DELTA_THETA = 0.025


def uniform_population(pop_size: int, m: int) -> np.ndarray:
    """Amplitudes shaped ``(pop_size, m, 2)``, all qubits at ``(1/√2, 1/√2)``."""
    return np.full((pop_size, m, 2), 1 / np.sqrt(2))


def observe(Q: np.ndarray, rng) -> np.ndarray:
    """Bit ``i`` is 1 when a uniform draw exceeds ``|α_i0|²``."""
    Q = np.asarray(Q)
    return (rng.random(Q.shape[:-1]) > Q[..., 0] ** 2).astype(np.int8)


def observe_argmax(Q: np.ndarray) -> np.ndarray:
    """Bit ``i`` is 1 when ``|α_i1|² > |α_i0|²`` (ties give 0)."""
    Q = np.asarray(Q)
    return (Q[..., 1] ** 2 > Q[..., 0] ** 2).astype(np.int8)


def rotation_angles(Q: np.ndarray, toward: np.ndarray, active: np.ndarray,
                    delta: float = DELTA_THETA) -> np.ndarray:
    """Angles that grow the amplitude of bit ``toward`` wherever ``active``.

    Growing ``|α_1|²`` needs ``θ = sign(α_0 α_1) Δθ``; growing ``|α_0|²`` needs
    the opposite sign.  A qubit on an axis (zero product) is left alone.
    """
    s = np.sign(Q[..., 0] * Q[..., 1])
    s = np.where(np.asarray(toward) == 1, s, -s)
    return np.where(active, s * delta, 0.0)


def rotate(Q: np.ndarray, theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    a0, a1 = Q[..., 0], Q[..., 1]
    return np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=-1)


def update(Q: np.ndarray, x: np.ndarray, b: np.ndarray, fx=None, fb=None,
           delta: float = DELTA_THETA) -> np.ndarray:
    """Rotate qubits where ``x`` and ``b`` disagree toward the fitter string.

    Without fitness values the stored best ``b`` is taken as the fitter one.
    On a tie ``b`` is kept as the target.
    """
    Q, x, b = np.asarray(Q, dtype=float), np.asarray(x), np.asarray(b)
    if not (Q.shape[:-1] == x.shape and x.shape[-1] == b.shape[-1]):
        raise ValueError("qubit string, x and b lengths differ")
    if fx is None or fb is None:
        x_better = np.zeros(x.shape[:-1], dtype=bool)
    else:
        x_better = np.asarray(fx) > np.asarray(fb)
    toward = np.where(np.asarray(x_better)[..., None], x, b)
    return rotate(Q, rotation_angles(Q, toward, x != b, delta))


@dataclass
class QIGAResult:
    best: np.ndarray
    best_profit: float
    history: np.ndarray  # stored-best profit after each generation
    seed: Optional[int] = None


def run_qiga(inst: KnapsackInstance, pop_size: int = 10, max_gen: int = 500, seed=None,
             observe_mode: str = "sample", repair_mode: str = knapsack.GREEDY,
             delta: float = DELTA_THETA,
             callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None
             ) -> QIGAResult:
    """Observe, repair, evaluate, rotate toward the best, store the best.

    ``observe_mode`` is ``"sample"`` (random observation) or ``"argmax"``
    (most probable bit per qubit).  Repair is greedy by default; ``"random"``
    selects items for removal and refill at random instead.  ``callback(t, Q,
    P)`` sees the qubit population after the update and the repaired strings
    it was updated with.
    """
    if pop_size < 1:
        raise ValueError("pop_size must be >= 1")
    if max_gen < 0:
        raise ValueError("max_gen must be >= 0")
    if observe_mode not in ("sample", "argmax"):
        raise ValueError(f"observe_mode must be 'sample' or 'argmax', got {observe_mode!r}")
    rng = np.random.default_rng(seed)
    Q = uniform_population(pop_size, inst.m)

    def make():
        X = observe(Q, rng) if observe_mode == "sample" else observe_argmax(Q)
        X = knapsack.batch_repair(X, inst, repair_mode, rng)
        return X, knapsack.profit(X, inst)

    X, f = make()
    i = int(np.argmax(f))
    b, fb = X[i].copy(), float(f[i])
    history = np.empty(max_gen)
    for t in range(max_gen):
        X, f = make()
        Q = update(Q, X, b, f, np.full(pop_size, fb), delta)
        i = int(np.argmax(f))
        if f[i] > fb:
            b, fb = X[i].copy(), float(f[i])
        history[t] = fb
        if callback is not None:
            callback(t, Q, X)
    return QIGAResult(b, fb, history, seed)
