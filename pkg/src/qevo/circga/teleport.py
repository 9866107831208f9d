"""Fitness of codon-encoded teleportation circuits and the GA that optimizes them.

The input state ``(p|0> + q|1>) ⊗ |00>`` (input on qubit 2) goes through the
EPR and Alice gates, qubits 2 and 1 are measured, and Bob's gates act on each of the four
post-measurement branches.  A branch is correct when every nonzero amplitude
pair ``(a_i, a_{i+1})`` has ratio ``p/q``, i.e. qubit 0 carries the input.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import qsim
from . import codon
from .codon import DecodedCircuit, InvalidChromosome

ZERO_TOL = 1e-12
DEGENERATE_PENALTY = 100.0
CORRECT_TOL = 1e-9

_GATES = {"CNOT": qsim.CNOT, "L": qsim.L, "R": qsim.R}


def _apply_ops(amps: np.ndarray, ops) -> np.ndarray:
    for op in ops:
        amps = qsim.apply_matrix(amps, _GATES[op.kind].matrix, op.qubits, 3)
    return amps


def simulate_teleport(circ: DecodedCircuit, p: complex, q: complex) -> list[np.ndarray]:
    """Final 8-amplitude state of each measurement branch ``(m2, m1)``.

    Branches are ordered 00, 01, 10, 11.  A branch with zero probability is
    returned as the zero vector.
    """
    if abs(abs(p) ** 2 + abs(q) ** 2 - 1) > 1e-9:
        raise ValueError("|p|^2 + |q|^2 must equal 1")
    state = qsim.StateVector(3, np.array([p, 0, 0, 0, q, 0, 0, 0], dtype=complex))
    pre = _apply_ops(state.amplitudes, circ.epr + circ.alice)
    outs = {o.outcome: o.state.amplitudes
            for o in qsim.measure(qsim.StateVector(3, pre), [2, 1])}
    finals = []
    for m2 in (0, 1):
        for m1 in (0, 1):
            amps = outs.get((m2, m1))
            finals.append(np.zeros(8, complex) if amps is None else _apply_ops(amps, circ.bob))
    return finals


def branch_error(final, p: complex, q: complex) -> float:
    """Mean deviation of the amplitude-pair ratios from ``p/q``.

    Pairs where both amplitudes vanish are skipped.  A pair whose second
    amplitude vanishes alone scores 100, as does an all-zero state.
    """
    a = np.asarray(final, dtype=complex)
    if q == 0:
        raise ValueError("q must be nonzero")
    target = p / q
    terms = []
    for i in range(0, 8, 2):
        x, y = a[i], a[i + 1]
        if abs(x) < ZERO_TOL and abs(y) < ZERO_TOL:
            continue
        terms.append(DEGENERATE_PENALTY if abs(y) < ZERO_TOL else abs(x / y - target))
    if not terms:
        return DEGENERATE_PENALTY
    return float(np.mean(terms))


def sample_triples(rng) -> np.ndarray:
    """Three normalized ``(p, q)`` inputs from random angles ``α, β, γ``."""
    al, be, ga = rng.uniform(0, 2 * np.pi, 3)
    e = lambda t: np.exp(1j * t)
    return np.array([
        [e(be) * np.cos(al), e(ga) * np.sin(al)],
        [e(ga) * np.cos(be), e(al) * np.sin(be)],
        [e(al) * np.cos(ga), e(be) * np.sin(ga)],
    ])


def fitness_from_errors(total_error: float, max_error: float, gate_count: int) -> float:
    if max_error < CORRECT_TOL:
        return 1.0 + 1.0 / gate_count
    return 1.0 / (1.0 + 10.0 * total_error)


def branch_errors(circ: DecodedCircuit, triples) -> np.ndarray:
    """The twelve ``error_j`` values, three inputs times four branches."""
    errs = [branch_error(f, p, q) for p, q in triples for f in simulate_teleport(circ, p, q)]
    return np.array(errs)


def evaluate(c, triples) -> float:
    try:
        circ = codon.decode(c)
    except InvalidChromosome:
        return 0.0
    errs = branch_errors(circ, triples)
    return fitness_from_errors(float(errs.sum()), float(errs.max()), circ.gate_count)


def is_correct(c, n_checks: int = 100, rng=None) -> bool:
    """True when every branch teleports for ``n_checks`` random inputs."""
    try:
        circ = codon.decode(c)
    except InvalidChromosome:
        return False
    rng = np.random.default_rng(rng)
    for _ in range(n_checks):
        th, a, b = rng.uniform(0, 2 * np.pi, 3)
        p, q = np.cos(th) * np.exp(1j * a), np.sin(th) * np.exp(1j * b)
        if abs(q) < 1e-6:
            continue
        if max(branch_error(f, p, q) for f in simulate_teleport(circ, p, q)) >= CORRECT_TOL:
            return False
    return True


class BatchEvaluator:
    """Vectorized :func:`evaluate` for a population of equal-length chromosomes."""

    def __init__(self):
        self.table, ops = codon.lookup_table()
        mats = [np.eye(8, dtype=complex)]
        for op in ops[1:]:
            full = np.eye(8, dtype=complex)
            for col in range(8):
                full[:, col] = qsim.apply_matrix(np.eye(8, dtype=complex)[col],
                                                 _GATES[op.kind].matrix, op.qubits, 3)
            mats.append(full)
        self.mats = np.array(mats)
        self.unitary = np.array([0] + [1] * (len(ops) - 1))
        # projectors onto the four (m2, m1) branches
        idx = np.arange(8)
        self.branch_mask = np.array([((idx >> 1) == j) for j in range(4)], dtype=float)

    def op_ids(self, letters: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-codon op ids split into pre-measurement and Bob parts, plus validity."""
        cod = letters.reshape(len(letters), -1, 3).astype(np.int64)
        a, b, c = cod[..., 0], cod[..., 1], cod[..., 2]
        marker = a == codon.MARKER
        before = np.cumsum(marker, axis=1) - marker
        seg = np.minimum(before, 2)
        ids = self.table[seg, a, b, c]
        valid = marker.sum(axis=1) >= 2
        return np.where(seg < 2, ids, 0), np.where(seg == 2, ids, 0), valid

    def evaluate(self, letters, triples) -> tuple[np.ndarray, np.ndarray]:
        """Fitness and gate count for each row of ``letters``."""
        letters = np.atleast_2d(np.asarray(letters, dtype=np.int8))
        uniq, inverse = np.unique(letters, axis=0, return_inverse=True)
        fit, gates = self._evaluate_unique(uniq, np.asarray(triples, dtype=complex))
        inverse = inverse.reshape(-1)
        return fit[inverse], gates[inverse]

    def _evaluate_unique(self, letters, triples):
        P = len(letters)
        pre_ids, bob_ids, valid = self.op_ids(letters)
        gate_count = self.unitary[pre_ids].sum(1) + self.unitary[bob_ids].sum(1) + 1
        # (P, 3, 8) states for the three inputs
        psi = np.zeros((P, 3, 8), dtype=complex)
        psi[:, :, 0] = triples[:, 0]
        psi[:, :, 4] = triples[:, 1]
        for k in range(pre_ids.shape[1]):
            psi = np.einsum("pij,ptj->pti", self.mats[pre_ids[:, k]], psi)
        # (P, 3, 4, 8) branch states, renormalized where the branch has weight
        br = psi[:, :, None, :] * self.branch_mask
        norm = np.linalg.norm(br, axis=-1, keepdims=True)
        br = np.where(norm > 1e-9, br / np.where(norm > 1e-9, norm, 1.0), 0.0)
        for k in range(bob_ids.shape[1]):
            br = np.einsum("pij,ptbj->ptbi", self.mats[bob_ids[:, k]], br)
        x, y = br[..., 0::2], br[..., 1::2]
        ax, ay = np.abs(x), np.abs(y)
        both_zero = (ax < ZERO_TOL) & (ay < ZERO_TOL)
        degenerate = (ay < ZERO_TOL) & ~both_zero
        target = (triples[:, 0] / triples[:, 1])[None, :, None, None]
        safe_y = np.where(ay < ZERO_TOL, 1.0, y)
        term = np.where(degenerate, DEGENERATE_PENALTY, np.abs(x / safe_y - target))
        term = np.where(both_zero, 0.0, term)
        n = (~both_zero).sum(-1)
        err = np.where(n > 0, term.sum(-1) / np.maximum(n, 1), DEGENERATE_PENALTY)
        err = err.reshape(P, -1)
        total, worst = err.sum(1), err.max(1)
        fit = np.where(worst < CORRECT_TOL, 1.0 + 1.0 / gate_count, 1.0 / (1.0 + 10.0 * total))
        fit = np.where(valid, fit, 0.0)
        return fit, np.where(valid, gate_count, 0)


@dataclass(frozen=True)
class CircuitGAParams:
    population_size: int = 5000
    max_generations: int = 1000
    num_codons: int = 12
    crossover_prob: float = 0.7
    mutation_prob: Optional[float] = None  # per letter; None means 1/length
    resample_every: int = 50
    elitism: int = 0
    target_gates: Optional[int] = None  # stop once a correct circuit this small is found

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")
        if self.num_codons < 2:
            raise ValueError("num_codons must be >= 2")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must lie in [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must lie in [0, 1]")
        if self.resample_every < 1:
            raise ValueError("resample_every must be >= 1")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must satisfy 0 <= elitism < population_size")

    @property
    def length(self) -> int:
        return 3 * self.num_codons

    @property
    def letter_mutation_prob(self) -> float:
        return 1.0 / self.length if self.mutation_prob is None else self.mutation_prob


@dataclass
class CircuitGAResult:
    best: np.ndarray
    best_fitness: float
    best_gate_count: int
    history: list[tuple[int, float, int]] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def best_string(self) -> str:
        return codon.format_codons(self.best)

    @property
    def correct(self) -> bool:
        return self.best_fitness > 1.0


def roulette(fitness: np.ndarray, k: int, rng) -> np.ndarray:
    """Indices drawn with probability proportional to (non-negative) fitness."""
    total = fitness.sum()
    if total <= 0:
        return rng.integers(len(fitness), size=k)
    cum = np.cumsum(fitness)
    return np.minimum(np.searchsorted(cum, rng.random(k) * cum[-1], side="right"),
                      len(fitness) - 1)


def two_point_crossover(a: np.ndarray, b: np.ndarray, rng) -> tuple[np.ndarray, np.ndarray]:
    """Swap the letters between two cut points; rows of ``a`` pair with rows of ``b``."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    n, L = a.shape
    cuts = np.sort(np.stack([rng.integers(0, L + 1, n), rng.integers(0, L + 1, n)], 1), 1)
    pos = np.arange(L)
    mid = (pos >= cuts[:, :1]) & (pos < cuts[:, 1:])
    return np.where(mid, b, a), np.where(mid, a, b)


def mutate_letters(pop: np.ndarray, prob: float, rng) -> np.ndarray:
    hit = rng.random(pop.shape) < prob
    return np.where(hit, rng.integers(0, 4, pop.shape), pop).astype(np.int8)


def run_circuit_ga(params: CircuitGAParams = CircuitGAParams(), seed=None,
                   initial=None,
                   callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None
                   ) -> CircuitGAResult:
    """Evolve codon chromosomes toward a short correct teleporter.

    ``initial`` is a chromosome (string or letters) copied into every slot of
    the first population; otherwise the population starts uniformly random.
    History rows are ``(generation, best_fitness, best_gate_count)`` of the
    best chromosome seen so far.
    """
    rng = np.random.default_rng(seed)
    N, L = params.population_size, params.length
    if initial is not None:
        start = codon._as_letters(initial)
        if start.size != L:
            raise ValueError(f"initial chromosome has {start.size} letters, expected {L}")
        pop = np.tile(start, (N, 1))
    else:
        pop = rng.integers(0, 4, (N, L)).astype(np.int8)
    ev = BatchEvaluator()
    best, best_fit, best_gates = pop[0].copy(), -1.0, 0
    history = []
    triples = None
    for gen in range(params.max_generations):
        if gen % params.resample_every == 0:
            triples = sample_triples(rng)
        fit, gates = ev.evaluate(pop, triples)
        i = int(np.argmax(fit))
        if fit[i] > best_fit:
            best, best_fit, best_gates = pop[i].copy(), float(fit[i]), int(gates[i])
        history.append((gen, best_fit, best_gates))
        if callback is not None:
            callback(gen, pop, fit)
        if params.target_gates is not None and best_fit > 1.0 and best_gates <= params.target_gates:
            break
        n_child = N - params.elitism
        parents = pop[roulette(fit, 2 * ((n_child + 1) // 2), rng)]
        pa, pb = parents[0::2], parents[1::2]
        ca, cb = two_point_crossover(pa, pb, rng)
        cross = (rng.random(len(pa)) < params.crossover_prob)[:, None]
        children = np.concatenate([np.where(cross, ca, pa), np.where(cross, cb, pb)])[:n_child]
        children = mutate_letters(children, params.letter_mutation_prob, rng)
        elite = pop[np.argsort(-fit, kind="stable")[:params.elitism]]
        pop = np.concatenate([elite, children])
    return CircuitGAResult(best, best_fit, best_gates, history, seed)
