"""Circuit design by evolving variable-length lists of gate structures.

A gate structure holds a gate type, one bit string per operand qubit and a
parameter bit string (used by the rotation gate).  Operand strings are read as
integers modulo the register width; a CNOT's second operand picks the target
among the remaining qubits, so the two operands never coincide.  A circuit is
scored by the summed amplitude differences between what it produces from each
input and the desired output.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .. import qsim
from ..qsim import StateVector

OPERAND_BITS = 4
PARAM_BITS = 8


class GateType(enum.Enum):
    IDENTITY = "I"
    CNOT = "CNOT"
    HADAMARD = "H"
    L = "L"
    R = "R"
    S = "S"
    T = "T"
    ROTATION = "U"
    MEASURE = "M"

    @property
    def arity(self) -> int:
        return 2 if self is GateType.CNOT else 1


_FIXED = {GateType.IDENTITY: qsim.I, GateType.CNOT: qsim.CNOT, GateType.HADAMARD: qsim.H,
          GateType.L: qsim.L, GateType.R: qsim.R, GateType.S: qsim.S, GateType.T: qsim.T}


@dataclass(frozen=True)
class GateStructure:
    gate_type: GateType
    operands: tuple[str, ...]
    param: str = "0" * PARAM_BITS

    def __post_init__(self):
        if len(self.operands) != self.gate_type.arity:
            raise ValueError(f"{self.gate_type.value} needs {self.gate_type.arity} operand(s)")
        for s in self.operands + (self.param,):
            if not s or set(s) - {"0", "1"}:
                raise ValueError(f"bad bit string {s!r}")

    def qubits(self, width: int) -> list[int]:
        q0 = int(self.operands[0], 2) % width
        if self.gate_type is GateType.CNOT:
            if width < 2:
                raise ValueError("CNOT needs at least 2 qubits")
            q1 = (q0 + 1 + int(self.operands[1], 2) % (width - 1)) % width
            return [q0, q1]  # control, target
        return [q0]

    @property
    def angle(self) -> float:
        return 2 * math.pi * int(self.param, 2) / 2 ** len(self.param)

    def gate(self) -> qsim.Gate:
        if self.gate_type is GateType.ROTATION:
            return qsim.rotation(self.angle)
        return _FIXED[self.gate_type]

    def key(self, width: int) -> tuple:
        """Hashable description of what the structure does on ``width`` qubits."""
        extra = self.param if self.gate_type is GateType.ROTATION else ""
        return (self.gate_type, tuple(self.qubits(width)), extra)

    def describe(self, width: int) -> str:
        qs = ",".join(map(str, self.qubits(width)))
        if self.gate_type is GateType.ROTATION:
            return f"U({self.angle:.4f})[{qs}]"
        return f"{self.gate_type.value}[{qs}]"


def structure(gate_type: GateType, *qubits: int, width: int = 2,
              param: str = "0" * PARAM_BITS) -> GateStructure:
    """Gate structure acting on explicit qubits (control first for CNOT)."""
    ops = [format(qubits[0], f"0{OPERAND_BITS}b")]
    if gate_type is GateType.CNOT:
        ops.append(format((qubits[1] - qubits[0] - 1) % width, f"0{OPERAND_BITS}b"))
    return GateStructure(gate_type, tuple(ops), param)


def random_structure(rng, gate_types: Sequence[GateType]) -> GateStructure:
    gt = gate_types[rng.integers(len(gate_types))]
    bits = lambda k: "".join("01"[b] for b in rng.integers(0, 2, k))
    return GateStructure(gt, tuple(bits(OPERAND_BITS) for _ in range(gt.arity)), bits(PARAM_BITS))


def run_structures(circuit: Sequence[GateStructure], state: StateVector) -> StateVector:
    """Apply the circuit; a measurement keeps the more probable outcome (0 on ties)."""
    n = state.num_qubits
    for g in circuit:
        qs = g.qubits(n)
        if g.gate_type is GateType.MEASURE:
            # outcomes come in order 0, 1, so max() keeps 0 on an exact tie
            state = max(qsim.measure(state, qs), key=lambda o: o.probability).state
        else:
            state = qsim.apply_gate(state, g.gate(), qs)
    return state


def design_error(produced: Sequence[StateVector], desired: Sequence[StateVector]) -> float:
    """Sum over cases and amplitudes of ``|produced - desired|``."""
    if len(produced) != len(desired):
        raise ValueError("produced and desired hold different numbers of cases")
    total = 0.0
    for a, b in zip(produced, desired):
        a, b = np.asarray(getattr(a, "amplitudes", a)), np.asarray(getattr(b, "amplitudes", b))
        if a.shape != b.shape:
            raise ValueError(f"case dimensions differ: {a.shape} vs {b.shape}")
        total += float(np.abs(a - b).sum())
    return total


@dataclass(frozen=True)
class DesignGAParams:
    population_size: int = 500
    generations: int = 200
    max_gates: int = 6
    crossover_prob: float = 0.7
    mutation_prob: float = 0.001
    elitism: int = 1
    gate_types: tuple[GateType, ...] = tuple(GateType)
    target_error: float = 1e-9  # stop once the best error falls below this

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.max_gates < 1:
            raise ValueError("max_gates must be >= 1")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must satisfy 0 <= elitism < population_size")
        if not self.gate_types:
            raise ValueError("gate_types must not be empty")


@dataclass
class DesignResult:
    best: list[GateStructure]
    best_error: float
    history: list[float] = field(default_factory=list)  # best-ever error per generation
    seed: Optional[int] = None


def _bit_crossover(a: str, b: str, rng) -> tuple[str, str]:
    if len(a) != len(b) or len(a) < 2:
        return a, b
    k = int(rng.integers(1, len(a)))
    return a[:k] + b[k:], b[:k] + a[k:]


def recombine_structures(a: GateStructure, b: GateStructure, rng
                         ) -> tuple[GateStructure, GateStructure]:
    """One-point crossover of every bit string when both gates share a type."""
    if a.gate_type is not b.gate_type:
        return a, b
    ops = [_bit_crossover(x, y, rng) for x, y in zip(a.operands, b.operands)]
    pa, pb = _bit_crossover(a.param, b.param, rng)
    return (GateStructure(a.gate_type, tuple(o[0] for o in ops), pa),
            GateStructure(b.gate_type, tuple(o[1] for o in ops), pb))


def crossover(a: list[GateStructure], b: list[GateStructure], rng, max_gates: int
              ) -> tuple[list[GateStructure], list[GateStructure]]:
    """Swap the tails that start at a randomly picked gate of each parent."""
    i = int(rng.integers(len(a) + 1)) if a else 0
    j = int(rng.integers(len(b) + 1)) if b else 0
    ta, tb = list(a[i:]), list(b[j:])
    if ta and tb:
        ta[0], tb[0] = recombine_structures(ta[0], tb[0], rng)
    return (list(a[:i]) + tb)[:max_gates], (list(b[:j]) + ta)[:max_gates]


def mutate(circuit: list[GateStructure], rate: float, rng,
           gate_types: Sequence[GateType]) -> list[GateStructure]:
    return [random_structure(rng, gate_types) if rng.random() < rate else g for g in circuit]


def run_design_ga(cases: Sequence[tuple[StateVector, StateVector]],
                  params: DesignGAParams = DesignGAParams(), seed=None,
                  callback: Optional[Callable[[int, list, np.ndarray], None]] = None
                  ) -> DesignResult:
    """Evolve a circuit mapping each input state of ``cases`` to its desired output."""
    if not cases:
        raise ValueError("at least one (input, desired) case is required")
    width = cases[0][0].num_qubits
    inputs = [c[0] for c in cases]
    desired = [c[1] for c in cases]
    rng = np.random.default_rng(seed)
    cache: dict[tuple, float] = {}

    def error_of(circ):
        key = tuple(g.key(width) for g in circ)
        if key not in cache:
            cache[key] = design_error([run_structures(circ, s) for s in inputs], desired)
        return cache[key]

    N, types = params.population_size, params.gate_types
    pop = [[random_structure(rng, types) for _ in range(int(rng.integers(1, params.max_gates + 1)))]
           for _ in range(N)]
    best, best_err, history = [], math.inf, []
    for gen in range(params.generations):
        errs = np.array([error_of(c) for c in pop])
        i = int(np.argmin(errs))
        if errs[i] < best_err:
            best, best_err = list(pop[i]), float(errs[i])
        history.append(best_err)
        if callback is not None:
            callback(gen, pop, errs)
        if best_err < params.target_error:
            break
        fit = 1.0 / (1.0 + errs)
        cum = np.cumsum(fit)
        picks = np.searchsorted(cum, rng.random(N + 1) * cum[-1], side="right").clip(0, N - 1)
        elite = [list(pop[k]) for k in np.argsort(errs, kind="stable")[:params.elitism]]
        children = []
        for k in range(0, N - params.elitism, 2):
            a, b = pop[picks[k]], pop[picks[k + 1]]
            if rng.random() < params.crossover_prob:
                a, b = crossover(a, b, rng, params.max_gates)
            children += [mutate(a, params.mutation_prob, rng, types),
                         mutate(b, params.mutation_prob, rng, types)]
        pop = elite + children[:N - params.elitism]
    return DesignResult(best, best_err, history, seed)


def bell_cases() -> list[tuple[StateVector, StateVector]]:
    """``|00> -> (|00> + |11>)/√2``."""
    return [(StateVector.basis("00"), StateVector(2, np.array([1, 0, 0, 1]) / math.sqrt(2)))]
