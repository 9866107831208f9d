"""Classical simulation of a GA whose individuals are entangled register pairs.

A quantum individual is the joint state ``Σ_x a_x |x>|f(x)>`` of an individual
register and a fitness register.  Because every basis pair is correlated, the
state is stored sparsely as the amplitude vector ``a`` over ``x`` alone.  The
dense two-register form (fitness values mapped to basis indices of a small
register) is available for cross-checks and for the uncorrelated product state
that shows why the correlation has to be built in by ``U_f``.

Measuring the fitness register collapses an individual to one fitness fiber.
Mutation uncomputes the fitness register, rotates the individual register and
recomputes the fitness, which restores the correlated form while spreading the
amplitude back over neighbouring individuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import qsim

NORM_TOL = 1e-9
SUPPORT_TOL = 1e-12
DEFAULT_THETA = 0.05


def _check_unitary(U: np.ndarray, n: int, name: str) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}, got shape {U.shape}")
    if not np.allclose(U.conj().T @ U, np.eye(n), atol=NORM_TOL):
        raise ValueError(f"{name} is not unitary")
    return U


def _as_table(f, N: int) -> np.ndarray:
    if callable(f):
        f = [f(x) for x in range(N)]
    table = np.asarray(f, dtype=float).reshape(-1)
    if table.size != N:
        raise ValueError(f"fitness table has {table.size} entries, expected N={N}")
    return table


@dataclass(frozen=True, eq=False)
class QuantumIndividual:
    """Correlated state ``Σ_x amps[x] |x>|f[x]>``."""

    f: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex).reshape(-1)
        if a.size != np.asarray(self.f).size:
            raise ValueError("amplitude vector and fitness table differ in length")
        if abs(np.vdot(a, a).real - 1.0) > NORM_TOL:
            raise ValueError("individual state is not normalized")
        object.__setattr__(self, "amps", a)

    @property
    def N(self) -> int:
        return self.amps.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probabilities > SUPPORT_TOL)

    def support_pairs(self) -> list[tuple[int, float]]:
        return [(int(x), float(self.f[x])) for x in self.support()]


def init_individual(N: int, f, W: Optional[np.ndarray] = None) -> QuantumIndividual:
    """``U_f W`` applied to the uniform superposition with a blank fitness register."""
    if N < 1:
        raise ValueError("N must be >= 1")
    table = _as_table(f, N)
    a = np.full(N, 1 / math.sqrt(N), dtype=complex)
    if W is not None:
        a = _check_unitary(W, N, "W") @ a
    return QuantumIndividual(table, a)


@dataclass(frozen=True)
class FitnessMeasurement:
    value: float
    probability: float
    individual: QuantumIndividual


def fiber_probabilities(ind: QuantumIndividual) -> dict[float, float]:
    """Probability of observing each fitness value (values of zero weight omitted)."""
    probs = {}
    p = ind.probabilities
    for y in np.unique(ind.f):
        w = float(p[ind.f == y].sum())
        if w > SUPPORT_TOL:
            probs[float(y)] = w
    return probs


def collapse(ind: QuantumIndividual, value: float) -> QuantumIndividual:
    """Renormalized restriction of ``ind`` to the fiber ``f(x) == value``."""
    a = np.where(ind.f == value, ind.amps, 0)
    p = np.vdot(a, a).real
    if p <= SUPPORT_TOL:
        raise ValueError(f"fitness {value!r} has zero probability")
    return QuantumIndividual(ind.f, a / math.sqrt(p))


def measure_fitness(ind: QuantumIndividual, rng) -> FitnessMeasurement:
    rng = np.random.default_rng(rng)
    probs = fiber_probabilities(ind)
    values = list(probs)
    p = np.array([probs[v] for v in values])
    y0 = values[rng.choice(len(values), p=p / p.sum())]
    return FitnessMeasurement(y0, probs[y0], collapse(ind, y0))


def rotation_tensor(n_qubits: int, theta: float = DEFAULT_THETA) -> np.ndarray:
    """``U(θ)`` on every qubit of an ``n_qubits`` register."""
    u = qsim.rotation(theta).matrix
    P = np.array([[1.0 + 0j]])
    for _ in range(n_qubits):
        P = np.kron(P, u)
    return P


def search_bits(N: int) -> int:
    n = N.bit_length() - 1
    if N < 2 or 2**n != N:
        raise ValueError(f"N={N} must be a power of two for the default rotation operator")
    return n


def qga_mutate(ind: QuantumIndividual, P: Optional[np.ndarray] = None,
               theta: float = DEFAULT_THETA) -> QuantumIndividual:
    """``U_f P U_f^-1``: uncompute fitness, apply ``P`` to the individual register, recompute.

    With the fitness register blank the two-register state is ``Σ a_x |x>|0>``,
    so ``P`` acts on ``a`` alone and ``U_f`` re-attaches ``f(x)`` to every ``x``.
    """
    if P is None:
        P = rotation_tensor(search_bits(ind.N), theta)
    else:
        P = _check_unitary(P, ind.N, "P")
    return QuantumIndividual(ind.f, P @ ind.amps)


# ---- dense two-register form ----------------------------------------------

@dataclass(frozen=True)
class FitnessRegister:
    """Encoding of fitness values as basis states of a ``width``-qubit register."""

    values: np.ndarray  # sorted distinct fitness values; index k encodes values[k]

    @classmethod
    def for_table(cls, f) -> "FitnessRegister":
        return cls(np.unique(np.asarray(f, dtype=float)))

    @property
    def width(self) -> int:
        return max(1, math.ceil(math.log2(len(self.values))))

    @property
    def dim(self) -> int:
        return 2**self.width

    def code(self, y) -> np.ndarray:
        return np.searchsorted(self.values, y)


def apply_uf(joint: np.ndarray, f, reg: FitnessRegister) -> np.ndarray:
    """``|x>|y> -> |x>|y xor code(f(x))>`` on a dense vector indexed ``x * dim + y``."""
    N = len(f)
    codes = reg.code(np.asarray(f, dtype=float))
    x, y = np.divmod(np.arange(N * reg.dim), reg.dim)
    out = np.empty_like(joint)
    out[x * reg.dim + (y ^ codes[x])] = joint
    return out


def to_joint(ind: QuantumIndividual, reg: Optional[FitnessRegister] = None) -> np.ndarray:
    reg = reg or FitnessRegister.for_table(ind.f)
    blank = np.zeros(ind.N * reg.dim, dtype=complex)
    blank[np.arange(ind.N) * reg.dim] = ind.amps
    return apply_uf(blank, ind.f, reg)


def violations(joint: np.ndarray, f, reg: FitnessRegister) -> list[tuple[int, float]]:
    """Support pairs ``(x, y)`` of a dense state whose fitness entry is not ``f(x)``."""
    f = np.asarray(f, dtype=float)
    out = []
    for i in np.flatnonzero(np.abs(joint) ** 2 > SUPPORT_TOL):
        x, k = divmod(int(i), reg.dim)
        if k >= len(reg.values) or reg.values[k] != f[x]:
            out.append((x, float(reg.values[k]) if k < len(reg.values) else math.nan))
    return out


def dense_mutate(ind: QuantumIndividual, P: np.ndarray) -> np.ndarray:
    """Mutation carried out step by step on the dense two-register vector."""
    reg = FitnessRegister.for_table(ind.f)
    blank = apply_uf(to_joint(ind, reg), ind.f, reg)  # XOR oracle is its own inverse
    if np.abs(blank.reshape(ind.N, reg.dim)[:, 1:]).max(initial=0) > SUPPORT_TOL:
        raise AssertionError("uncompute left the fitness register populated")
    moved = np.kron(P, np.eye(reg.dim)) @ blank
    return apply_uf(moved, ind.f, reg)


@dataclass
class Counterexample:
    pair: tuple[int, float]  # surviving (x, observed fitness) with f(x) != fitness
    observed: float
    product_state: np.ndarray  # dense, before measuring the fitness register
    post_state: np.ndarray  # dense, after the measurement
    correlated_state: np.ndarray  # dense correlated individual over the same a
    register: FitnessRegister


def product_state_counterexample(N: int, f, a=None, b=None, rng=None) -> Counterexample:
    """Measure the fitness half of ``(Σ a_x|x>) ⊗ (Σ b_y|f(y)>)`` and find a broken pair.

    ``a`` and ``b`` default to uniform.  Raises ``ValueError`` when no observed
    value can leave a mismatched pair, which is always the case for constant ``f``.
    """
    table = _as_table(f, N)
    reg = FitnessRegister.for_table(table)
    if len(reg.values) < 2:
        raise ValueError("f is constant: every pair is correlated, no counterexample exists")
    a = np.full(N, 1 / math.sqrt(N), complex) if a is None else np.asarray(a, complex)
    b = np.full(N, 1 / math.sqrt(N), complex) if b is None else np.asarray(b, complex)
    fit = np.zeros(reg.dim, dtype=complex)
    np.add.at(fit, reg.code(table), b)
    norm = np.linalg.norm(fit)
    if norm <= SUPPORT_TOL or abs(np.linalg.norm(a) - 1) > NORM_TOL:
        raise ValueError("a must be normalized and b must give a nonzero fitness register")
    product = np.kron(a, fit / norm)

    rng = np.random.default_rng(rng)
    codes = np.arange(reg.dim)
    p = np.array([np.sum(np.abs(product.reshape(N, reg.dim)[:, k]) ** 2) for k in codes])
    order = rng.permutation(np.flatnonzero(p > SUPPORT_TOL))
    # try outcomes in a random order; with full-support a the first always works
    for k in order:
        post = np.zeros_like(product).reshape(N, reg.dim)
        post[:, k] = product.reshape(N, reg.dim)[:, k]
        post = post.reshape(-1) / math.sqrt(p[k])
        bad = violations(post, table, reg)
        if bad:
            ind = QuantumIndividual(table, a)
            return Counterexample(bad[0], float(reg.values[k]), product, post,
                                  to_joint(ind, reg), reg)
    raise ValueError("no observed fitness leaves a mismatched pair for this a and b")


# ---- the evolutionary loop ------------------------------------------------

@dataclass
class QGAPopulation:
    individuals: list[QuantumIndividual]
    best_fitness: float = -math.inf

    def __post_init__(self):
        if not self.individuals:
            raise ValueError("population needs at least one individual")
        f0 = self.individuals[0].f
        if any(ind.N != f0.size or not np.array_equal(ind.f, f0) for ind in self.individuals):
            raise ValueError("all individuals must share N and f")

    @property
    def f(self) -> np.ndarray:
        return self.individuals[0].f

    @classmethod
    def uniform(cls, M: int, N: int, f, W: Optional[np.ndarray] = None) -> "QGAPopulation":
        if M < 1:
            raise ValueError("M must be >= 1")
        ind = init_individual(N, f, W)
        return cls([ind] * M)


@dataclass
class QGAResult:
    best_fitness: float
    best_x: int  # an individual carrying the best observed fitness
    history: list[tuple[int, float, float]] = field(default_factory=list)
    # rows (generation, best observed fitness so far, mean support size after measuring)
    seed: Optional[int] = None


def uniform_restriction(ind: QuantumIndividual) -> QuantumIndividual:
    """Equal-amplitude superposition over the support of ``ind``."""
    sup = ind.support()
    a = np.zeros(ind.N, dtype=complex)
    a[sup] = 1 / math.sqrt(sup.size)
    return QuantumIndividual(ind.f, a)


def hamming_landscape(n_bits: int) -> np.ndarray:
    """Fitness ``-popcount(x)`` over ``n_bits``-bit strings; the optimum is ``x = 0``."""
    x = np.arange(2**n_bits)
    return 0.0 - np.array([bin(v).count("1") for v in x], dtype=float)


def run_qga(pop: QGAPopulation, generations: int, selection_fraction: float = 0.5,
            seed=None, theta: float = DEFAULT_THETA, P: Optional[np.ndarray] = None,
            callback: Optional[Callable[[int, QGAPopulation], None]] = None) -> QGAResult:
    """Measure, select on the observed fitness, mutate, measure again.

    Survivors are the individuals whose observed fitness ranks in the top
    ``selection_fraction`` (ties broken by index).  Every other slot receives
    the uniform restriction of a survivor's collapsed state, survivors taken
    cyclically from the best down.  No crossover is applied.
    """
    if not 0 < selection_fraction <= 1:
        raise ValueError("selection_fraction must lie in (0, 1]")
    if generations < 0:
        raise ValueError("generations must be >= 0")
    rng = np.random.default_rng(seed)
    if P is None:
        P = rotation_tensor(search_bits(pop.individuals[0].N), theta)
    else:
        P = _check_unitary(P, pop.individuals[0].N, "P")
    M = len(pop.individuals)
    keep = max(1, math.ceil(selection_fraction * M))
    best_x = -1

    def measure_all():
        nonlocal best_x
        obs = [measure_fitness(ind, rng) for ind in pop.individuals]
        pop.individuals = [o.individual for o in obs]
        values = np.array([o.value for o in obs])
        i = int(np.argmax(values))
        if values[i] > pop.best_fitness:
            pop.best_fitness = float(values[i])
            best_x = int(pop.individuals[i].support()[0])
        return values

    values = measure_all()
    history = []
    for t in range(generations):
        rank = np.argsort(-values, kind="stable")
        survivors = rank[:keep]
        new = list(pop.individuals)
        for j, slot in enumerate(rank[keep:]):
            new[slot] = uniform_restriction(pop.individuals[survivors[j % keep]])
        pop.individuals = [QuantumIndividual(ind.f, P @ ind.amps) for ind in new]
        values = measure_all()
        support = float(np.mean([ind.support().size for ind in pop.individuals]))
        history.append((t + 1, pop.best_fitness, support))
        if callback is not None:
            callback(t, pop)
    return QGAResult(pop.best_fitness, best_x, history, seed)
