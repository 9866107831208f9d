"""Exact state-vector simulation for small qubit registers.

Basis labels follow ``|i_{n-1} ... i_1 i_0>`` with qubit 0 as the least
significant bit, so amplitude index ``i`` has bit ``k`` equal to the value of
qubit ``k``.  Multi-qubit gates take their ``targets`` in the order of the
gate matrix's own basis: ``targets[0]`` is the most significant bit of the
gate's local index (for CNOT that is the control).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

ATOL = 1e-9
_S2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitudes of an ``num_qubits`` register."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if amps.size != 2**self.num_qubits:
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm:.12g})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @classmethod
    def basis(cls, label: int | str, num_qubits: int | None = None) -> "StateVector":
        """``basis("10")`` is |10>; ``basis(2, 2)`` is the same state."""
        if isinstance(label, str):
            num_qubits = len(label)
            label = int(label, 2)
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[label] = 1.0
        return cls(num_qubits, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def allclose(self, other: "StateVector", atol: float = ATOL) -> bool:
        return (self.num_qubits == other.num_qubits
                and np.allclose(self.amplitudes, other.amplitudes, atol=atol))

    def __repr__(self):
        return f"StateVector({self.num_qubits}, {np.round(self.amplitudes, 6)!r})"


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = m.shape[0]
        if m.shape != (dim, dim) or dim not in (2, 4, 8):
            raise ValueError(f"gate {self.name}: bad matrix shape {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(dim), atol=ATOL):
            raise ValueError(f"gate {self.name} is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))


def rotation(theta: float) -> Gate:
    """Real rotation ``[[cos, -sin], [sin, cos]]`` used by QIGA and the QGA mutation."""
    c, s = np.cos(theta), np.sin(theta)
    return Gate(f"U({theta:g})", np.array([[c, -s], [s, c]]))


I = Gate("I", np.eye(2))
X = Gate("X", [[0, 1], [1, 0]])
H = Gate("H", _S2 * np.array([[1, 1], [1, -1]]))
# the two teleportation rotations
L = Gate("L", _S2 * np.array([[1, -1], [1, 1]]))
R = Gate("R", _S2 * np.array([[1, 1], [-1, 1]]))
S = Gate("S", [[1j, 0], [0, 1]])
T = Gate("T", [[-1, 0], [0, -1j]])
CNOT = Gate("CNOT", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])

NAMED_GATES: dict[str, Gate] = {g.name: g for g in (I, X, H, L, R, S, T, CNOT)}


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """``a ⊗ b``; ``a`` occupies the high-order qubits."""
    return StateVector(a.num_qubits + b.num_qubits,
                       np.kron(a.amplitudes, b.amplitudes))


def _check_qubits(n: int, qubits: Sequence[int]):
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubit indices must be distinct: {list(qubits)}")
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for a {n}-qubit register")


def apply_matrix(amps: np.ndarray, matrix: np.ndarray, targets: Sequence[int],
                 num_qubits: int) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix to raw amplitudes; no normalization checks."""
    k = len(targets)
    psi = amps.reshape((2,) * num_qubits)
    axes = [num_qubits - 1 - t for t in targets]
    m = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(m, psi, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def apply_gate(s: StateVector, g: Gate, targets: Sequence[int]) -> StateVector:
    targets = list(targets)
    if len(targets) != g.arity:
        raise ValueError(
            f"gate {g.name} acts on {g.arity} qubit(s), got targets {targets}")
    _check_qubits(s.num_qubits, targets)
    return StateVector(s.num_qubits,
                       apply_matrix(s.amplitudes, g.matrix, targets, s.num_qubits))


def _register_value(index: int, qubits: Sequence[int]) -> int:
    # qubits[0] is the register's most significant bit
    v = 0
    for q in qubits:
        v = (v << 1) | ((index >> q) & 1)
    return v


def oracle_permutation(f: Sequence[int] | Mapping[int, int] | Callable[[int], int],
                       num_qubits: int, x_qubits: Sequence[int],
                       y_qubits: Sequence[int]) -> np.ndarray:
    """Index map of ``|x>|y> -> |x>|y xor f(x)>`` on the full register."""
    x_qubits, y_qubits = list(x_qubits), list(y_qubits)
    _check_qubits(num_qubits, x_qubits + y_qubits)
    lookup = f if callable(f) else (lambda x: f[x])
    ny = len(y_qubits)
    fx = {}
    for x in range(2 ** len(x_qubits)):
        try:
            v = int(lookup(x))
        except (KeyError, IndexError):
            raise ValueError(f"f is not defined at x={x}") from None
        if not 0 <= v < 2**ny:
            raise ValueError(f"f({x}) = {v} does not fit in {ny} output qubit(s)")
        fx[x] = v
    perm = np.empty(2**num_qubits, dtype=np.int64)
    for i in range(2**num_qubits):
        v = fx[_register_value(i, x_qubits)]
        j = i
        for pos, q in enumerate(y_qubits):
            if (v >> (ny - 1 - pos)) & 1:
                j ^= 1 << q
        perm[i] = j
    return perm


def apply_oracle(s: StateVector, f, x_qubits: Sequence[int],
                 y_qubits: Sequence[int]) -> StateVector:
    """``U_f |x>|y> = |x>|y xor f(x)>``; ``f`` may be a table, dict or callable."""
    perm = oracle_permutation(f, s.num_qubits, x_qubits, y_qubits)
    out = np.empty_like(s.amplitudes)
    out[perm] = s.amplitudes
    return StateVector(s.num_qubits, out)


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome: tuple[int, ...]
    probability: float
    state: StateVector

    @property
    def label(self) -> str:
        return "".join(map(str, self.outcome))


def project(amps: np.ndarray, qubits: Sequence[int], outcome: Sequence[int]) -> np.ndarray:
    """Unnormalized projection of raw amplitudes onto ``qubits == outcome``."""
    idx = np.arange(amps.size)
    keep = np.ones(amps.size, dtype=bool)
    for q, bit in zip(qubits, outcome):
        keep &= ((idx >> q) & 1) == bit
    return np.where(keep, amps, 0)


def measure(s: StateVector, qubits: Sequence[int]) -> list[MeasurementOutcome]:
    """Every nonzero-probability branch of a computational-basis measurement.

    Outcomes are listed in lexicographic order of the measured bits (in the
    order ``qubits`` is given) and carry the renormalized post-measurement state.
    """
    qubits = list(qubits)
    _check_qubits(s.num_qubits, qubits)
    outcomes = []
    for bits in product((0, 1), repeat=len(qubits)):
        branch = project(s.amplitudes, qubits, bits)
        p = float(np.vdot(branch, branch).real)
        if p <= ATOL**2:
            continue
        outcomes.append(MeasurementOutcome(
            bits, p, StateVector(s.num_qubits, branch / np.sqrt(p))))
    return outcomes


def sample_measurement(s: StateVector, qubits: Sequence[int],
                       rng: np.random.Generator) -> MeasurementOutcome:
    outcomes = measure(s, qubits)
    p = np.array([o.probability for o in outcomes])
    return outcomes[rng.choice(len(outcomes), p=p / p.sum())]


def bell_pair_circuit(s: StateVector) -> StateVector:
    """L on qubit 1 then CNOT (control 1, target 0): ``|f>|00> -> |f>|β00>``."""
    if s.num_qubits != 3:
        raise ValueError("the EPR stage works on a 3-qubit register")
    return apply_gate(apply_gate(s, L, [1]), CNOT, [1, 0])


def product_residual(s: StateVector, split: int) -> float:
    """Distance from ``s`` to the nearest product state across a bipartition.

    ``split`` is the number of high-order qubits in the first factor.  The
    optimum rank-one approximation comes from the SVD of the reshaped
    amplitudes; the residual is the Euclidean norm of the discarded part.
    """
    if not 0 < split < s.num_qubits:
        raise ValueError("split must leave both factors non-empty")
    m = s.amplitudes.reshape(2**split, 2 ** (s.num_qubits - split))
    sv = np.linalg.svd(m, compute_uv=False)
    return float(np.sqrt(np.sum(sv[1:] ** 2)))
