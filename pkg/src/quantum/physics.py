"""
Quantum coins (qubits) and two-qubit boxes.

Basis order is (hh, ht, th, tt) with h = |0> and t = |1>; the first slot
is the left compartment. The mixing device is the unitary family

    M[chi] = 1/sqrt(2) [[1, -e^{i chi}], [e^{i chi}, 1]]

and measurement is projective along sigma_z.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.classical.physics import H, T, LEFT, RIGHT

NORM_TOLERANCE = 1e-12

# amplitude indices holding h for each compartment
_HEAD_SLOTS = {LEFT: (0, 1), RIGHT: (0, 2)}
_TAIL_SLOTS = {LEFT: (2, 3), RIGHT: (1, 3)}


def _check_norm(vector: np.ndarray, what: str) -> None:
    norm = float(np.sum(np.abs(vector) ** 2))
    if abs(norm - 1) > NORM_TOLERANCE:
        raise ValueError(f"{what} has squared norm {norm}, expected 1")


@dataclass(frozen=True)
class QubitState:
    amp_h: complex
    amp_t: complex

    def __post_init__(self):
        _check_norm(self.vector, 'qubit')

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp_h, self.amp_t], dtype=complex)

    @classmethod
    def from_vector(cls, vector) -> 'QubitState':
        return cls(complex(vector[0]), complex(vector[1]))


def qubit_state(p: float, zeta: float = 0.0) -> QubitState:
    """sqrt(p)|h> + e^{i zeta} sqrt(1 - p)|t>."""
    return QubitState(complex(math.sqrt(p)), complex(np.exp(1j * zeta) * math.sqrt(1 - p)))


@dataclass(frozen=True)
class QuantumBox:
    w: complex
    x: complex
    y: complex
    z: complex

    def __post_init__(self):
        _check_norm(self.vector, 'box')

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=complex)

    @classmethod
    def from_vector(cls, vector) -> 'QuantumBox':
        return cls(*(complex(v) for v in vector))

    def to_dict(self):
        return {'physics': 'quantum',
                'amplitudes': [[repr(float(v.real)), repr(float(v.imag))] for v in self.vector]}


def basis_box(outcome_left: str, outcome_right: str) -> QuantumBox:
    vector = np.zeros(4, dtype=complex)
    vector[(0 if outcome_left == H else 2) + (0 if outcome_right == H else 1)] = 1
    return QuantumBox.from_vector(vector)


@dataclass(frozen=True)
class MixingUnitary:
    chi: float = 0.0

    def __post_init__(self):
        if not 0 <= self.chi <= 2 * math.pi:
            raise ValueError(f"chi = {self.chi} outside [0, 2 pi]")

    @property
    def matrix(self) -> np.ndarray:
        phase = np.exp(1j * self.chi)
        return np.array([[1, -phase], [phase, 1]], dtype=complex) / math.sqrt(2)


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def apply_mixing(u: MixingUnitary, q: QubitState) -> QubitState:
    return QubitState.from_vector(u.matrix @ q.vector)


def apply_mix_both(u: MixingUnitary, b: QuantumBox) -> QuantumBox:
    return QuantumBox.from_vector(np.kron(u.matrix, u.matrix) @ b.vector)


def unmix_state(u: MixingUnitary, phi: QuantumBox) -> QuantumBox:
    """The state that u x u maps onto phi."""
    m = np.kron(u.matrix, u.matrix)
    return QuantumBox.from_vector(m.conj().T @ phi.vector)


def premix_state(phi: QuantumBox) -> QuantumBox:
    """The state that M[0] x M[0] maps onto phi."""
    a, b, c, d = phi.vector
    return QuantumBox.from_vector(0.5 * np.array([
        a + b + c + d,
        -a + b - c + d,
        -a - b + c + d,
        a - b - c + d,
    ]))


# ---------------------------------------------------------------------------
# Measurement
# ---------------------------------------------------------------------------

def outcome_distribution(b: QuantumBox) -> Tuple[float, float, float, float]:
    """Born-rule probabilities of (hh, ht, th, tt)."""
    return tuple(float(p) for p in np.abs(b.vector) ** 2)


def mixed_outcome_distribution(b: QuantumBox) -> Tuple[float, float, float, float]:
    """Closed-form outcome probabilities after M[0] x M[0], in the pre-mix amplitudes."""
    w, x, y, z = b.vector
    return (
        abs(w - x - y + z) ** 2 / 4,
        abs(w + x - y - z) ** 2 / 4,
        abs(w - x + y - z) ** 2 / 4,
        abs(w + x + y + z) ** 2 / 4,
    )


def marginal(b: QuantumBox, side: str) -> float:
    probs = np.abs(b.vector) ** 2
    return float(sum(probs[i] for i in _HEAD_SLOTS[side]))


def _project(b: QuantumBox, side: str, outcome: str) -> Tuple[float, Optional[QuantumBox]]:
    slots = _HEAD_SLOTS[side] if outcome == H else _TAIL_SLOTS[side]
    vector = np.zeros(4, dtype=complex)
    for i in slots:
        vector[i] = b.vector[i]
    weight = float(np.sum(np.abs(vector) ** 2))
    if weight <= NORM_TOLERANCE:
        return weight, None
    return weight, QuantumBox.from_vector(vector / math.sqrt(weight))


class Branch(NamedTuple):
    outcome: str
    probability: float
    state: QuantumBox


def branches(b: QuantumBox, side: str) -> List[Branch]:
    if side not in _HEAD_SLOTS:
        raise ValueError(f"unknown side {side!r}")
    result = []
    for outcome in (H, T):
        weight, collapsed = _project(b, side, outcome)
        if collapsed is not None:
            result.append(Branch(outcome, weight, collapsed))
    return result


def measure_compartment(b: QuantumBox, side: str, rng) -> Tuple[str, QuantumBox]:
    p_head, collapsed_h = _project(b, side, H)
    if collapsed_h is not None and rng.random() < p_head:
        return H, collapsed_h
    _, collapsed_t = _project(b, side, T)
    if collapsed_t is None:
        return H, collapsed_h
    return T, collapsed_t


# ---------------------------------------------------------------------------
# Cheat state
# ---------------------------------------------------------------------------

def cheat_moduli(k1: float, q1: float) -> Tuple[float, float, float, float]:
    """|a|, |b|, |c|, |d| whose marginals are (k1, q1) and whose conditional repeats min(k1, q1)."""
    k1, q1 = float(k1), float(q1)
    l = min(k1, q1)
    return (l,
            math.sqrt(k1 - l * l),
            math.sqrt(q1 - l * l),
            math.sqrt(1 - k1 - q1 + l * l))


def cheat_state(k1, q1, phases: Optional[Sequence[float]] = None) -> QuantumBox:
    """
    Box |phi> = (a, b, c, d) passing the encoding check for (k1, q1) while
    decoding both strings of the domino to the same value.

    Args:
        k1, q1: string probabilities (StringProbability, Fraction or float) in (0, 0.5)
        phases: optional four phases; all amplitudes are real when omitted
    """
    k1 = getattr(k1, 'value', k1)
    q1 = getattr(q1, 'value', q1)
    moduli = np.array(cheat_moduli(k1, q1), dtype=complex)
    if phases is not None:
        moduli = moduli * np.exp(1j * np.asarray(phases, dtype=float))
    return QuantumBox.from_vector(moduli)
