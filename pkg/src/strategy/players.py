"""
Player strategies.

A strategy answers the four duties of Alice in every game: the claimed
arrangement, the devices and boxes handed to V1 for each domino, and the
step-2 encoding, carried out through the engine's EncodingSession.
"""

import logging
import math
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Dict, List, Sequence

from src.classical import physics as classical
from src.pcp.core import NO_MATCH, Domino, PcpInstance, SearchBudget, find_match, string_to_probability
from src.protocol.config import GameConfig
from src.protocol.devices import Devices, classical_devices, quantum_devices
from src.protocol.pool import MIXED, OUTCOME_LABELS, UNVERIFIED, LabeledBox, ProtocolViolation, is_zero
from src.quantum import physics as quantum

logger = logging.getLogger(__name__)


def apportion(quota, weights: Sequence[Fraction], exact: bool) -> List:
    """
    Split `quota` boxes according to `weights` (summing to 1).

    Exact mode returns the exact products. Sampled mode uses the largest
    remainder method with ties going to the earlier outcome in hh, ht, th, tt.
    """
    if exact:
        return [quota * Fraction(w) for w in weights]
    quota = int(quota)
    shares = [quota * Fraction(w) for w in weights]
    counts = [math.floor(s) for s in shares]
    short = quota - sum(counts)
    by_remainder = sorted(range(len(shares)), key=lambda i: (-(shares[i] - counts[i]), i))
    for i in by_remainder[:short]:
        counts[i] += 1
    return counts


def product_weights(domino: Domino) -> Dict[str, Fraction]:
    k = string_to_probability(domino.numerator).value
    q = string_to_probability(domino.denominator).value
    return dict(zip(OUTCOME_LABELS, classical.product_box(k, q).joint))


def select_labels(session, weights: Dict[str, Fraction]) -> None:
    """Measure every mixed box, then select outcome groups in the given proportions."""
    for box in session.available_by_label().get(MIXED, []):
        session.measure(box.id)
    groups = session.available_by_label()
    targets = apportion(session.quota, [weights[label] for label in OUTCOME_LABELS], session.exact)
    for label, need in zip(OUTCOME_LABELS, targets):
        for box in groups.get(label, []):
            if is_zero(need):
                break
            amount = min(need, box.count)
            session.select(box.id, amount)
            need -= amount
        if not is_zero(need):
            raise ProtocolViolation(f"not enough {label} boxes to encode")


class PlayerStrategy(ABC):
    name = 'strategy'

    @abstractmethod
    def claim(self, instance: PcpInstance):
        ...

    def provide_devices(self, index: int, domino: Domino) -> Devices:
        return classical_devices()

    def provide_boxes(self, index: int, domino: Domino, n, rng) -> List[LabeledBox]:
        k = string_to_probability(domino.numerator).value
        q = string_to_probability(domino.denominator).value
        count = n if isinstance(n, int) else Fraction(n)
        return [LabeledBox(f"A{index}", classical.product_box(k, q), UNVERIFIED, count)]

    def encode(self, session, index: int, domino: Domino) -> None:
        select_labels(session, product_weights(domino))


class ClassicalHonest(PlayerStrategy):
    """Solves the instance within its budget and encodes every domino faithfully."""
    name = 'classical-honest'

    def __init__(self, solver_budget: SearchBudget):
        self.solver_budget = solver_budget

    @classmethod
    def from_config(cls, config: GameConfig) -> 'ClassicalHonest':
        return cls(config.solver_budget)

    def claim(self, instance: PcpInstance):
        result = find_match(instance, self.solver_budget)
        if result.found:
            return result.arrangement
        logger.debug("no match for %s within %d expansions", instance.name, result.expansions)
        return NO_MATCH


class ClassicalCheat(PlayerStrategy):
    """
    Claims [A1] and labels A1's boxes from the correlated distribution
    B[l^2, k-l^2, q-l^2] with l = min(k, q): both marginals are right and
    the conditional repeats l, but the label counts are correlated.
    """
    name = 'classical-cheat'

    @classmethod
    def from_config(cls, config: GameConfig) -> 'ClassicalCheat':
        return cls()

    def claim(self, instance: PcpInstance):
        return (1,)

    def encode(self, session, index: int, domino: Domino) -> None:
        if index != 1:
            return super().encode(session, index, domino)
        k = string_to_probability(domino.numerator).value
        q = string_to_probability(domino.denominator).value
        l = min(k, q)
        box = classical.ClassicalBox(l * l, k - l * l, q - l * l)
        select_labels(session, dict(zip(OUTCOME_LABELS, box.joint)))


class QuantumCheat(PlayerStrategy):
    """
    Claims [A1]. A1's boxes are prepared so that V1's mixing unitary turns
    them into the cheat state; the encoded quarter is selected without any
    measurement, so the labels stay mixed. Other dominoes are honest.
    """
    name = 'quantum-cheat'

    def __init__(self, chi: float = 0.0, random_phases: bool = False):
        self.unitary = quantum.MixingUnitary(chi)
        self.random_phases = random_phases

    @classmethod
    def from_config(cls, config: GameConfig) -> 'QuantumCheat':
        return cls(config.chi, config.cheat_phases == 'random')

    def claim(self, instance: PcpInstance):
        return (1,)

    def provide_devices(self, index: int, domino: Domino) -> Devices:
        if index != 1:
            return super().provide_devices(index, domino)
        return quantum_devices(self.unitary.chi)

    def provide_boxes(self, index: int, domino: Domino, n, rng) -> List[LabeledBox]:
        if index != 1:
            return super().provide_boxes(index, domino, n, rng)
        phases = rng.uniform(0, 2 * math.pi, size=4) if self.random_phases else None
        phi = quantum.cheat_state(string_to_probability(domino.numerator),
                                  string_to_probability(domino.denominator), phases)
        if self.unitary.chi == 0:
            prepared = quantum.premix_state(phi)
        else:
            prepared = quantum.unmix_state(self.unitary, phi)
        count = n if isinstance(n, int) else Fraction(n)
        return [LabeledBox("A1", prepared, UNVERIFIED, count)]

    def encode(self, session, index: int, domino: Domino) -> None:
        if index != 1:
            return super().encode(session, index, domino)
        need = session.quota
        for box in session.available():
            if is_zero(need):
                break
            amount = min(need, box.count)
            session.select(box.id, amount)
            need -= amount


STRATEGIES = {
    ClassicalHonest.name: ClassicalHonest,
    ClassicalCheat.name: ClassicalCheat,
    QuantumCheat.name: QuantumCheat,
}


def make_strategy(name: str, config: GameConfig) -> PlayerStrategy:
    try:
        return STRATEGIES[name].from_config(config)
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}, expected one of {sorted(STRATEGIES)}") from None
