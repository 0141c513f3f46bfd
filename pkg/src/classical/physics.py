"""
Classical coins and two-compartment boxes as exact probability vectors.

A coin C_p puts probability p on h. A box B[alpha, beta, gamma] puts
probabilities alpha, beta, gamma, delta = 1 - alpha - beta - gamma on
hh, ht, th, tt, the first letter being the left compartment.
Measurement is a probability update rule; the mixing device is the constant
stochastic map onto C_1/2.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Tuple

H, T = 'h', 't'
LEFT, RIGHT = 'L', 'R'
OUTCOMES = (H, T)
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def _probability(value, name: str) -> Fraction:
    value = Fraction(value)
    if not 0 <= value <= 1:
        raise ValueError(f"{name} = {value} outside [0, 1]")
    return value


@dataclass(frozen=True)
class ClassicalCoin:
    p_head: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'p_head', _probability(self.p_head, 'p_head'))


COIN_H = ClassicalCoin(Fraction(1))
COIN_T = ClassicalCoin(Fraction(0))
COIN_HALF = ClassicalCoin(HALF)


@dataclass(frozen=True)
class ClassicalBox:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    def __post_init__(self):
        for name in ('alpha', 'beta', 'gamma'):
            object.__setattr__(self, name, _probability(getattr(self, name), name))
        if self.alpha + self.beta + self.gamma > 1:
            raise ValueError(f"box components sum above 1: {self}")

    @property
    def delta(self) -> Fraction:
        return 1 - self.alpha - self.beta - self.gamma

    @property
    def joint(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        """Probabilities of (hh, ht, th, tt)."""
        return (self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def from_joint(cls, hh, ht, th, tt) -> 'ClassicalBox':
        total = Fraction(hh) + Fraction(ht) + Fraction(th) + Fraction(tt)
        if total != 1:
            raise ValueError(f"joint distribution sums to {total}")
        return cls(Fraction(hh), Fraction(ht), Fraction(th))

    def to_dict(self):
        return {'physics': 'classical',
                'joint': [str(p) for p in self.joint]}


BOX_UNIFORM = ClassicalBox(QUARTER, QUARTER, QUARTER)


def box_from_dict(data) -> ClassicalBox:
    return ClassicalBox.from_joint(*(Fraction(p) for p in data['joint']))


def basis_box(outcome_left: str, outcome_right: str) -> ClassicalBox:
    """Deterministic box C(xy)."""
    joint = [Fraction(0)] * 4
    joint[OUTCOMES.index(outcome_left) * 2 + OUTCOMES.index(outcome_right)] = Fraction(1)
    return ClassicalBox.from_joint(*joint)


# ---------------------------------------------------------------------------
# Coins
# ---------------------------------------------------------------------------

def measure_coin(coin: ClassicalCoin, rng) -> Tuple[str, ClassicalCoin]:
    if rng.random() < float(coin.p_head):
        return H, COIN_H
    return T, COIN_T


def mix_coin(coin: ClassicalCoin) -> ClassicalCoin:
    return COIN_HALF


# ---------------------------------------------------------------------------
# Boxes
# ---------------------------------------------------------------------------

def mix_box(box: ClassicalBox) -> ClassicalBox:
    """Mixing device on both compartments: every box becomes uniform."""
    return BOX_UNIFORM


def product_box(p, q) -> ClassicalBox:
    p = _probability(p, 'p')
    q = _probability(q, 'q')
    return ClassicalBox(p * q, p * (1 - q), (1 - p) * q)


def is_uncorrelated(box: ClassicalBox) -> bool:
    return box.alpha * box.delta == box.beta * box.gamma


def marginal(box: ClassicalBox, side: str) -> Fraction:
    """Probability of h in the given compartment."""
    if side == LEFT:
        return box.alpha + box.beta
    if side == RIGHT:
        return box.alpha + box.gamma
    raise ValueError(f"unknown side {side!r}")


def _restrict(box: ClassicalBox, side: str, outcome: str) -> List[Fraction]:
    keep = {
        (LEFT, H): (0, 1), (LEFT, T): (2, 3),
        (RIGHT, H): (0, 2), (RIGHT, T): (1, 3),
    }[(side, outcome)]
    return [p if i in keep else Fraction(0) for i, p in enumerate(box.joint)]


def conditional(box: ClassicalBox, side: str, outcome: str) -> ClassicalBox:
    """Bayes-normalized box after observing `outcome` in compartment `side`."""
    restricted = _restrict(box, side, outcome)
    weight = sum(restricted)
    if weight == 0:
        raise ValueError(f"outcome {outcome} on {side} has probability zero for {box}")
    return ClassicalBox.from_joint(*(p / weight for p in restricted))


class Branch(NamedTuple):
    outcome: str
    probability: Fraction
    state: ClassicalBox


def branches(box: ClassicalBox, side: str) -> List[Branch]:
    """Possible outcomes of measuring one compartment, with nonzero probability."""
    p_head = marginal(box, side)
    result = []
    for outcome, probability in ((H, p_head), (T, 1 - p_head)):
        if probability > 0:
            result.append(Branch(outcome, probability, conditional(box, side, outcome)))
    return result


def measure_box_compartment(box: ClassicalBox, side: str, rng) -> Tuple[str, ClassicalBox]:
    p_head = marginal(box, side)
    outcome = H if rng.random() < float(p_head) else T
    return outcome, conditional(box, side, outcome)
