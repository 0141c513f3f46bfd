"""
Post Correspondence Problem instances over the alphabet {1, 2, 3, 4}.

Covers the domino/instance types, the string <-> probability codec used to
encode domino strings into coin probabilities, a bounded breadth-first match
search, random instance generation and the plain-text instance file format:

    # comment
    121/34
    4/12
"""

from collections import deque
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

ALPHABET = '1234'
NO_MATCH = 'no match'


class PcpError(ValueError):
    """Invalid domino string, instance text or probability."""


def _check_string(s: str, what: str = 'string') -> None:
    if not s:
        raise PcpError(f"empty {what}")
    for position, char in enumerate(s, start=1):
        if char not in ALPHABET:
            raise PcpError(
                f"invalid character {char!r} at position {position} of {what} {s!r}")


@dataclass(frozen=True)
class Domino:
    numerator: str
    denominator: str

    def __post_init__(self):
        _check_string(self.numerator, 'numerator')
        _check_string(self.denominator, 'denominator')

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    @property
    def is_trivial(self) -> bool:
        return self.numerator == self.denominator


@dataclass(frozen=True)
class PcpInstance:
    """Ordered dominoes A1..Am; index 1 is the first domino."""
    dominoes: Tuple[Domino, ...]
    name: str = 'instance'

    def __post_init__(self):
        if not self.dominoes:
            raise PcpError("an instance needs at least one domino")
        object.__setattr__(self, 'dominoes', tuple(self.dominoes))

    def __len__(self):
        return len(self.dominoes)

    def domino(self, index: int) -> Domino:
        if not 1 <= index <= len(self.dominoes):
            raise PcpError(f"domino index {index} outside 1..{len(self.dominoes)}")
        return self.dominoes[index - 1]

    @property
    def l_max(self) -> int:
        return max(max(len(d.numerator), len(d.denominator)) for d in self.dominoes)

    def to_dict(self):
        return {'name': self.name, 'dominoes': [str(d) for d in self.dominoes]}

    def __eq__(self, other):
        # names are file metadata, not part of the instance
        if not isinstance(other, PcpInstance):
            return NotImplemented
        return self.dominoes == other.dominoes

    def __hash__(self):
        return hash(self.dominoes)


Arrangement = Union[Tuple[int, ...], str]


def arrangement_to_text(arr: Arrangement) -> str:
    if arr == NO_MATCH:
        return NO_MATCH
    return ' '.join(f"A{i}" for i in arr)


@dataclass(frozen=True)
class StringProbability:
    value: Fraction
    digits: str


# ---------------------------------------------------------------------------
# Codec
# ---------------------------------------------------------------------------

def string_to_probability(s: str) -> StringProbability:
    """'121' -> 0.121 as an exact rational."""
    _check_string(s)
    return StringProbability(Fraction(int(s), 10 ** len(s)), s)


def _as_fraction(p) -> Fraction:
    if isinstance(p, StringProbability):
        return p.value
    if isinstance(p, (Fraction, int)):
        return Fraction(p)
    if isinstance(p, Decimal):
        return Fraction(p)
    return Fraction(float(p))


def probability_to_string(p, max_digits: int) -> str:
    """
    Read the decimal digits of p rounded to max_digits places and stop before
    the first '0'.

    Args:
        p: probability in (0, 0.5); exact rational, Decimal or float estimate
        max_digits: number of decimal places to read

    Returns:
        The decoded digit string, possibly empty.
    """
    if max_digits < 1:
        raise PcpError(f"max_digits must be at least 1, got {max_digits}")
    value = _as_fraction(p)
    if not 0 < value < Fraction(1, 2):
        raise PcpError(f"probability {float(value)} outside (0, 0.5)")
    scaled = round(value * 10 ** max_digits)
    digits = str(scaled).zfill(max_digits)
    return digits.split('0', 1)[0]


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def check_arrangement(instance: PcpInstance, arr: Sequence[int]) -> bool:
    if arr == NO_MATCH:
        raise PcpError("check_arrangement needs a sequence, not 'no match'")
    if not arr:
        raise PcpError("empty arrangement")
    top = ''.join(instance.domino(i).numerator for i in arr)
    bottom = ''.join(instance.domino(i).denominator for i in arr)
    return top == bottom


@dataclass(frozen=True)
class SearchBudget:
    max_expansions: int
    max_length: int

    def __post_init__(self):
        if self.max_expansions < 1 or self.max_length < 1:
            raise PcpError(f"search budget must be positive, got {self}")

    def to_dict(self):
        return {'max_expansions': self.max_expansions, 'max_length': self.max_length}


@dataclass(frozen=True)
class Found:
    arrangement: Tuple[int, ...]
    expansions: int

    found = True


@dataclass(frozen=True)
class NoneWithinBudget:
    expansions: int
    exhausted: bool

    found = False


def _extend(state: Tuple[bool, str], domino: Domino):
    """
    Extend a difference state by one domino.

    state is (top_ahead, suffix): the unmatched tail of whichever side is longer.
    Returns the new state, or None when the sides disagree.
    """
    top_ahead, suffix = state
    if top_ahead:
        top, bottom = suffix + domino.numerator, domino.denominator
    else:
        top, bottom = domino.numerator, suffix + domino.denominator
    if top.startswith(bottom):
        return (True, top[len(bottom):])
    if bottom.startswith(top):
        return (False, bottom[len(top):])
    return None


def never_balances(instance: PcpInstance) -> bool:
    """Every domino lengthens the same side, so no arrangement can balance."""
    diffs = [len(d.numerator) - len(d.denominator) for d in instance.dominoes]
    return all(x > 0 for x in diffs) or all(x < 0 for x in diffs)


def find_match(instance: PcpInstance, budget: SearchBudget):
    """
    Breadth-first search over difference states with a visited set.

    Shortest arrangements are found first; ties break by domino index order.
    """
    if never_balances(instance):
        return NoneWithinBudget(expansions=0, exhausted=True)

    queue = deque()
    visited = set()
    for index, domino in enumerate(instance.dominoes, start=1):
        state = _extend((True, ''), domino)
        if state is None:
            continue
        if state[1] == '':
            return Found((index,), 0)
        if state not in visited:
            visited.add(state)
            queue.append((state, (index,)))

    expansions = 0
    while queue:
        if expansions >= budget.max_expansions:
            return NoneWithinBudget(expansions, exhausted=False)
        state, path = queue.popleft()
        expansions += 1
        if len(path) >= budget.max_length:
            continue
        for index, domino in enumerate(instance.dominoes, start=1):
            child = _extend(state, domino)
            if child is None:
                continue
            if child[1] == '':
                return Found(path + (index,), expansions)
            if child not in visited:
                visited.add(child)
                queue.append((child, path + (index,)))
    return NoneWithinBudget(expansions, exhausted=True)


# ---------------------------------------------------------------------------
# Generation and file format
# ---------------------------------------------------------------------------

def random_instance(num_dominoes: int, max_string_len: int, ensure_nontrivial: bool,
                    seed: int, max_attempts: int = 1000) -> PcpInstance:
    if num_dominoes < 1:
        raise PcpError(f"num_dominoes must be positive, got {num_dominoes}")
    if max_string_len < 1:
        raise PcpError(f"max_string_len must be positive, got {max_string_len}")
    rng = np.random.default_rng(seed)

    def draw() -> str:
        length = int(rng.integers(1, max_string_len + 1))
        return ''.join(ALPHABET[int(i)] for i in rng.integers(0, 4, size=length))

    dominoes: List[Domino] = []
    for _ in range(num_dominoes):
        for _ in range(max_attempts):
            domino = Domino(draw(), draw())
            if not (ensure_nontrivial and domino.is_trivial):
                break
        else:
            raise PcpError(f"no nontrivial domino after {max_attempts} attempts")
        dominoes.append(domino)
    return PcpInstance(tuple(dominoes), name=f"random-{seed}")


def parse_instance(text: str, name: str = 'instance') -> PcpInstance:
    dominoes = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        parts = line.split('/')
        if len(parts) != 2:
            raise PcpError(f"line {line_no}: expected '<numerator>/<denominator>', got {line!r}")
        try:
            dominoes.append(Domino(parts[0].strip(), parts[1].strip()))
        except PcpError as e:
            raise PcpError(f"line {line_no}: {e}") from None
    if not dominoes:
        raise PcpError("instance file holds no dominoes")
    return PcpInstance(tuple(dominoes), name=name)


def serialize_instance(instance: PcpInstance) -> str:
    return ''.join(f"{d}\n" for d in instance.dominoes)


def load_instance(path) -> PcpInstance:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        raise PcpError(f"{path}: not UTF-8 text ({e.reason} at byte {e.start})") from None
    return parse_instance(text, name=path.stem)
