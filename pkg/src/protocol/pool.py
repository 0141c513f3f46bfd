"""
Box pools.

A LabeledBox stands for `count` physically identical boxes: an integer in
sampled mode, an exact weight in exact mode. Random subsets are drawn with a
multivariate hypergeometric draw in sampled mode and taken proportionally
from every group in exact mode; measurements split a group into its outcome
branches, by binomial draw or by branch probability respectively.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np

from src.classical.physics import H, T, LEFT, RIGHT

logger = logging.getLogger(__name__)

UNVERIFIED = 'unverified'
MIXED = 'mixed'
OUTCOME_LABELS = ('hh', 'ht', 'th', 'tt')
LABELS = (UNVERIFIED, MIXED) + OUTCOME_LABELS

_NEXT = {UNVERIFIED: (MIXED,), MIXED: OUTCOME_LABELS}


class ProtocolViolation(RuntimeError):
    """A participant broke the rules of the game."""


@dataclass(frozen=True)
class LabeledBox:
    id: str
    physics: Any
    label: str
    count: Any

    def relabel(self, label: str) -> 'LabeledBox':
        if label not in _NEXT.get(self.label, ()):
            raise ProtocolViolation(f"box {self.id}: label {self.label} cannot become {label}")
        return replace(self, label=label)

    def with_count(self, count, suffix: str = '') -> 'LabeledBox':
        return replace(self, count=count, id=self.id + suffix)

    def to_dict(self):
        return {'id': self.id, 'label': self.label, 'count': render_count(self.count),
                'state': self.physics.to_dict()}


def render_count(count):
    if isinstance(count, Fraction):
        return str(count) if count.denominator != 1 else int(count)
    return count


def total(pool: List[LabeledBox]):
    return sum((box.count for box in pool), Fraction(0))


def is_zero(count) -> bool:
    return count == 0 or (isinstance(count, float) and abs(count) < 1e-15)


def take_fraction(pool: List[LabeledBox], fraction: Fraction, exact: bool, rng,
                  tag: str) -> Tuple[List[LabeledBox], List[LabeledBox]]:
    """Split a pool into a random `fraction` of its boxes and the rest."""
    if exact:
        chosen = [box.with_count(box.count * fraction, tag) for box in pool]
        rest = [box.with_count(box.count * (1 - fraction), tag + '~') for box in pool]
    else:
        size = total(pool) * fraction
        if size.denominator != 1:
            raise ProtocolViolation(f"cannot take {fraction} of {total(pool)} boxes")
        counts = np.array([int(box.count) for box in pool], dtype=np.int64)
        drawn = rng.multivariate_hypergeometric(counts, int(size))
        chosen = [box.with_count(int(n), tag) for box, n in zip(pool, drawn)]
        rest = [box.with_count(int(c - n), tag + '~') for box, c, n in zip(pool, counts, drawn)]
    return ([b for b in chosen if not is_zero(b.count)],
            [b for b in rest if not is_zero(b.count)])


def _branches(measurer, box: LabeledBox, side: str):
    result = measurer.branches(box.physics, side)
    if any(branch.outcome not in (H, T) for branch in result):
        raise ProtocolViolation(f"measurement device returned outcomes outside {{h, t}}")
    return result


def measure_side(pool: List[LabeledBox], side: str, measurer, exact: bool, rng
                 ) -> Dict[str, List[LabeledBox]]:
    """Measure compartment `side` of every box; returns the collapsed groups per outcome."""
    split = {H: [], T: []}
    for box in pool:
        result = _branches(measurer, box, side)
        if exact:
            for branch in result:
                split[branch.outcome].append(replace(
                    box, physics=branch.state, count=box.count * branch.probability,
                    id=f"{box.id}.{side}{branch.outcome}"))
            continue
        remaining = int(box.count)
        left_over = 1.0
        for i, branch in enumerate(result):
            if i == len(result) - 1:
                n = remaining
            else:
                n = int(rng.binomial(remaining, min(1.0, float(branch.probability) / left_over)))
                left_over -= float(branch.probability)
            remaining -= n
            if n:
                split[branch.outcome].append(replace(
                    box, physics=branch.state, count=n, id=f"{box.id}.{side}{branch.outcome}"))
    return split


def h_fraction(split: Dict[str, List[LabeledBox]]):
    heads, tails = total(split[H]), total(split[T])
    whole = heads + tails
    if is_zero(whole):
        raise ProtocolViolation("measured an empty pool")
    return heads / whole


def measure_both(pool: List[LabeledBox], measurer, exact: bool, rng) -> Dict[str, List[LabeledBox]]:
    """
    Measure left then right compartments of every box.

    Groups are merged per outcome pair since the collapsed box is then a
    basis state. Returns {outcome label: [merged box]}.
    """
    by_label: Dict[str, LabeledBox] = {}
    left = measure_side(pool, LEFT, measurer, exact, rng)
    for outcome_left in (H, T):
        right = measure_side(left[outcome_left], RIGHT, measurer, exact, rng)
        for outcome_right in (H, T):
            label = outcome_left + outcome_right
            for box in right[outcome_right]:
                if label in by_label:
                    kept = by_label[label]
                    by_label[label] = replace(kept, count=kept.count + box.count)
                else:
                    by_label[label] = box
    return {label: [box] for label, box in by_label.items()}


# ---------------------------------------------------------------------------
# Step-2 encoding session
# ---------------------------------------------------------------------------

class EncodingSession:
    """
    Alice's access to the mixed pool during encoding.

    She may measure mixed boxes (their labels become the outcome pair) and
    select boxes into the encoded quarter. Labels are never set directly.
    """

    def __init__(self, pool: List[LabeledBox], measurer, exact: bool, rng, quota, domino_tag: str):
        self._available: Dict[str, LabeledBox] = {box.id: box for box in pool}
        self._selected: List[LabeledBox] = []
        self._measurer = measurer
        self._exact = exact
        self._rng = rng
        self._tag = domino_tag
        self.quota = quota
        self.measurements = 0

    @property
    def exact(self) -> bool:
        return self._exact

    def available(self) -> List[LabeledBox]:
        return list(self._available.values())

    def available_by_label(self) -> Dict[str, List[LabeledBox]]:
        grouped: Dict[str, List[LabeledBox]] = {}
        for box in self._available.values():
            grouped.setdefault(box.label, []).append(box)
        return grouped

    def selected_total(self):
        return total(self._selected)

    def _pop(self, box_id: str) -> LabeledBox:
        if box_id not in self._available:
            raise ProtocolViolation(f"box {box_id} is not in the mixed pool")
        return self._available.pop(box_id)

    def measure(self, box_id: str) -> List[str]:
        """Measure both compartments of a mixed group; returns the ids of the labeled groups."""
        box = self._pop(box_id)
        if box.label != MIXED:
            raise ProtocolViolation(f"box {box_id} is labeled {box.label}, only mixed boxes get measured")
        self.measurements += 1
        new_ids = []
        for label, groups in measure_both([box], self._measurer, self._exact, self._rng).items():
            for group in groups:
                labeled = group.relabel(label)
                labeled = replace(labeled, id=f"{box_id}:{label}")
                self._available[labeled.id] = labeled
                new_ids.append(labeled.id)
        return new_ids

    def select(self, box_id: str, amount=None) -> None:
        box = self._pop(box_id)
        amount = box.count if amount is None else amount
        if amount < 0 or amount > box.count:
            self._available[box_id] = box
            raise ProtocolViolation(f"cannot select {amount} of {box.count} boxes from {box_id}")
        if not self._exact and int(amount) != amount:
            self._available[box_id] = box
            raise ProtocolViolation(f"sampled mode selects whole boxes, got {amount}")
        if not is_zero(amount):
            self._selected.append(box.with_count(amount, '+'))
        leftover = box.count - amount
        if not is_zero(leftover):
            self._available[box_id] = box.with_count(leftover)

    def finish(self) -> Tuple[List[LabeledBox], Any]:
        """Close the session; returns the encoded boxes and the discarded amount."""
        chosen = self.selected_total()
        if chosen != self.quota:
            raise ProtocolViolation(
                f"{self._tag}: encoded {render_count(chosen)} boxes, expected {render_count(self.quota)}")
        discarded = total(list(self._available.values()))
        logger.debug("%s: encoded %s boxes, discarded %s", self._tag,
                     render_count(chosen), render_count(discarded))
        return list(self._selected), discarded
