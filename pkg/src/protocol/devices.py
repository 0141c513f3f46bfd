"""
Measurement and mixing devices a player hands to V1.

A measurer exposes `branches(box, side)` returning (outcome, probability,
collapsed box) triples; a mixer exposes `mix(box)` acting on both
compartments. V1 verifies both, then forwards them to V2 and the referee.
"""

from dataclasses import dataclass
from typing import Any, List

from src.classical import physics as classical
from src.quantum import physics as quantum


class ClassicalMeasurer:
    name = 'classical-measure'

    def branches(self, box, side) -> List[Any]:
        return classical.branches(box, side)


class ClassicalMixer:
    name = 'classical-mix'

    def mix(self, box):
        return classical.mix_box(box)


class QuantumMeasurer:
    name = 'sigma-z'

    def branches(self, box, side) -> List[Any]:
        return quantum.branches(box, side)


@dataclass(frozen=True)
class QuantumMixer:
    unitary: quantum.MixingUnitary = quantum.MixingUnitary(0.0)

    @property
    def name(self) -> str:
        return f"mixing-unitary[chi={self.unitary.chi!r}]"

    def mix(self, box):
        return quantum.apply_mix_both(self.unitary, box)


class RiggedMixer:
    """A mixer that always leaves both coins on h."""
    name = 'rigged-mix'

    def mix(self, box):
        return classical.basis_box(classical.H, classical.H)


@dataclass(frozen=True)
class Devices:
    measurer: Any
    mixer: Any

    def to_dict(self):
        return {'measure': self.measurer.name, 'mix': self.mixer.name}


def classical_devices() -> Devices:
    return Devices(ClassicalMeasurer(), ClassicalMixer())


def quantum_devices(chi: float = 0.0) -> Devices:
    return Devices(QuantumMeasurer(), QuantumMixer(quantum.MixingUnitary(chi)))
