"""
Game configuration, loaded from constant/configuration/*.json.

A profile looks like:

    {
      "configuration_name": "exact",
      "display_name": "Exact propagation",
      "configuration_description": "...",
      "mode": "exact",
      "step3_eps": 1e-4,
      ...
    }

Unknown keys other than the descriptive ones are rejected.
"""

import dataclasses
import json
from dataclasses import dataclass, field
from numbers import Integral, Real
from pathlib import Path
from typing import Any, Dict

from src.pcp.core import PcpError, SearchBudget

MODES = ('exact', 'sampled')
CHEAT_PHASES = ('zero', 'random')
_DESCRIPTIVE = ('configuration_name', 'display_name', 'configuration_description')
_KINDS = {
    'mode': str, 'cheat_phases': str, 'name': str,
    'n_constant': Real, 'step1_alpha': Real, 'step3_eps': Real, 'step4_eps': Real,
    'exact_tolerance': Real, 'chi': Real,
    'step1_rounds': Integral, 'seed': Integral,
    'solver_budget': SearchBudget, 'referee_budget': SearchBudget,
}


class ConfigError(ValueError):
    """Invalid game configuration."""


@dataclass(frozen=True)
class GameConfig:
    mode: str = 'exact'
    n_constant: float = 1
    step1_alpha: float = 1e-6
    step1_rounds: int = 3
    step3_eps: float = 1e-4
    step4_eps: float = 0.01
    exact_tolerance: float = 1e-12
    chi: float = 0.0
    cheat_phases: str = 'zero'
    solver_budget: SearchBudget = field(default_factory=lambda: SearchBudget(20000, 12))
    referee_budget: SearchBudget = field(default_factory=lambda: SearchBudget(200000, 16))
    seed: int = 0
    name: str = 'default'

    def __post_init__(self):
        for knob, kind in _KINDS.items():
            value = getattr(self, knob)
            if isinstance(value, bool) or not isinstance(value, kind):
                raise ConfigError(f"{knob} must be {kind.__name__}, got {value!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.cheat_phases not in CHEAT_PHASES:
            raise ConfigError(f"cheat_phases must be one of {CHEAT_PHASES}, got {self.cheat_phases!r}")
        for knob in ('step1_alpha', 'step3_eps', 'step4_eps', 'exact_tolerance'):
            value = getattr(self, knob)
            if not 0 < value < 1:
                raise ConfigError(f"{knob} = {value} outside (0, 1)")
        if self.n_constant <= 0:
            raise ConfigError(f"n_constant must be positive, got {self.n_constant}")
        if self.step1_rounds < 1:
            raise ConfigError(f"step1_rounds must be positive, got {self.step1_rounds}")

    @property
    def exact(self) -> bool:
        return self.mode == 'exact'

    def replace(self, **changes) -> 'GameConfig':
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GameConfig':
        data = dict(data)
        name = data.pop('configuration_name', 'default')
        for key in _DESCRIPTIVE[1:]:
            data.pop(key, None)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            for key in ('solver_budget', 'referee_budget'):
                if key in data:
                    data[key] = SearchBudget(**data[key])
        except (TypeError, PcpError) as e:
            raise ConfigError(f"invalid budget: {e}") from None
        return cls(name=name, **data)

    @classmethod
    def load(cls, path) -> 'GameConfig':
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ConfigError(f"{path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: a profile is a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'configuration_name': self.name,
            'mode': self.mode,
            'n_constant': self.n_constant,
            'step1_alpha': self.step1_alpha,
            'step1_rounds': self.step1_rounds,
            'step3_eps': self.step3_eps,
            'step4_eps': self.step4_eps,
            'exact_tolerance': self.exact_tolerance,
            'chi': self.chi,
            'cheat_phases': self.cheat_phases,
            'solver_budget': self.solver_budget.to_dict(),
            'referee_budget': self.referee_budget.to_dict(),
            'seed': self.seed,
        }
