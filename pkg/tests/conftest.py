from pathlib import Path

import numpy as np
import pytest

from src.pcp.core import load_instance
from src.protocol.config import GameConfig

ROOT = Path(__file__).resolve().parents[1]
CONFIGURATION = ROOT / 'constant' / 'configuration'
INSTANCE = ROOT / 'constant' / 'instance'


@pytest.fixture
def exact_config():
    return GameConfig.load(CONFIGURATION / 'exact.json')


@pytest.fixture
def sampled_config():
    return GameConfig.load(CONFIGURATION / 'sampled.json')


@pytest.fixture
def desk_config():
    return GameConfig.load(CONFIGURATION / 'desk.json')


@pytest.fixture
def instance_path():
    return lambda name: INSTANCE / f"{name}.txt"


@pytest.fixture
def instance():
    return lambda name: load_instance(INSTANCE / f"{name}.txt")


@pytest.fixture
def rng():
    return np.random.default_rng(42)
