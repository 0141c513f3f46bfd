"""
Monte-Carlo experiments: independent games with seeds base_seed, base_seed + 1, ...
and the aggregate statistics over them.
"""

import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np
from scipy import stats

from src.pcp.core import PcpInstance, arrangement_to_text
from src.protocol.config import GameConfig
from src.protocol.engine import run_game
from src.protocol.transcript import WIN
from src.strategy.players import make_strategy

logger = logging.getLogger(__name__)

CONFIDENCE_LEVEL = 0.95


def play_one(instance: PcpInstance, strategy_name: str, config: GameConfig, seed: int) -> Dict[str, Any]:
    """One game; strategies are built inside the worker so nothing stateful is shared."""
    started = time.perf_counter()
    transcript = run_game(instance, make_strategy(strategy_name, config), config.replace(seed=seed))
    elapsed = time.perf_counter() - started
    logger.info("seed %d: %s (%.3f s)", seed, transcript.verdict, elapsed)
    return {
        'seed': seed,
        'verdict': transcript.verdict,
        'failure_site': transcript.failure_site,
        'claim': arrangement_to_text(transcript.claim),
        'decoded': transcript.decoded,
        'seconds': elapsed,
    }


def winning_streaks(verdicts: List[str]) -> np.ndarray:
    """Lengths of the maximal runs of consecutive wins."""
    padded = np.concatenate(([0], np.asarray([v == WIN for v in verdicts], dtype=np.int8), [0]))
    edges = np.diff(padded)
    return np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)


def never_lose_curve(verdicts: List[str]) -> List[Dict[str, Any]]:
    """
    For r = 1..runs: win_rate^r, the chance of r independent wins in a row,
    and the fraction of windows of r consecutive seeds that were all wins.

    A streak of L wins holds L - r + 1 such windows, so the counts for every r
    come from suffix sums over the streak-length histogram.
    """
    runs = len(verdicts)
    win_rate = sum(v == WIN for v in verdicts) / runs
    histogram = np.bincount(winning_streaks(verdicts), minlength=runs + 2)[1:runs + 1]
    lengths = np.arange(1, runs + 1)
    streaks_at_least = np.cumsum(histogram[::-1])[::-1]
    wins_at_least = np.cumsum((histogram * lengths)[::-1])[::-1]
    all_won = wins_at_least - (lengths - 1) * streaks_at_least
    return [{'r': r, 'product': win_rate ** r, 'empirical': Fraction(int(all_won[r - 1]), runs - r + 1)}
            for r in range(1, runs + 1)]


@dataclass
class ExperimentReport:
    instance: PcpInstance
    strategy: str
    config: Dict[str, Any]
    base_seed: int
    runs: List[Dict[str, Any]]
    timings: bool = False
    never_lose: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        self.never_lose = never_lose_curve([run['verdict'] for run in self.runs])

    @property
    def wins(self) -> int:
        return sum(run['verdict'] == WIN for run in self.runs)

    @property
    def win_rate(self) -> Fraction:
        return Fraction(self.wins, len(self.runs))

    def confidence_interval(self, level: float = CONFIDENCE_LEVEL):
        ci = stats.binomtest(self.wins, len(self.runs)).proportion_ci(confidence_level=level, method='exact')
        return float(ci.low), float(ci.high)

    def failure_sites(self) -> Dict[str, int]:
        return dict(sorted(Counter(run['failure_site'] for run in self.runs if run['failure_site']).items()))

    def claims(self) -> Dict[str, int]:
        """How often each arrangement was claimed; a third verifier sees repeats across instances."""
        return dict(sorted(Counter(run['claim'] for run in self.runs).items()))

    def to_dict(self):
        low, high = self.confidence_interval()
        runs = []
        for run in self.runs:
            entry = {k: v for k, v in run.items() if k != 'seconds'}
            if self.timings:
                entry['seconds'] = run['seconds']
            runs.append(entry)
        return {
            'instance': self.instance.to_dict(),
            'strategy': self.strategy,
            'config': self.config,
            'seeds': {'base_seed': self.base_seed, 'derivation': 'base_seed + run index'},
            'runs': runs,
            'num_runs': len(self.runs),
            'wins': self.wins,
            'win_rate': self.win_rate,
            'win_rate_ci': {'level': CONFIDENCE_LEVEL, 'method': 'clopper-pearson', 'low': low, 'high': high},
            'failure_sites': self.failure_sites(),
            'claims': self.claims(),
            'never_lose': self.never_lose,
        }


def run_experiment(instance: PcpInstance, strategy_name: str, config: GameConfig, runs: int,
                   base_seed: int, workers: int = 1, timings: bool = False) -> ExperimentReport:
    if runs < 1:
        raise ValueError(f"runs must be at least 1, got {runs}")
    seeds = [base_seed + i for i in range(runs)]
    started = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {seed: pool.submit(play_one, instance, strategy_name, config, seed) for seed in seeds}
            results = {seed: future.result() for seed, future in futures.items()}
    else:
        results = {seed: play_one(instance, strategy_name, config, seed) for seed in seeds}
    logger.info("%d runs of %s on %s in %.1f s", runs, strategy_name, instance.name,
                time.perf_counter() - started)
    return ExperimentReport(instance, strategy_name, config.to_dict(), base_seed,
                            [results[seed] for seed in seeds], timings)
