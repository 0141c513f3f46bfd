#!/usr/bin/env python3
"""
Command-line entry point.

    python -m src.harness gen --num-dominoes 3 --max-len 3 --seed 7
    python -m src.harness solve constant/instance/classic.txt
    python -m src.harness play constant/instance/worked.txt quantum-cheat --mode exact
    python -m src.harness experiment constant/instance/desk.txt quantum-cheat --runs 100
    python -m src.harness logic --map modulo:2

JSON documents and instance text go to stdout (or --out); logs go to stderr.
play exits 0 on Win and 1 on Lose; input errors exit 2.
"""

import argparse
import logging
import sys
from pathlib import Path

from src.harness.experiment import run_experiment
from src.logic.lab import (INTERFERENCE, LogicError, Theory, bundled_theories, construct_D,
                           construct_D_f, construct_D_tilde, executable_theories, halting_proxy,
                           index_map, proxy_corpus, search_free_map, truth_tables,
                           trivially_decidable_in)
from src.logs import LEVELS, setup_logging
from src.pcp.core import (PcpError, SearchBudget, find_match, load_instance, random_instance,
                          serialize_instance)
from src.protocol.config import ConfigError, GameConfig
from src.protocol.engine import required_boxes, run_game
from src.protocol.transcript import dumps
from src.strategy.players import STRATEGIES, make_strategy

logger = logging.getLogger(__name__)

CONFIGURATION_DIR = Path(__file__).resolve().parents[2] / 'constant' / 'configuration'
DEFAULT_CONFIG = CONFIGURATION_DIR / 'exact.json'
EXPERIMENT_CONFIG = CONFIGURATION_DIR / 'desk.json'


def parse_budget(text: str, default: SearchBudget) -> SearchBudget:
    """'<max_expansions>' or '<max_expansions>:<max_length>'."""
    expansions, _, length = text.partition(':')
    try:
        return SearchBudget(int(expansions), int(length) if length else default.max_length)
    except ValueError:
        raise ConfigError(f"budget must look like 20000 or 20000:12, got {text!r}") from None


def load_config(args) -> GameConfig:
    config = GameConfig.load(args.config)
    return config.replace(
        mode=args.mode,
        seed=args.seed,
        n_constant=args.n_constant,
        step1_alpha=args.tol_step1,
        step3_eps=args.tol_step3,
        step4_eps=args.tol_step4,
        solver_budget=args.budget_solver and parse_budget(args.budget_solver, config.solver_budget),
        referee_budget=args.budget_referee and parse_budget(args.budget_referee, config.referee_budget),
    )


def emit(text: str, out) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding='utf-8')
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    seed = 0 if args.seed is None else args.seed
    instance = random_instance(args.num_dominoes, args.max_len, args.nontrivial, seed)
    emit(serialize_instance(instance), args.out)
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    config = load_config(args)
    result = find_match(instance, config.solver_budget)
    document = {
        'instance': instance.to_dict(),
        'budget': config.solver_budget.to_dict(),
        'found': result.found,
        'expansions': result.expansions,
    }
    if result.found:
        document['arrangement'] = [f"A{i}" for i in result.arrangement]
    else:
        document['exhausted'] = result.exhausted
    emit(dumps(document), args.out)
    return 0


def cmd_play(args) -> int:
    instance = load_instance(args.instance)
    config = load_config(args)
    logger.info("%s boxes per domino", required_boxes(instance, config))
    transcript = run_game(instance, make_strategy(args.strategy, config), config)
    emit(transcript.to_json(), args.out)
    return 0 if transcript.won else 1


def cmd_experiment(args) -> int:
    instance = load_instance(args.instance)
    config = load_config(args)
    if args.runs < 1:
        raise ConfigError(f"--runs must be at least 1, got {args.runs}")
    if config.exact:
        # exact games are deterministic, every seed replays the same game
        raise ConfigError(f"experiments play sampled games, profile {config.name!r} is in exact mode")
    report = run_experiment(instance, args.strategy, config, args.runs, config.seed,
                            workers=args.workers, timings=args.timings)
    emit(dumps(report.to_dict()), args.out)
    return 0


def parse_valuation(text: str) -> Theory:
    name, _, value = text.partition('=')
    if value not in ('yes', 'no') or not name:
        raise LogicError(f"valuation must look like quantum=yes, got {text!r}")
    return Theory(name, {INTERFERENCE: value == 'yes'})


def cmd_logic(args) -> int:
    config = load_config(args)
    if args.valuation:
        theories = [parse_valuation(v) for v in args.valuation]
    elif args.play:
        theories = executable_theories(load_instance(args.play), config)
    else:
        theories = bundled_theories()
    if args.swap:
        theories = [t.negated(INTERFERENCE, t.name) for t in theories]

    corpus = proxy_corpus(args.corpus_size, args.corpus_seed)
    H = halting_proxy(corpus, config.solver_budget)
    f = search_free_map(corpus) if args.map == 'search-free' else index_map(args.map, len(corpus), len(corpus))
    families = {
        'H': H,
        'D': construct_D(INTERFERENCE, H),
        'D~': construct_D_tilde(INTERFERENCE, H),
        'D[f]': construct_D_f(INTERFERENCE, H, f),
    }
    document = {
        'statement': INTERFERENCE,
        'theories': [t.to_dict() for t in theories],
        'truth_tables': truth_tables(INTERFERENCE),
        'corpus': {'size': len(corpus), 'seed': args.corpus_seed,
                   'budget': config.solver_budget.to_dict()},
        'index_map': {'kind': f.name, 'targets': list(f.targets)},
        'decidability': {name: family.decidability for name, family in families.items()},
        'families': {name: {t.name: family.values(t) for t in theories}
                     for name, family in families.items()},
        'trivially_decidable': {name: trivially_decidable_in(family, theories)
                                for name, family in families.items()},
        'budgeted_searches': H.stats['searches'],
    }
    emit(dumps(document), args.out)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def add_common(parser, config: Path = DEFAULT_CONFIG) -> None:
    parser.add_argument('--config', default=str(config), help='Game profile (JSON)')
    parser.add_argument('--mode', choices=('exact', 'sampled'), help='Override the profile mode')
    parser.add_argument('--seed', type=int, help='Game seed (experiments: base seed)')
    parser.add_argument('--n-constant', type=float, help='Box budget constant c')
    parser.add_argument('--tol-step1', type=float, help='Significance level of the device test')
    parser.add_argument('--tol-step3', type=float, help='Relative tolerance of the count check')
    parser.add_argument('--tol-step4', type=float, help='Tolerance of the marginal check')
    parser.add_argument('--budget-solver', help="Player's search budget, EXPANSIONS[:LENGTH]")
    parser.add_argument('--budget-referee', help="Referee's search budget, EXPANSIONS[:LENGTH]")
    parser.add_argument('--out', help='Write the document here instead of stdout')
    parser.add_argument('--log-level', choices=LEVELS, default='warning')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='python -m src.harness',
                                     description='Physical Post correspondence game simulator')
    commands = parser.add_subparsers(dest='command', required=True)

    gen = commands.add_parser('gen', help='Generate a random instance')
    gen.add_argument('--num-dominoes', type=int, default=3)
    gen.add_argument('--max-len', type=int, default=3)
    gen.add_argument('--nontrivial', action='store_true', help='Reject dominoes with equal strings')
    gen.set_defaults(handler=cmd_gen)

    solve = commands.add_parser('solve', help='Search an instance for a match')
    solve.add_argument('instance')
    solve.set_defaults(handler=cmd_solve)

    play = commands.add_parser('play', help='Play one game and print the transcript')
    play.add_argument('instance')
    play.add_argument('strategy', choices=sorted(STRATEGIES))
    play.set_defaults(handler=cmd_play)

    experiment = commands.add_parser('experiment', help='Play seeded games and report win rates')
    experiment.add_argument('instance')
    experiment.add_argument('strategy', choices=sorted(STRATEGIES))
    experiment.add_argument('--runs', type=int, default=100)
    experiment.add_argument('--workers', type=int, default=1)
    experiment.add_argument('--timings', action='store_true', help='Include wall-clock seconds per run')
    experiment.set_defaults(handler=cmd_experiment)

    logic = commands.add_parser('logic', help='Evaluate the composed problem families')
    logic.add_argument('--valuation', action='append', metavar='THEORY=yes|no',
                       help='Theory valuation of the interference statement (repeatable)')
    logic.add_argument('--play', metavar='INSTANCE',
                       help='Value the statement by playing both cheating strategies on INSTANCE')
    logic.add_argument('--swap', action='store_true', help='Negate every theory valuation')
    logic.add_argument('--map', default='modulo:2',
                       help='identity | constant:<j> | modulo:<k> | search-free')
    logic.add_argument('--corpus-size', type=int, default=100)
    logic.add_argument('--corpus-seed', type=int, default=0)
    logic.set_defaults(handler=cmd_logic)

    for sub in (gen, solve, play, logic):
        add_common(sub)
    add_common(experiment, EXPERIMENT_CONFIG)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except (PcpError, ConfigError, LogicError, OSError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
