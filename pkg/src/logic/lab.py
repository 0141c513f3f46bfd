"""
Theories as truth assignments and the problem families built on them.

A Theory answers yes/no statements. A ProblemFamily evaluates an indexed
question under a theory. Families compose a statement Q with a base family
H by

    D_i       = Q or H_i
    D~_i      = (not Q) or H_i
    D[f]_i    = ((not Q) and H_i) or (Q and H_f(i))

The halting problem is stood in for by a budgeted PCP search over an indexed
instance corpus.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from src.pcp.core import PcpInstance, SearchBudget, find_match, never_balances, random_instance
from src.protocol.engine import run_game
from src.strategy.players import make_strategy

logger = logging.getLogger(__name__)

INTERFERENCE = 'interference_allowed'
STATEMENTS = {
    INTERFERENCE: "Can a player exploit interference between coherent boxes?",
}
DECIDABILITY = ('trivially', 'nontrivially', 'proxy-undecidable', 'composed')
THEORY_DIR = Path(__file__).resolve().parents[2] / 'constant' / 'theory'


class LogicError(ValueError):
    """Unknown statement, index out of range or invalid index map."""


def _check_statement(q_id: str) -> None:
    if q_id not in STATEMENTS:
        raise LogicError(f"unknown statement {q_id!r}, expected one of {sorted(STATEMENTS)}")


@dataclass(frozen=True)
class Theory:
    name: str
    q_truth: Mapping[str, bool]

    def truth(self, q_id: str) -> bool:
        if q_id not in self.q_truth:
            raise LogicError(f"theory {self.name} has no valuation for {q_id!r}")
        return bool(self.q_truth[q_id])

    def distinct_from(self, other: 'Theory') -> bool:
        shared = set(self.q_truth) & set(other.q_truth)
        return any(self.truth(q) != other.truth(q) for q in shared)

    def negated(self, q_id: str, name: Optional[str] = None) -> 'Theory':
        truth = dict(self.q_truth)
        truth[q_id] = not self.truth(q_id)
        return Theory(name or f"{self.name}~", truth)

    def to_dict(self):
        return {'name': self.name, 'q_truth': dict(sorted(self.q_truth.items()))}

    @classmethod
    def from_dict(cls, data) -> 'Theory':
        try:
            truth = data['q_truth']
            name = data['name']
        except KeyError as e:
            raise LogicError(f"theory document missing {e}") from None
        for q_id, value in truth.items():
            _check_statement(q_id)
            if not isinstance(value, bool):
                raise LogicError(f"valuation of {q_id!r} must be true or false, got {value!r}")
        return cls(name, dict(truth))


@dataclass
class ProblemFamily:
    name: str
    size: int
    evaluator: Callable[[Theory, int], bool]
    decidability: str
    stats: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.decidability not in DECIDABILITY:
            raise LogicError(f"decidability must be one of {DECIDABILITY}, got {self.decidability!r}")

    def evaluate(self, theory: Theory, i: int) -> bool:
        if not 0 <= i < self.size:
            raise LogicError(f"index {i} outside {self.name}'s range 0..{self.size - 1}")
        return bool(self.evaluator(theory, i))

    def values(self, theory: Theory) -> List[bool]:
        return [self.evaluate(theory, i) for i in range(self.size)]

    def is_constant(self, theory: Theory) -> bool:
        return len(set(self.values(theory))) <= 1


def family_from_values(name: str, values: Sequence[bool], decidability: str = 'nontrivially') -> ProblemFamily:
    values = tuple(bool(v) for v in values)
    return ProblemFamily(name, len(values), lambda theory, i: values[i], decidability)


@dataclass(frozen=True)
class IndexMap:
    """Map from family indices onto a set of target indices."""
    name: str
    mapping: Tuple[int, ...]
    targets: Tuple[int, ...]

    def __post_init__(self):
        if set(self.mapping) != set(self.targets):
            missing = sorted(set(self.targets) - set(self.mapping))
            extra = sorted(set(self.mapping) - set(self.targets))
            raise LogicError(f"index map {self.name} is not onto its targets "
                             f"(missing {missing}, outside {extra})")

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def __len__(self):
        return len(self.mapping)

    @classmethod
    def onto(cls, name: str, targets: Sequence[int], size: int) -> 'IndexMap':
        targets = tuple(sorted(set(targets)))
        if not targets:
            raise LogicError(f"index map {name} has no targets")
        if size < len(targets):
            raise LogicError(f"{size} indices cannot cover {len(targets)} targets")
        return cls(name, tuple(targets[i % len(targets)] for i in range(size)), targets)


def _int_arg(kind: str, arg: str) -> int:
    try:
        return int(arg)
    except ValueError:
        raise LogicError(f"bad index map argument in {kind!r}") from None


def index_map(kind: str, size: int, target_size: int) -> IndexMap:
    """
    Build an index map over 0..size-1.

    kind is one of
        identity      i -> i
        constant:<j>  i -> j
        modulo:<k>    i -> i mod k
    """
    name, _, arg = kind.partition(':')
    if name == 'identity' and not arg:
        targets = range(min(size, target_size))
    elif name == 'constant':
        targets = [_int_arg(kind, arg)]
    elif name == 'modulo':
        modulus = _int_arg(kind, arg)
        if modulus < 1:
            raise LogicError(f"modulus must be positive, got {modulus}")
        targets = range(min(modulus, size))
    else:
        raise LogicError(f"unknown index map kind {kind!r}")
    for j in targets:
        if not 0 <= j < target_size:
            raise LogicError(f"index map target {j} outside 0..{target_size - 1}")
    if name == 'identity' and size != target_size:
        raise LogicError(f"identity map needs equal ranges, got {size} and {target_size}")
    return IndexMap.onto(kind, targets, size)


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------

def construct_D(q_id: str, H: ProblemFamily) -> ProblemFamily:
    _check_statement(q_id)
    return ProblemFamily(f"D[{q_id} or {H.name}]", H.size,
                         lambda theory, i: theory.truth(q_id) or H.evaluate(theory, i),
                         'composed')


def construct_D_tilde(q_id: str, H: ProblemFamily) -> ProblemFamily:
    _check_statement(q_id)
    return ProblemFamily(f"D~[not {q_id} or {H.name}]", H.size,
                         lambda theory, i: (not theory.truth(q_id)) or H.evaluate(theory, i),
                         'composed')


def construct_D_f(q_id: str, H: ProblemFamily, f: IndexMap) -> ProblemFamily:
    """
    Under a theory where Q is false this is H itself; where Q is true it is
    H composed with f. Only one of H_i and H_f(i) is ever evaluated.
    """
    _check_statement(q_id)
    if len(f) != H.size:
        raise LogicError(f"index map covers {len(f)} indices, {H.name} has {H.size}")
    for j in f.targets:
        if not 0 <= j < H.size:
            raise LogicError(f"index map target {j} outside {H.name}'s range 0..{H.size - 1}")

    def evaluate(theory: Theory, i: int) -> bool:
        if theory.truth(q_id):
            return H.evaluate(theory, f(i))
        return H.evaluate(theory, i)

    return ProblemFamily(f"D[{f.name}]", H.size, evaluate, 'composed')


# ---------------------------------------------------------------------------
# Bounded halting proxy
# ---------------------------------------------------------------------------

def decided_without_search(instance: PcpInstance) -> Optional[bool]:
    """A trivial domino matches on its own; a one-sided length drift never matches."""
    if any(d.is_trivial for d in instance.dominoes):
        return True
    if never_balances(instance):
        return False
    return None


def proxy_corpus(size: int, seed: int, num_dominoes: int = 2, max_string_len: int = 3) -> List[PcpInstance]:
    if size < 1:
        raise LogicError(f"corpus size must be positive, got {size}")
    return [random_instance(num_dominoes, max_string_len, False, seed + i) for i in range(size)]


def halting_proxy(corpus: Sequence[PcpInstance], budget: SearchBudget) -> ProblemFamily:
    """
    H_i = "a match for corpus[i] is found within budget".

    Search results are kept per index; stats counts the budgeted searches run.
    """
    corpus = list(corpus)
    family = ProblemFamily('H', len(corpus), None, 'proxy-undecidable', {'searches': 0})
    found: Dict[int, bool] = {}

    def evaluate(theory: Theory, i: int) -> bool:
        shortcut = decided_without_search(corpus[i])
        if shortcut is not None:
            return shortcut
        if i not in found:
            family.stats['searches'] += 1
            found[i] = find_match(corpus[i], budget).found
        return found[i]

    family.evaluator = evaluate
    return family


def search_free_indices(corpus: Sequence[PcpInstance]) -> List[int]:
    return [i for i, instance in enumerate(corpus) if decided_without_search(instance) is not None]


def search_free_map(corpus: Sequence[PcpInstance]) -> IndexMap:
    """Map the corpus onto its instances that are decided without any search."""
    return IndexMap.onto('search-free', search_free_indices(corpus), len(corpus))


# ---------------------------------------------------------------------------
# Tables and reports
# ---------------------------------------------------------------------------

def _yes(value: bool) -> str:
    return 'yes' if value else 'no'


def truth_tables(q_id: str) -> Dict[str, List[Dict[str, str]]]:
    """Both truth tables, four rows each, yes-before-no on the first column."""
    _check_statement(q_id)
    d_rows, d_tilde_rows = [], []
    for q in (True, False):
        for h in (True, False):
            d_rows.append({'Q': _yes(q), 'H_i': _yes(h), 'D_i': _yes(q or h)})
    for not_q in (False, True):
        for h in (True, False):
            d_tilde_rows.append({'not Q': _yes(not_q), 'H_i': _yes(h), 'D~_i': _yes(not_q or h)})
    return {'D': d_rows, 'D~': d_tilde_rows}


def trivially_decidable_in(family: ProblemFamily, theories: Sequence[Theory]) -> Dict[str, bool]:
    return {theory.name: family.is_constant(theory) for theory in theories}


def load_theory(path) -> Theory:
    path = Path(path)
    try:
        return Theory.from_dict(json.loads(path.read_text(encoding='utf-8')))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise LogicError(f"{path}: {e}") from None


def bundled_theories(directory=THEORY_DIR) -> List[Theory]:
    return [load_theory(path) for path in sorted(Path(directory).glob('*.json'))]


def interference_valuation(strategy_name: str, instance: PcpInstance, config) -> bool:
    """Play one game; the statement holds iff the strategy wins it."""
    transcript = run_game(instance, make_strategy(strategy_name, config), config)
    logger.debug("%s on %s: %s", strategy_name, instance.name, transcript.verdict)
    return transcript.won


def executable_theories(instance: PcpInstance, config) -> List[Theory]:
    """Classical and quantum theories valued by playing the cheating strategies."""
    return [
        Theory('classical', {INTERFERENCE: interference_valuation('classical-cheat', instance, config)}),
        Theory('quantum', {INTERFERENCE: interference_valuation('quantum-cheat', instance, config)}),
    ]
