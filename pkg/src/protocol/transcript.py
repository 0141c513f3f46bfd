"""Game transcripts, the inter-agent message log and their JSON rendering."""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from src.pcp.core import NO_MATCH, PcpInstance

ALICE, V1, V2, REFEREE = 'alice', 'v1', 'v2', 'referee'
WIN, LOSE = 'Win', 'Lose'


@dataclass(frozen=True)
class Message:
    sender: str
    receiver: str
    kind: str
    domino: Optional[int] = None

    def to_dict(self):
        return {'from': self.sender, 'to': self.receiver, 'kind': self.kind, 'domino': self.domino}


class MessageLog:
    def __init__(self):
        self.messages: List[Message] = []

    def send(self, sender: str, receiver: str, kind: str, domino: Optional[int] = None) -> None:
        self.messages.append(Message(sender, receiver, kind, domino))

    def verifier_edges(self) -> List[Message]:
        return [m for m in self.messages if {m.sender, m.receiver} == {V1, V2}]


def jsonable(value):
    """Make transcript values JSON-safe: exact rationals become 'p/q' strings."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else int(value.numerator)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        return value.item()
    return value


def dumps(document) -> str:
    return json.dumps(jsonable(document), indent=2, sort_keys=True) + '\n'


@dataclass
class GameTranscript:
    instance: PcpInstance
    strategy: str
    config: Dict[str, Any]
    claim: Any = None
    per_domino: List[Dict[str, Any]] = field(default_factory=list)
    decoded: List[str] = field(default_factory=list)
    verdict: Optional[str] = None
    failure_site: Optional[str] = None
    failure_detail: Optional[str] = None
    adjudication: Optional[Dict[str, Any]] = None
    log: MessageLog = field(default_factory=MessageLog)

    def lose(self, site: str, detail: str = '') -> 'GameTranscript':
        self.verdict = LOSE
        self.failure_site = site
        self.failure_detail = detail or None
        return self

    def win(self) -> 'GameTranscript':
        self.verdict = WIN
        return self

    @property
    def won(self) -> bool:
        return self.verdict == WIN

    def failed_checks(self) -> List[str]:
        failed = []
        for record in self.per_domino:
            for step, result in record.items():
                if isinstance(result, dict) and result.get('passed') is False:
                    failed.append(f"A{record['domino']}:{step}")
        return failed

    def to_dict(self):
        claim = self.claim
        if claim is not None and claim != NO_MATCH:
            claim = [f"A{i}" for i in claim]
        return {
            'instance': self.instance.to_dict(),
            'strategy': self.strategy,
            'claim': claim,
            'config': self.config,
            'seed': self.config.get('seed'),
            'per_domino': self.per_domino,
            'decoded': self.decoded,
            'verdict': self.verdict,
            'failure_site': self.failure_site,
            'failure_detail': self.failure_detail,
            'adjudication': self.adjudication,
            'messages': [m.to_dict() for m in self.log.messages],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())
