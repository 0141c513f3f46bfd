"""
The game protocol, run once per domino:

    step 1  V1 verifies the devices on a random half of the boxes and mixes the rest
    step 2  Alice encodes a quarter of the mixed boxes
    step 3  V1 checks n(hh) n(tt) = n(ht) n(th)
    step 4  V2 checks the compartment marginals on two disjoint thirds
    step 5  the referee decodes the last third

followed by adjudication of Alice's claim against the decoded instance.
Verification failures are recorded in the transcript and end the game.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy import stats

from src.classical.physics import H, LEFT, RIGHT
from src.parameter.compute import compute_derived, instance_facts
from src.pcp.core import (NO_MATCH, Domino, PcpError, PcpInstance, check_arrangement,
                          find_match, probability_to_string, string_to_probability)
from src.protocol.config import ConfigError, GameConfig
from src.protocol.devices import Devices
from src.protocol.pool import (MIXED, UNVERIFIED, OUTCOME_LABELS, EncodingSession,
                               LabeledBox, ProtocolViolation, is_zero, h_fraction,
                               measure_both, measure_side, render_count, take_fraction, total)
from src.protocol.transcript import (ALICE, LOSE, REFEREE, V1, V2, WIN,
                                     GameTranscript)

logger = logging.getLogger(__name__)

INSTRUCTION_LEFT, INSTRUCTION_RIGHT = 'L', 'R'
# numpy's hypergeometric draws stay exact below this many boxes
MAX_SAMPLED_BOXES = 10 ** 9


class DecodeError(RuntimeError):
    def __init__(self, message, first_frequency=None, second_frequency=None):
        super().__init__(message)
        self.first_frequency = first_frequency
        self.second_frequency = second_frequency


@dataclass(frozen=True)
class Submission:
    boxes: List[LabeledBox]
    devices: Devices


@dataclass(frozen=True)
class Decoding:
    numerator: str
    denominator: str
    first_frequency: Any
    second_frequency: Any


def _close(a, b, config: GameConfig) -> bool:
    if isinstance(a, (Fraction, int)) and isinstance(b, (Fraction, int)):
        return a == b
    return abs(float(a) - float(b)) <= config.exact_tolerance


def instruction_for(domino: Domino) -> str:
    k = string_to_probability(domino.numerator).value
    q = string_to_probability(domino.denominator).value
    return INSTRUCTION_LEFT if k <= q else INSTRUCTION_RIGHT


# ---------------------------------------------------------------------------
# Box budget
# ---------------------------------------------------------------------------

def game_parameters(instance: PcpInstance, config: GameConfig) -> Dict[str, Any]:
    base = instance_facts(instance)
    base.update(mode=config.mode, n_constant=config.n_constant)
    return compute_derived(base)


def required_boxes(instance: PcpInstance, config: GameConfig) -> int:
    return game_parameters(instance, config)['boxes_per_domino']


# ---------------------------------------------------------------------------
# Step 1
# ---------------------------------------------------------------------------

def _post_mix_heads(split) -> Tuple[Any, Any, Any]:
    heads_left = heads_right = Fraction(0)
    for label, boxes in split.items():
        weight = total(boxes)
        if label[0] == H:
            heads_left += weight
        if label[1] == H:
            heads_right += weight
    return heads_left, heads_right, total([b for boxes in split.values() for b in boxes])


def step1_verify_devices(submission: Submission, config: GameConfig, rng, tag: str = ''
                         ) -> Tuple[Dict[str, Any], List[LabeledBox]]:
    """
    Verify the devices on a random half of the boxes; mix and label the other half.

    Each round measures both compartments, remeasures them and applies the
    mixer. Outcomes measured after a mix must be fair coins.
    """
    measurer, mixer = submission.devices.measurer, submission.devices.mixer
    record: Dict[str, Any] = {'passed': False, 'devices': submission.devices.to_dict()}
    verify, keep = take_fraction(submission.boxes, Fraction(1, 2), config.exact, rng, '.v')
    record['verification_boxes'] = total(verify)

    heads_left = heads_right = trials = Fraction(0)
    groups = verify
    try:
        for round_no in range(config.step1_rounds + 1):
            split = measure_both(groups, measurer, config.exact, rng)
            if round_no > 0:
                h_l, h_r, n = _post_mix_heads(split)
                heads_left, heads_right, trials = heads_left + h_l, heads_right + h_r, trials + n
            if round_no == config.step1_rounds:
                break
            for label, boxes in split.items():
                again = measure_both(boxes, measurer, config.exact, rng)
                if set(again) != {label}:
                    record['reason'] = f"remeasurement of {label} boxes gave {sorted(again)}"
                    return record, []
            groups = [replace(box, physics=mixer.mix(box.physics))
                      for boxes in split.values() for box in boxes]
    except ProtocolViolation as e:
        record['reason'] = f"device interface violation: {e}"
        return record, []

    record['post_mix_trials'] = 2 * trials
    record['post_mix_heads'] = heads_left + heads_right
    if config.exact:
        fair = (_close(heads_left / trials, Fraction(1, 2), config)
                and _close(heads_right / trials, Fraction(1, 2), config))
    else:
        # each compartment must look fair on its own
        record['p_value_left'] = float(stats.binomtest(int(heads_left), int(trials), 0.5).pvalue)
        record['p_value_right'] = float(stats.binomtest(int(heads_right), int(trials), 0.5).pvalue)
        record['p_value'] = min(record['p_value_left'], record['p_value_right'])
        fair = record['p_value'] >= config.step1_alpha
    if not fair:
        record['reason'] = "post-mix outcomes are not equally likely"
        return record, []

    mixed = [replace(box, physics=mixer.mix(box.physics)).relabel(MIXED) for box in keep]
    record['passed'] = True
    logger.debug("%s step 1 passed, %s boxes mixed", tag, render_count(total(mixed)))
    return record, mixed


# ---------------------------------------------------------------------------
# Step 3
# ---------------------------------------------------------------------------

def label_counts(encoded: List[LabeledBox]) -> Dict[str, Any]:
    counts = {label: Fraction(0) for label in OUTCOME_LABELS}
    for box in encoded:
        if box.label == MIXED:
            for label in OUTCOME_LABELS:
                counts[label] += box.count * Fraction(1, 4)
        elif box.label in counts:
            counts[box.label] += box.count
        else:
            raise ProtocolViolation(f"box {box.id} reached step 3 labeled {box.label}")
    return counts


def step3_count_check(encoded: List[LabeledBox], config: GameConfig) -> Dict[str, Any]:
    try:
        counts = label_counts(encoded)
    except ProtocolViolation as e:
        return {'passed': False, 'reason': str(e)}
    delta = counts['hh'] * counts['tt'] - counts['ht'] * counts['th']
    whole = sum(counts.values())
    record = {'counts': counts, 'delta': delta}
    if config.exact:
        record['passed'] = _close(delta, 0, config)
    else:
        record['threshold'] = config.step3_eps * float(whole) ** 2
        record['passed'] = abs(float(delta)) <= record['threshold']
    if not record['passed']:
        record['reason'] = "n(hh) n(tt) differs from n(ht) n(th)"
    return record


# ---------------------------------------------------------------------------
# Step 4
# ---------------------------------------------------------------------------

def step4_encoding_check(boxes: List[LabeledBox], domino: Domino, devices: Devices,
                         config: GameConfig, rng) -> Tuple[Dict[str, Any], str, List[LabeledBox]]:
    """
    V2 measures left compartments of one random third and right compartments of
    a disjoint third, never both compartments of one box. The last third goes
    to the referee with the instruction.
    """
    if is_zero(total(boxes)):
        raise ProtocolViolation("no encoded boxes reached V2")
    k = string_to_probability(domino.numerator).value
    q = string_to_probability(domino.denominator).value
    left_set, rest = take_fraction(boxes, Fraction(1, 3), config.exact, rng, '.v2L')
    right_set, remaining = take_fraction(rest, Fraction(1, 2), config.exact, rng, '.v2R')
    freq_left = h_fraction(measure_side(left_set, LEFT, devices.measurer, config.exact, rng))
    freq_right = h_fraction(measure_side(right_set, RIGHT, devices.measurer, config.exact, rng))

    if config.exact:
        passed = _close(freq_left, k, config) and _close(freq_right, q, config)
    else:
        passed = (abs(float(freq_left - k)) <= config.step4_eps
                  and abs(float(freq_right - q)) <= config.step4_eps)
    instruction = instruction_for(domino)
    record = {'passed': passed, 'k': k, 'q': q,
              'left_frequency': freq_left, 'right_frequency': freq_right,
              'instruction': instruction}
    if not passed:
        record['reason'] = "compartment frequencies do not match the domino strings"
    return record, instruction, remaining


# ---------------------------------------------------------------------------
# Step 5
# ---------------------------------------------------------------------------

def step5_decode(boxes: List[LabeledBox], instruction: str, max_digits: int,
                 devices: Devices, config: GameConfig, rng) -> Decoding:
    """
    Decode the instructed compartment first, discard t outcomes, then decode
    the other compartment of the survivors.
    """
    first, second = (LEFT, RIGHT) if instruction == INSTRUCTION_LEFT else (RIGHT, LEFT)
    if is_zero(total(boxes)):
        raise DecodeError("no boxes reached the referee")
    split = measure_side(boxes, first, devices.measurer, config.exact, rng)
    first_frequency = h_fraction(split)
    survivors = split[H]
    if is_zero(total(survivors)):
        raise DecodeError("every box showed t on the first compartment", first_frequency)
    second_frequency = h_fraction(measure_side(survivors, second, devices.measurer, config.exact, rng))

    try:
        first_string = probability_to_string(first_frequency, max_digits)
        second_string = probability_to_string(second_frequency, max_digits)
        if instruction == INSTRUCTION_LEFT:
            domino = Domino(first_string, second_string)
        else:
            domino = Domino(second_string, first_string)
    except PcpError as e:
        raise DecodeError(str(e), first_frequency, second_frequency) from None
    return Decoding(domino.numerator, domino.denominator, first_frequency, second_frequency)


# ---------------------------------------------------------------------------
# Adjudication
# ---------------------------------------------------------------------------

def adjudicate(claim, decoded: PcpInstance, config: GameConfig) -> Dict[str, Any]:
    if claim == NO_MATCH:
        result = find_match(decoded, config.referee_budget)
        if result.found:
            return {'verdict': LOSE, 'failure_site': 'referee-found-match',
                    'referee_match': list(result.arrangement)}
        return {'verdict': WIN, 'failure_site': None, 'referee_expansions': result.expansions}
    try:
        valid = check_arrangement(decoded, claim)
    except PcpError as e:
        return {'verdict': LOSE, 'failure_site': 'step5-mismatch', 'reason': str(e)}
    if valid:
        return {'verdict': WIN, 'failure_site': None}
    return {'verdict': LOSE, 'failure_site': 'step5-mismatch'}


# ---------------------------------------------------------------------------
# Whole game
# ---------------------------------------------------------------------------

def run_game(instance: PcpInstance, strategy, config: GameConfig) -> GameTranscript:
    rng = np.random.default_rng(config.seed)
    params = game_parameters(instance, config)
    n_boxes, digits = params['boxes_per_domino'], params['decode_digits']
    if not config.exact and n_boxes > MAX_SAMPLED_BOXES:
        raise ConfigError(f"{n_boxes} boxes per domino exceeds the sampled-mode limit "
                          f"{MAX_SAMPLED_BOXES}; lower n_constant or use shorter strings")
    transcript = GameTranscript(instance, strategy.name, config.to_dict())
    log = transcript.log

    log.send(V2, ALICE, 'instance')
    transcript.claim = strategy.claim(instance)
    log.send(ALICE, REFEREE, 'claim')

    decoded: List[Domino] = []
    for index, domino in enumerate(instance.dominoes, start=1):
        tag = f"A{index}"
        pool_sizes: Dict[str, Any] = {}
        record: Dict[str, Any] = {'domino': index, 'pool': pool_sizes}
        transcript.per_domino.append(record)
        stage = 'step1'
        try:
            devices = strategy.provide_devices(index, domino)
            boxes = strategy.provide_boxes(index, domino, n_boxes, rng)
            log.send(ALICE, V1, 'boxes', index)
            if total(boxes) != n_boxes or any(b.label != UNVERIFIED for b in boxes):
                raise ProtocolViolation(
                    f"expected {n_boxes} unverified boxes, got {render_count(total(boxes))}")
            pool_sizes['provided'] = total(boxes)

            record['step1'], mixed = step1_verify_devices(Submission(boxes, devices), config, rng, tag)
            if not record['step1']['passed']:
                return _finish(transcript.lose('step1', f"{tag}: {record['step1']['reason']}"))
            pool_sizes['mixed'] = total(mixed)
            log.send(V1, ALICE, 'mixed', index)

            stage = 'step2'
            session = EncodingSession(mixed, devices.measurer, config.exact, rng,
                                      total(mixed) / 4, tag)
            strategy.encode(session, index, domino)
            encoded, discarded = session.finish()
            record['step2'] = {'passed': True, 'measured_groups': session.measurements,
                               'discarded': discarded}
            pool_sizes['encoded'] = total(encoded)
            log.send(ALICE, V1, 'encoded', index)

            stage = 'step3'
            record['step3'] = step3_count_check(encoded, config)
            if not record['step3']['passed']:
                return _finish(transcript.lose('step3', f"{tag}: {record['step3']['reason']}"))
            log.send(V1, V2, 'forward', index)

            stage = 'step4'
            record['step4'], instruction, remaining = step4_encoding_check(
                encoded, domino, devices, config, rng)
            if not record['step4']['passed']:
                return _finish(transcript.lose('step4', f"{tag}: {record['step4']['reason']}"))
            pool_sizes['to_referee'] = total(remaining)
            log.send(V2, REFEREE, 'decode-request', index)

            stage = 'step5'
            decoding = step5_decode(remaining, instruction, digits, devices, config, rng)
        except ProtocolViolation as e:
            record.setdefault(stage, {})['passed'] = False
            return _finish(transcript.lose('protocol-violation', f"{tag} {stage}: {e}"))
        except DecodeError as e:
            record['step5'] = {'passed': False, 'reason': str(e),
                               'first_frequency': e.first_frequency,
                               'second_frequency': e.second_frequency}
            return _finish(transcript.lose('step5-decode', f"{tag}: {e}"))

        record['step5'] = {'passed': True, 'instruction': instruction,
                           'first_frequency': decoding.first_frequency,
                           'second_frequency': decoding.second_frequency,
                           'decoded': f"{decoding.numerator}/{decoding.denominator}"}
        decoded.append(Domino(decoding.numerator, decoding.denominator))
        transcript.decoded.append(record['step5']['decoded'])
        logger.debug("%s decoded as %s", tag, record['step5']['decoded'])

    log.send(REFEREE, ALICE, 'decoded')
    verdict = adjudicate(transcript.claim, PcpInstance(tuple(decoded), name='decoded'), config)
    transcript.adjudication = verdict
    log.send(REFEREE, ALICE, 'verdict')
    if verdict['verdict'] == WIN:
        return _finish(transcript.win())
    return _finish(transcript.lose(verdict['failure_site']))


def _finish(transcript: GameTranscript) -> GameTranscript:
    logger.info("%s on %s: %s%s", transcript.strategy, transcript.instance.name,
                transcript.verdict,
                f" at {transcript.failure_site}" if transcript.failure_site else '')
    return transcript
