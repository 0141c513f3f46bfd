from fractions import Fraction

import numpy as np
import pytest

from src.classical.physics import BOX_UNIFORM, HALF, H, T, ClassicalBox, basis_box, is_uncorrelated, product_box
from src.pcp.core import NO_MATCH, Domino, PcpInstance, SearchBudget
from src.protocol.config import ConfigError, GameConfig
from src.protocol.devices import Devices, ClassicalMeasurer, RiggedMixer, classical_devices, quantum_devices
from src.protocol.engine import (DecodeError, Submission, adjudicate, label_counts, required_boxes, run_game,
                                 step1_verify_devices, step3_count_check, step4_encoding_check, step5_decode)
from src.protocol.pool import (MIXED, OUTCOME_LABELS, UNVERIFIED, EncodingSession, LabeledBox,
                               ProtocolViolation, measure_both, take_fraction, total)
from src.protocol.transcript import LOSE, V1, V2, WIN
from src.quantum.physics import cheat_state, premix_state
from src.strategy.players import ClassicalCheat, ClassicalHonest, PlayerStrategy, QuantumCheat

K, Q = Fraction(121, 1000), Fraction(34, 100)
WORKED_DOMINO = Domino('121', '34')


def make(*pairs):
    return PcpInstance(tuple(Domino(a, b) for a, b in pairs))


def pool(physics, count, label=UNVERIFIED):
    return [LabeledBox('A1', physics, label, count)]


class SplitMixer:
    name = 'split-mix'

    def mix(self, box):
        return basis_box(H, T)


def labeled(counts):
    return [LabeledBox(label, basis_box(label[0], label[1]), label, n) for label, n in counts.items()]


# ═══════════════════════════════════════════════════════════════════
# Configuration and box budget
# ═══════════════════════════════════════════════════════════════════


class TestConfig:

    def test_profiles_load(self, exact_config, sampled_config, desk_config):
        assert exact_config.exact and not sampled_config.exact
        assert sampled_config.n_constant == 100
        assert desk_config.cheat_phases == 'random'

    def test_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown"):
            GameConfig.from_dict({'mode': 'exact', 'colour': 'blue'})

    @pytest.mark.parametrize('changes', [
        {'mode': 'quantum'}, {'step3_eps': 0}, {'step1_alpha': 1.5}, {'n_constant': -1}, {'step1_rounds': 0},
    ])
    def test_rejects_bad_knobs(self, changes):
        with pytest.raises(ConfigError):
            GameConfig(**changes)

    @pytest.mark.parametrize('changes', [
        {'step3_eps': 'tight'}, {'n_constant': None}, {'step1_rounds': 2.5}, {'seed': 'zero'},
        {'mode': ['exact']}, {'chi': True},
    ])
    def test_rejects_wrongly_typed_knobs(self, changes):
        with pytest.raises(ConfigError, match="must be"):
            GameConfig.from_dict(changes)

    def test_load_rejects_non_object(self, tmp_path):
        path = tmp_path / 'list.json'
        path.write_text('[1, 2]', encoding='utf-8')
        with pytest.raises(ConfigError, match="JSON object"):
            GameConfig.load(path)

    def test_bad_budget(self):
        with pytest.raises(ConfigError):
            GameConfig.from_dict({'solver_budget': {'max_expansions': 0, 'max_length': 3}})

    def test_replace_ignores_none(self, exact_config):
        assert exact_config.replace(mode=None, seed=5).seed == 5
        assert exact_config.replace(mode=None).mode == 'exact'


class TestRequiredBoxes:

    def test_exact_mode(self, exact_config, instance):
        assert required_boxes(instance('worked'), exact_config) == 24

    @pytest.mark.parametrize('pairs, c, expected', [
        ((('121', '34'), ('4', '12')), 1, 20000000016),
        ((('1', '111'), ('11', '1')), 1, 24000000000),
        ((('3', '4'), ('2', '1')), 1, 2400000),
        ((('3', '4'), ('2', '1')), 100, 240000000),
        ((('12', '12'),), 1, 200000016),
        ((('1', '11'),), 1, 240000000),
        ((('4', '4'),), 1, 600000),
        ((('2', '3'),), 1, 1200000),
        ((('33', '3'),), 1, 80000016),
        ((('1', '2'),), 2, 4800000),
        ((('12', '12'),), 0.5, 100000008),
    ])
    def test_sampled_mode(self, pairs, c, expected):
        config = GameConfig(mode='sampled', n_constant=c)
        assert required_boxes(make(*pairs), config) == expected

    def test_sampled_game_refuses_huge_pools(self, instance):
        with pytest.raises(ConfigError):
            run_game(instance('worked'), QuantumCheat(), GameConfig(mode='sampled'))


# ═══════════════════════════════════════════════════════════════════
# Pools
# ═══════════════════════════════════════════════════════════════════


class TestPool:

    def test_labels_only_move_forward(self):
        box = LabeledBox('b', BOX_UNIFORM, MIXED, 1)
        assert box.relabel('ht').label == 'ht'
        with pytest.raises(ProtocolViolation):
            box.relabel(UNVERIFIED)
        with pytest.raises(ProtocolViolation):
            box.relabel('ht').relabel('hh')

    def test_exact_split(self):
        chosen, rest = take_fraction(pool(BOX_UNIFORM, Fraction(24)), Fraction(1, 3), True, None, '.x')
        assert total(chosen) == 8 and total(rest) == 16

    def test_sampled_split(self, rng):
        boxes = [LabeledBox('a', BOX_UNIFORM, MIXED, 300), LabeledBox('b', BOX_UNIFORM, MIXED, 600)]
        chosen, rest = take_fraction(boxes, Fraction(1, 3), False, rng, '.x')
        assert total(chosen) == 300 and total(rest) == 600

    def test_sampled_split_needs_whole_boxes(self, rng):
        with pytest.raises(ProtocolViolation):
            take_fraction(pool(BOX_UNIFORM, 10), Fraction(1, 3), False, rng, '.x')

    def test_measure_both_merges_by_outcome(self):
        split = measure_both(pool(BOX_UNIFORM, Fraction(8)), ClassicalMeasurer(), True, None)
        assert sorted(split) == list(OUTCOME_LABELS)
        assert all(total(boxes) == 2 for boxes in split.values())


class TestEncodingSession:

    def session(self, exact=True, count=Fraction(12)):
        mixed = pool(BOX_UNIFORM, count, MIXED)
        return EncodingSession(mixed, ClassicalMeasurer(), exact, np.random.default_rng(0), total(mixed) / 4, 'A1')

    def test_measure_labels_outcomes(self):
        s = self.session()
        ids = s.measure('A1')
        assert sorted(b.label for b in s.available()) == list(OUTCOME_LABELS)
        assert len(ids) == 4

    def test_measured_boxes_cannot_be_remeasured(self):
        s = self.session()
        s.measure('A1')
        with pytest.raises(ProtocolViolation):
            s.measure('A1:hh')

    def test_unknown_box(self):
        with pytest.raises(ProtocolViolation):
            self.session().select('nope')

    def test_over_selection(self):
        with pytest.raises(ProtocolViolation):
            self.session().select('A1', Fraction(13))

    def test_finish_checks_quota(self):
        s = self.session()
        s.select('A1', Fraction(2))
        with pytest.raises(ProtocolViolation):
            s.finish()

    def test_finish_reports_discard(self):
        s = self.session()
        s.select('A1', Fraction(3))
        selected, discarded = s.finish()
        assert total(selected) == 3 and discarded == 9

    def test_sampled_selects_whole_boxes(self):
        s = self.session(exact=False, count=12)
        with pytest.raises(ProtocolViolation):
            s.select('A1', Fraction(1, 2))


# ═══════════════════════════════════════════════════════════════════
# Step 1
# ═══════════════════════════════════════════════════════════════════


class TestStep1:

    def test_honest_classical_devices(self, exact_config):
        record, mixed = step1_verify_devices(
            Submission(pool(BOX_UNIFORM, Fraction(24)), classical_devices()), exact_config, None)
        assert record['passed']
        assert total(mixed) == 12
        assert all(box.label == MIXED for box in mixed)

    def test_quantum_devices(self, exact_config):
        boxes = pool(premix_state(cheat_state(K, Q)), Fraction(24))
        record, mixed = step1_verify_devices(Submission(boxes, quantum_devices(0.0)), exact_config, None)
        assert record['passed']
        np.testing.assert_allclose(mixed[0].physics.vector, cheat_state(K, Q).vector, atol=1e-12)

    def test_rigged_mixer_exact(self, exact_config):
        devices = Devices(ClassicalMeasurer(), RiggedMixer())
        record, mixed = step1_verify_devices(Submission(pool(BOX_UNIFORM, Fraction(24)), devices),
                                             exact_config, None)
        assert not record['passed'] and mixed == []

    def test_rigged_mixer_sampled(self, rng):
        devices = Devices(ClassicalMeasurer(), RiggedMixer())
        record, _ = step1_verify_devices(Submission(pool(BOX_UNIFORM, 2400), devices),
                                         GameConfig(mode='sampled'), rng)
        assert not record['passed']
        assert record['p_value'] < 1e-6

    def test_split_mixer_exact(self, exact_config):
        devices = Devices(ClassicalMeasurer(), SplitMixer())
        record, mixed = step1_verify_devices(Submission(pool(BOX_UNIFORM, Fraction(24)), devices),
                                             exact_config, None)
        assert not record['passed'] and mixed == []

    def test_split_mixer_sampled(self, rng):
        # half the post-mix outcomes are h overall, but neither coin is fair
        devices = Devices(ClassicalMeasurer(), SplitMixer())
        record, mixed = step1_verify_devices(Submission(pool(BOX_UNIFORM, 2400), devices),
                                             GameConfig(mode='sampled'), rng)
        assert not record['passed'] and mixed == []
        assert record['p_value_left'] < 1e-6 and record['p_value_right'] < 1e-6

    def test_honest_sampled(self, rng):
        record, mixed = step1_verify_devices(Submission(pool(BOX_UNIFORM, 2400), classical_devices()),
                                             GameConfig(mode='sampled'), rng)
        assert record['passed']
        assert total(mixed) == 1200


# ═══════════════════════════════════════════════════════════════════
# Step 3
# ═══════════════════════════════════════════════════════════════════


class TestStep3:

    def test_all_mixed(self, exact_config):
        record = step3_count_check(pool(BOX_UNIFORM, Fraction(3), MIXED), exact_config)
        assert record['passed']
        assert set(record['counts'].values()) == {Fraction(3, 4)}

    def test_product_proportions(self, exact_config):
        joint = product_box(K, Q).joint
        record = step3_count_check(labeled(dict(zip(OUTCOME_LABELS, (3 * p for p in joint)))), exact_config)
        assert record['passed'] and record['delta'] == 0

    def test_anticorrelated_counts(self, exact_config):
        record = step3_count_check(labeled({'hh': 10, 'tt': 10}), exact_config)
        assert not record['passed']
        assert record['delta'] == 100

    def test_unverified_box(self, exact_config):
        assert not step3_count_check(pool(BOX_UNIFORM, 3), exact_config)['passed']

    def test_sampled_tolerance(self):
        config = GameConfig(mode='sampled', step3_eps=1e-4)
        # delta = 1 against a tolerance of 1e-4 * 400^2
        assert step3_count_check(labeled({'hh': 101, 'ht': 100, 'th': 100, 'tt': 99}), config)['passed']
        assert not step3_count_check(labeled({'hh': 120, 'ht': 80, 'th': 80, 'tt': 120}), config)['passed']

    def test_every_correlated_box_is_caught(self, exact_config):
        grid = [Fraction(i, 8) for i in range(9)]
        for alpha in grid:
            for beta in grid:
                for gamma in grid:
                    if alpha + beta + gamma > 1:
                        continue
                    box = ClassicalBox(alpha, beta, gamma)
                    counts = dict(zip(OUTCOME_LABELS, (24 * p for p in box.joint)))
                    passed = step3_count_check(labeled(counts), exact_config)['passed']
                    assert passed == is_uncorrelated(box)

    def test_label_counts(self):
        counts = label_counts(labeled({'hh': 2}) + pool(BOX_UNIFORM, 4, MIXED))
        assert counts == {'hh': 3, 'ht': 1, 'th': 1, 'tt': 1}


# ═══════════════════════════════════════════════════════════════════
# Step 4
# ═══════════════════════════════════════════════════════════════════


class TestStep4:

    def test_honest_product(self, exact_config):
        record, instruction, remaining = step4_encoding_check(
            pool(product_box(K, Q), Fraction(3), 'hh'), WORKED_DOMINO, classical_devices(), exact_config, None)
        assert record['passed']
        assert instruction == 'L'
        assert total(remaining) == 1

    def test_cheat_state(self, exact_config):
        record, instruction, _ = step4_encoding_check(
            pool(cheat_state(K, Q), Fraction(3), MIXED), WORKED_DOMINO, quantum_devices(), exact_config, None)
        assert record['passed'] and instruction == 'L'

    def test_swapped_encoding(self, exact_config):
        record, _, _ = step4_encoding_check(
            pool(product_box(Q, K), Fraction(3), 'hh'), WORKED_DOMINO, classical_devices(), exact_config, None)
        assert not record['passed']

    def test_instruction_right(self, exact_config):
        record, instruction, _ = step4_encoding_check(
            pool(product_box(Q, K), Fraction(3), 'hh'), Domino('34', '121'), classical_devices(), exact_config, None)
        assert record['passed'] and instruction == 'R'

    def test_tie_goes_left(self, exact_config):
        p = Fraction(12, 100)
        _, instruction, _ = step4_encoding_check(
            pool(product_box(p, p), Fraction(3), 'hh'), Domino('12', '12'), classical_devices(), exact_config, None)
        assert instruction == 'L'

    def test_no_boxes(self, exact_config):
        with pytest.raises(ProtocolViolation):
            step4_encoding_check([], WORKED_DOMINO, classical_devices(), exact_config, None)


# ═══════════════════════════════════════════════════════════════════
# Step 5
# ═══════════════════════════════════════════════════════════════════


class TestStep5:

    def test_honest_product(self, exact_config):
        decoding = step5_decode(pool(product_box(K, Q), Fraction(1)), 'L', 4, classical_devices(), exact_config, None)
        assert (decoding.numerator, decoding.denominator) == ('121', '34')

    def test_honest_product_right_first(self, exact_config):
        decoding = step5_decode(pool(product_box(Q, K), Fraction(1)), 'R', 4, classical_devices(), exact_config, None)
        assert (decoding.numerator, decoding.denominator) == ('34', '121')

    def test_cheat_state(self, exact_config):
        decoding = step5_decode(pool(cheat_state(K, Q), Fraction(1)), 'L', 4, quantum_devices(), exact_config, None)
        assert (decoding.numerator, decoding.denominator) == ('121', '121')

    def test_correlated_box(self, exact_config):
        box = ClassicalBox(HALF, Fraction(0), Fraction(0))
        with pytest.raises(DecodeError) as caught:
            step5_decode(pool(box, Fraction(1)), 'L', 4, classical_devices(), exact_config, None)
        assert caught.value.first_frequency == HALF
        assert caught.value.second_frequency == 1

    def test_no_survivors(self, exact_config):
        with pytest.raises(DecodeError, match="every box"):
            step5_decode(pool(basis_box(T, T), Fraction(1)), 'L', 4, classical_devices(), exact_config, None)

    def test_leading_zero(self, exact_config):
        box = product_box(Fraction(4, 100000), Q)
        with pytest.raises(DecodeError):
            step5_decode(pool(box, Fraction(1)), 'L', 3, classical_devices(), exact_config, None)


# ═══════════════════════════════════════════════════════════════════
# Adjudication
# ═══════════════════════════════════════════════════════════════════


class TestAdjudicate:

    def test_self_match(self, exact_config):
        assert adjudicate((1,), make(('121', '121')), exact_config)['verdict'] == WIN

    def test_mismatch(self, exact_config):
        result = adjudicate((1,), make(('121', '34')), exact_config)
        assert result['verdict'] == LOSE and result['failure_site'] == 'step5-mismatch'

    def test_index_out_of_range(self, exact_config):
        assert adjudicate((3,), make(('1', '1')), exact_config)['verdict'] == LOSE

    def test_no_match_upheld(self, exact_config):
        assert adjudicate(NO_MATCH, make(('1', '11')), exact_config)['verdict'] == WIN

    def test_no_match_refuted(self, exact_config):
        result = adjudicate(NO_MATCH, make(('1', '111'), ('11', '1')), exact_config)
        assert result['failure_site'] == 'referee-found-match'
        assert result['referee_match'] == [1, 2, 2]


# ═══════════════════════════════════════════════════════════════════
# Whole games
# ═══════════════════════════════════════════════════════════════════


class ShortChange(PlayerStrategy):
    """Hands over one box fewer than asked for."""
    name = 'short-change'

    def claim(self, instance):
        return (1,)

    def provide_boxes(self, index, domino, n, rng):
        return super().provide_boxes(index, domino, n - 1, rng)


class UnderEncoder(PlayerStrategy):
    """Encodes less than a quarter of the mixed pool."""
    name = 'under-encoder'

    def claim(self, instance):
        return (1,)

    def encode(self, session, index, domino):
        session.select(session.available()[0].id, session.quota / 2)


class TestRunGame:

    def test_quantum_cheat_wins(self, exact_config, instance):
        transcript = run_game(instance('worked'), QuantumCheat(), exact_config)
        assert transcript.verdict == WIN
        assert transcript.decoded == ['121/121', '4/12']

    def test_box_conservation(self, exact_config, instance):
        transcript = run_game(instance('worked'), QuantumCheat(), exact_config)
        for record in transcript.per_domino:
            assert record['pool'] == {'provided': 24, 'mixed': 12, 'encoded': 3, 'to_referee': 1}

    def test_classical_cheat_loses(self, exact_config, instance):
        transcript = run_game(instance('worked'), ClassicalCheat(), exact_config)
        assert transcript.verdict == LOSE
        assert transcript.failure_site == 'step3'
        assert transcript.per_domino[0]['step3']['delta'] != 0

    def test_classical_honest_self_match(self, exact_config, instance):
        transcript = run_game(instance('self'), ClassicalHonest(exact_config.solver_budget), exact_config)
        assert transcript.verdict == WIN
        assert transcript.claim == (1,)

    def test_classical_honest_no_match(self, exact_config, instance):
        transcript = run_game(instance('nomatch'), ClassicalHonest(exact_config.solver_budget), exact_config)
        assert transcript.claim == NO_MATCH
        assert transcript.verdict == WIN

    def test_classical_honest_out_of_budget(self, exact_config, instance):
        player = ClassicalHonest(SearchBudget(1, 12))
        transcript = run_game(instance('classic'), player, exact_config)
        assert transcript.claim == NO_MATCH
        assert transcript.failure_site == 'referee-found-match'

    def test_short_box_count(self, exact_config, instance):
        transcript = run_game(instance('self'), ShortChange(), exact_config)
        assert transcript.failure_site == 'protocol-violation'

    def test_short_encoding(self, exact_config, instance):
        transcript = run_game(instance('self'), UnderEncoder(), exact_config)
        assert transcript.failure_site == 'protocol-violation'
        assert 'step2' in transcript.failure_detail

    def test_verifiers_only_forward(self, exact_config, instance):
        transcript = run_game(instance('worked'), QuantumCheat(), exact_config)
        edges = transcript.log.verifier_edges()
        assert len(edges) == 2
        assert all(m.kind == 'forward' and (m.sender, m.receiver) == (V1, V2) for m in edges)

    def test_win_has_no_failed_checks(self, exact_config, instance):
        transcript = run_game(instance('classic'), ClassicalHonest(exact_config.solver_budget), exact_config)
        assert transcript.won
        assert transcript.failed_checks() == []

    def test_lose_records_failed_check(self, exact_config, instance):
        transcript = run_game(instance('worked'), ClassicalCheat(), exact_config)
        assert transcript.failed_checks() == ['A1:step3']

    def test_replay_exact(self, exact_config, instance):
        first = run_game(instance('worked'), QuantumCheat(), exact_config).to_json()
        assert run_game(instance('worked'), QuantumCheat(), exact_config).to_json() == first

    def test_replay_sampled(self, desk_config, instance):
        play = lambda: run_game(instance('desk'), QuantumCheat(random_phases=True), desk_config).to_json()
        assert play() == play()

    def test_sampled_seeds_differ(self, desk_config, instance):
        play = lambda seed: run_game(instance('desk'), ClassicalHonest(desk_config.solver_budget),
                                     desk_config.replace(seed=seed)).to_json()
        assert play(1) != play(2)
