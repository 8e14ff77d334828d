"""Tests for the protocol state machine: phases P1 through E3 and full runs."""

import numpy as np
import pytest

import reference

from qauthsim import oracle, qsim
from qauthsim.adversary import StrategyId
from qauthsim.protocol import (
    A1,
    A2,
    B1,
    B2,
    C1,
    C2,
    PROTOCOL_QUBITS,
    Decision,
    PhaseId,
    ProtocolConfig,
    Role,
    SampleSource,
    e1_encode,
    e2_measure,
    e3_verify,
    p1_prepare,
    p2_transmit,
    run_protocol,
    s_check,
)
from qauthsim.qsim import Basis, BellLabel, PauliLabel


def fresh_register(decoys=0, seed=0):
    config = ProtocolConfig(rounds=1, decoys_per_sequence=decoys, seed=seed)
    rng = np.random.default_rng(seed) if decoys else None
    return p1_prepare(config, 0, rng)


# ---------------------------------------------------------------------------
# configuration validation


def test_config_defaults():
    config = ProtocolConfig()
    assert config.rounds == 1
    assert config.decoys_per_sequence == 0
    assert config.decoy_error_threshold == 0.0
    assert config.direction is Role.ALICE
    assert config.seed == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rounds": 0},
        {"rounds": -3},
        {"rounds": 1.5},
        {"decoys_per_sequence": -1},
        {"decoy_error_threshold": -0.1},
        {"decoy_error_threshold": 1.5},
        {"direction": Role.CHARLIE},
        {"seed": -1},
        {"seed": 2**64},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ProtocolConfig(**kwargs)


# ---------------------------------------------------------------------------
# P1: preparation


def test_p1_without_decoys_builds_double_triple():
    register = fresh_register()
    assert register.state.n_qubits == PROTOCOL_QUBITS
    assert register.decoy_states == []
    assert register.decoy_meta == []
    assert register.alice_seq == [("q", A1), ("q", A2)]
    assert register.bob_seq == [("q", B1), ("q", B2)]
    # Independent reconstruction: the three-qubit resource state has
    # amplitude 1/2 on 001, 010, 100, 111; the register holds two copies.
    triple = np.zeros(8, dtype=complex)
    triple[[0b001, 0b010, 0b100, 0b111]] = 0.5
    expected = np.kron(triple, triple)
    assert np.allclose(register.state.amps, expected)


def test_p1_decoy_structure():
    register = fresh_register(decoys=2, seed=5)
    assert len(register.decoy_meta) == 4
    assert len(register.decoy_states) == 4
    owners = [m.owner for m in register.decoy_meta]
    assert owners.count(Role.ALICE) == 2
    assert owners.count(Role.BOB) == 2
    for seq, owner, qubits in (
        (register.alice_seq, Role.ALICE, (A1, A2)),
        (register.bob_seq, Role.BOB, (B1, B2)),
    ):
        assert len(seq) == 4
        sent_qubits = [payload for kind, payload in seq if kind == "q"]
        assert sent_qubits == list(qubits)
        for pos, (kind, payload) in enumerate(seq):
            if kind == "d":
                meta = register.decoy_meta[payload]
                assert meta.owner is owner
                assert meta.position == pos
                assert meta.measured is None
                expected = reference.KET[
                    {
                        (Basis.Z, 0): "0",
                        (Basis.Z, 1): "1",
                        (Basis.X, 0): "+",
                        (Basis.X, 1): "-",
                    }[(meta.basis, meta.prepared)]
                ]
                assert np.allclose(register.decoy_states[payload].amps, expected)


def test_p1_is_deterministic_per_stream():
    first = p1_prepare(ProtocolConfig(decoys_per_sequence=3), 0, np.random.default_rng(11))
    second = p1_prepare(ProtocolConfig(decoys_per_sequence=3), 0, np.random.default_rng(11))
    assert first.alice_seq == second.alice_seq
    assert first.bob_seq == second.bob_seq
    assert first.decoy_meta == second.decoy_meta
    assert np.array_equal(first.state.amps, second.state.amps)


def test_p1_decoy_positions_cover_all_slots():
    seen = set()
    rng = np.random.default_rng(23)
    for _ in range(200):
        register = p1_prepare(ProtocolConfig(decoys_per_sequence=1), 0, rng)
        for meta in register.decoy_meta:
            seen.add((meta.owner, meta.position, meta.basis, meta.prepared))
    # 1 decoy in 3 slots, 2 bases, 2 bits, both owners: all 24 combinations.
    assert len(seen) == 24


def test_p1_charlie_qubit_is_unbiased():
    register = fresh_register()
    dist = qsim.outcome_distribution(register.state, [((C1,), Basis.Z)])
    assert dist[(0,)] == pytest.approx(0.5)
    assert dist[(1,)] == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# P2: transmission


def test_p2_returns_sequences_and_runs_hook_once():
    register = fresh_register(decoys=2, seed=1)
    calls = []
    alice_seq, bob_seq = p2_transmit(register, hook=calls.append)
    assert alice_seq is register.alice_seq
    assert bob_seq is register.bob_seq
    assert calls == [register]


def test_p2_without_hook_leaves_state_alone():
    register = fresh_register()
    before = register.state.amps.copy()
    p2_transmit(register)
    assert np.array_equal(register.state.amps, before)


# ---------------------------------------------------------------------------
# S1/S2: decoy checks


def test_s_check_honest_run_sees_no_errors():
    rng = np.random.default_rng(3)
    register = p1_prepare(ProtocolConfig(decoys_per_sequence=4), 0, rng)
    rate, ok = s_check(register, range(len(register.decoy_meta)), 0.0, rng)
    assert rate == 0.0
    assert ok
    for meta in register.decoy_meta:
        assert meta.measured == meta.prepared


def test_s_check_flags_tampered_decoys():
    rng = np.random.default_rng(4)
    register = p1_prepare(ProtocolConfig(decoys_per_sequence=2), 0, rng)
    # Flip every decoy to the orthogonal state of its own basis: X in the
    # Z basis, Z in the X basis.  Every check must then fail.
    for idx, meta in enumerate(register.decoy_meta):
        flip = PauliLabel.X if meta.basis is Basis.Z else PauliLabel.Z
        register.decoy_states[idx] = qsim.apply_pauli(register.decoy_states[idx], 0, flip)
    rate, ok = s_check(register, range(len(register.decoy_meta)), 0.0, rng)
    assert rate == 1.0
    assert not ok


def test_s_check_threshold_tolerates_partial_errors():
    rng = np.random.default_rng(5)
    register = p1_prepare(ProtocolConfig(decoys_per_sequence=2), 0, rng)
    meta = register.decoy_meta[0]
    flip = PauliLabel.X if meta.basis is Basis.Z else PauliLabel.Z
    register.decoy_states[0] = qsim.apply_pauli(register.decoy_states[0], 0, flip)
    rate, ok = s_check(register, range(4), 0.25, rng)
    assert rate == pytest.approx(0.25)
    assert ok
    _, strict = s_check(fresh_register(decoys=2, seed=5), [0], 0.0, rng)
    assert strict


def test_s_check_empty_announcement_passes():
    register = fresh_register()
    rate, ok = s_check(register, [], 0.0, np.random.default_rng(0))
    assert rate == 0.0
    assert ok


def test_s_check_rejects_unknown_index():
    register = fresh_register(decoys=1, seed=0)
    with pytest.raises(ValueError):
        s_check(register, [99], 0.0, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# E1: key encoding


def test_e1_identity_key_is_a_no_op():
    register = fresh_register()
    before = register.state.amps.copy()
    e1_encode(register, PauliLabel.I, Role.ALICE)
    assert np.array_equal(register.state.amps, before)


@pytest.mark.parametrize("direction,qubit", [(Role.ALICE, A1), (Role.BOB, B1)])
def test_e1_applies_key_to_first_qubit(direction, qubit):
    register = fresh_register()
    expected = qsim.apply_pauli(register.state.copy(), qubit, PauliLabel.X)
    e1_encode(register, PauliLabel.X, direction)
    assert np.allclose(register.state.amps, expected.amps)


def test_e1_rejects_charlie():
    with pytest.raises(ValueError):
        e1_encode(fresh_register(), PauliLabel.X, Role.CHARLIE)


# ---------------------------------------------------------------------------
# E2: measurement


def test_e2_outcomes_satisfy_round_correlation():
    rng = np.random.default_rng(6)
    for _ in range(50):
        register = fresh_register()
        a, b, c = e2_measure(register, SampleSource(rng))
        assert isinstance(a, BellLabel)
        assert isinstance(b, BellLabel)
        assert a.phase_bit ^ b.phase_bit == 0
        assert a.parity_bit ^ b.parity_bit == c[0] ^ c[1]


def test_e2_rejects_bad_order():
    register = fresh_register()
    with pytest.raises(ValueError):
        e2_measure(register, SampleSource(np.random.default_rng(0)), order=("a", "a", "b"))


def test_e2_order_does_not_change_joint_distribution():
    plans = {}
    for order in (("a", "b", "c"), ("c", "b", "a"), ("b", "c", "a")):
        counts = {}
        rng = np.random.default_rng(7)
        for _ in range(400):
            register = fresh_register()
            a, b, c = e2_measure(register, SampleSource(rng), order=order)
            counts[(c, a, b)] = counts.get((c, a, b), 0) + 1
        plans[order] = counts
    supports = [frozenset(counts) for counts in plans.values()]
    assert supports[0] == supports[1] == supports[2]


# ---------------------------------------------------------------------------
# E3: verification


def test_e3_frozen_examples():
    # Same Bell results with agreeing center bits: identity key.
    assert e3_verify(BellLabel.PSI_PLUS, BellLabel.PSI_PLUS, (0, 0), PauliLabel.I) is Decision.ACCEPT
    # Parity differs once more than the center bits explain: bit-flip key.
    assert e3_verify(BellLabel.PHI_PLUS, BellLabel.PSI_PLUS, (1, 1), PauliLabel.X) is Decision.ACCEPT


def test_e3_accepts_exactly_one_key_per_announcement():
    for a in BellLabel:
        for b in BellLabel:
            for c in ((0, 0), (0, 1), (1, 0), (1, 1)):
                verdicts = [e3_verify(a, b, c, key) for key in PauliLabel]
                assert verdicts.count(Decision.ACCEPT) == 1


def test_e3_requires_all_announcements():
    with pytest.raises(ValueError):
        e3_verify(None, BellLabel.PHI_PLUS, (0, 0), PauliLabel.I)
    with pytest.raises(ValueError):
        e3_verify(BellLabel.PHI_PLUS, BellLabel.PHI_PLUS, None, PauliLabel.I)


def test_e3_accepts_every_honest_branch_for_the_true_key():
    for key in PauliLabel:
        dist = oracle.exact_transcript_distribution(StrategyId.HONEST, key)
        for (c, a, b), prob in dist.items():
            if prob <= 1e-12:
                continue
            assert e3_verify(a, b, c, key) is Decision.ACCEPT
            for wrong in PauliLabel:
                if wrong is not key:
                    assert e3_verify(a, b, c, wrong) is Decision.REJECT


# ---------------------------------------------------------------------------
# full runs


def test_run_protocol_honest_accepts():
    config = ProtocolConfig(rounds=4, decoys_per_sequence=2, seed=8)
    keys = [PauliLabel.I, PauliLabel.X, PauliLabel.Z, PauliLabel.IY]
    transcript, decision, report = run_protocol(config, keys, StrategyId.HONEST)
    assert decision is Decision.ACCEPT
    assert transcript.decision is Decision.ACCEPT
    assert transcript.decoy_error_rate == 0.0
    assert len(transcript.rounds) == 4
    for record in transcript.rounds:
        assert record.decision is Decision.ACCEPT
        assert record.decoy_error_rate == 0.0
        assert record.aborted_in is None
    assert report.strategy is StrategyId.HONEST
    assert report.eve_states == [None] * 4
    assert report.inferred_keys == [None] * 4


def test_run_protocol_direction_bob():
    config = ProtocolConfig(rounds=3, decoys_per_sequence=1, direction=Role.BOB, seed=9)
    keys = [PauliLabel.Z] * 3
    _, decision, _ = run_protocol(config, keys, StrategyId.HONEST)
    assert decision is Decision.ACCEPT


def test_run_protocol_is_deterministic():
    config = ProtocolConfig(rounds=5, decoys_per_sequence=3, seed=10)
    keys = [PauliLabel.X] * 5
    first = run_protocol(config, keys, StrategyId.HONEST)
    second = run_protocol(config, keys, StrategyId.HONEST)
    assert first[0] == second[0]
    assert first[1] is second[1]


def test_run_protocol_seed_changes_transcript():
    keys = [PauliLabel.X] * 5
    a = run_protocol(ProtocolConfig(rounds=5, seed=1), keys, StrategyId.HONEST)
    b = run_protocol(ProtocolConfig(rounds=5, seed=2), keys, StrategyId.HONEST)
    records_a = [(r.c, r.a, r.b) for r in a[0].rounds]
    records_b = [(r.c, r.a, r.b) for r in b[0].rounds]
    assert records_a != records_b


def test_run_protocol_validates_keys():
    config = ProtocolConfig(rounds=2)
    with pytest.raises(ValueError):
        run_protocol(config, [PauliLabel.I], StrategyId.HONEST)
    with pytest.raises(ValueError):
        run_protocol(config, [PauliLabel.I, "X"], StrategyId.HONEST)


def test_run_protocol_rejects_unknown_strategy():
    with pytest.raises(ValueError):
        run_protocol(ProtocolConfig(), [PauliLabel.I], "Eavesdrop")


def test_run_protocol_aborts_on_intercept_resend():
    # With 8 decoys per sequence a resend round survives with probability
    # (3/4)^16, so a handful of rounds all but guarantees an abort.
    config = ProtocolConfig(rounds=10, decoys_per_sequence=8, seed=12)
    keys = [PauliLabel.I] * 10
    transcript, decision, _ = run_protocol(config, keys, StrategyId.INTERCEPT_RESEND)
    assert decision is Decision.ABORT
    assert len(transcript.rounds) < 10
    last = transcript.rounds[-1]
    assert last.decision is Decision.ABORT
    assert last.aborted_in in (PhaseId.S1, PhaseId.S2)
    assert last.c is None and last.a is None and last.b is None
    assert last.decoy_error_rate > 0.0
    assert transcript.decoy_error_rate > 0.0


def test_run_protocol_abort_stops_at_first_failed_round():
    config = ProtocolConfig(rounds=6, decoys_per_sequence=8, seed=13)
    keys = [PauliLabel.Z] * 6
    transcript, decision, report = run_protocol(config, keys, StrategyId.INTERCEPT_RESEND)
    assert decision is Decision.ABORT
    aborted = [r for r in transcript.rounds if r.decision is Decision.ABORT]
    assert len(aborted) == 1
    assert transcript.rounds[-1] is aborted[0]
    assert len(report.inferred_keys) == len(transcript.rounds)


def test_run_protocol_premeasure_round_records():
    config = ProtocolConfig(rounds=4, decoys_per_sequence=2, seed=14)
    keys = [PauliLabel.IY, PauliLabel.I, PauliLabel.X, PauliLabel.Z]
    transcript, decision, report = run_protocol(config, keys, StrategyId.PRE_MEASURE)
    assert decision is Decision.ACCEPT
    assert report.inferred_keys == keys
    for record, eve in zip(transcript.rounds, report.eve_states):
        assert record.decoy_error_rate == 0.0
        assert record.c == eve.c_pre
