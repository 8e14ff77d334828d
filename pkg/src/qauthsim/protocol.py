"""Three-party authentication protocol as an explicit phase state machine.

Charlie (the center) prepares two three-qubit entangled states per round and
sends one qubit pair each to Alice and Bob, with decoy qubits mixed into the
transmitted sequences (P1, P2).  After the decoy checks (S1, S2) the chosen
party encodes the round key as a Pauli on her first qubit (E1), everyone
measures (E2), and the announcements are verified against the shared key
(E3).

The quantum payload of a round lives in a :class:`RoundRegister`: one joint
state over the six protocol qubits plus one independent single-qubit state
per decoy.  Decoys start (and, absent an attack, remain) in product states,
so keeping them factored out of the joint register changes nothing
observable while keeping large decoy counts cheap.

All measurement outcomes flow through an outcome source object
(:class:`SampleSource` here; the oracle module swaps in a scripted source to
enumerate branches through this same code).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import qsim
from .qsim import Basis, BellLabel, PauliLabel, StateVector


class Role(Enum):
    CHARLIE = "Charlie"
    ALICE = "Alice"
    BOB = "Bob"


class PhaseId(Enum):
    P1 = "P1"
    P2 = "P2"
    S1 = "S1"
    S2 = "S2"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"


class Decision(Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    ABORT = "Abort"


# Layout of the joint register: round qubits in preparation order.
C1, A1, B1, C2, A2, B2 = 0, 1, 2, 3, 4, 5
PROTOCOL_QUBITS = 6

_DECOY_TEMPLATES = {
    (Basis.Z, 0): qsim.init_product(["0"]),
    (Basis.Z, 1): qsim.init_product(["1"]),
    (Basis.X, 0): qsim.init_product(["+"]),
    (Basis.X, 1): qsim.init_product(["-"]),
}


@dataclass
class ProtocolConfig:
    rounds: int = 1
    decoys_per_sequence: int = 0
    decoy_error_threshold: float = 0.0
    direction: Role = Role.ALICE
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ValueError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not isinstance(self.decoys_per_sequence, int) or self.decoys_per_sequence < 0:
            raise ValueError(
                f"decoys_per_sequence must be a non-negative integer, "
                f"got {self.decoys_per_sequence!r}"
            )
        if not 0.0 <= self.decoy_error_threshold <= 1.0:
            raise ValueError(
                f"decoy_error_threshold must lie in [0, 1], "
                f"got {self.decoy_error_threshold!r}"
            )
        if self.direction not in (Role.ALICE, Role.BOB):
            raise ValueError("direction must be Alice or Bob")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass
class DecoyRecord:
    owner: Role
    position: int
    basis: Basis
    prepared: int
    measured: "int | None" = None


@dataclass
class RoundRegister:
    """Quantum payload of one round.

    ``state`` covers the six protocol qubits (layout C1, A1, B1, C2, A2, B2);
    ``decoy_states[i]`` is the single-qubit state described by
    ``decoy_meta[i]``.  The transmitted sequences list their slots in order
    as ("q", protocol qubit index) or ("d", decoy index).
    """

    state: StateVector
    decoy_states: list
    decoy_meta: list
    alice_seq: list
    bob_seq: list


@dataclass
class RoundRecord:
    """Public announcements and outcome of a single round."""

    c: "tuple[int, int] | None"
    a: "BellLabel | None"
    b: "BellLabel | None"
    decoy_error_rate: float
    decoys: list
    decision: Decision
    aborted_in: "PhaseId | None" = None


@dataclass
class Transcript:
    rounds: list
    decision: Decision
    decoy_error_rate: float


class SampleSource:
    """Measurement outcome source backed by a numpy Generator.

    One uniform draw per measurement, in program order.  The oracle module
    provides a scripted source with the same three methods, so the phase
    functions below never know whether they are being sampled or enumerated.
    """

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def measure_z(self, state: StateVector, q: int):
        bit, post, _ = qsim.measure_z(state, q, self.rng.random())
        return bit, post

    def measure_x(self, state: StateVector, q: int):
        bit, post, _ = qsim.measure_x(state, q, self.rng.random())
        return bit, post

    def measure_bell(self, state: StateVector, q1: int, q2: int):
        label, post, _ = qsim.measure_bell(state, q1, q2, self.rng.random())
        return label, post


_FRESH_STATE: "StateVector | None" = None


def _fresh_protocol_state() -> StateVector:
    """A copy of |G> x |G| over the six protocol qubits (cached template)."""
    global _FRESH_STATE
    if _FRESH_STATE is None:
        state = qsim.init_product(["0"] * PROTOCOL_QUBITS)
        state = qsim.prepare_ghz_like(state, C1, A1, B1)
        _FRESH_STATE = qsim.prepare_ghz_like(state, C2, A2, B2)
    return _FRESH_STATE.copy()


def p1_prepare(
    config: ProtocolConfig, round_index: int, rng: "np.random.Generator | None"
) -> RoundRegister:
    """Prepare the round's entangled registers and both decoy-laced sequences.

    Draw order from ``rng`` is fixed (Alice positions, bases, bits; then the
    same for Bob) so identical streams give identical registers.  ``rng`` may
    be None when ``decoys_per_sequence`` is 0.
    """
    state = _fresh_protocol_state()
    decoy_states: list = []
    decoy_meta: list = []
    sequences = {}
    d = config.decoys_per_sequence
    for owner, qubits in ((Role.ALICE, (A1, A2)), (Role.BOB, (B1, B2))):
        if d:
            slots = {int(s) for s in rng.permutation(d + 2)[:d]}
            coins = rng.integers(0, 2, size=2 * d)  # d basis coins, then d bit coins
        else:
            slots, coins = set(), ()
        seq = []
        protocol_iter = iter(qubits)
        j = 0
        for pos in range(d + 2):
            if pos in slots:
                basis = Basis.Z if coins[j] == 0 else Basis.X
                bit = int(coins[d + j])
                decoy_states.append(_DECOY_TEMPLATES[(basis, bit)].copy())
                decoy_meta.append(DecoyRecord(owner, pos, basis, bit))
                seq.append(("d", len(decoy_meta) - 1))
                j += 1
            else:
                seq.append(("q", next(protocol_iter)))
        sequences[owner] = seq
    return RoundRegister(
        state, decoy_states, decoy_meta, sequences[Role.ALICE], sequences[Role.BOB]
    )


def p2_transmit(register: RoundRegister, hook=None):
    """Hand the sequences to their receivers over an ideal channel.

    The adversary hook runs exactly once, before anything leaves Charlie's
    lab, with access to the whole register.
    """
    if hook is not None:
        hook(register)
    return register.alice_seq, register.bob_seq


def s_check(
    register: RoundRegister,
    announced,
    threshold: float,
    rng: "np.random.Generator | None",
) -> tuple:
    """Measure the announced decoys in their announced bases and compare.

    ``announced`` lists indices into the register's decoy tables.  Returns
    (error rate over the announced decoys, pass flag at ``threshold``).
    """
    if len(register.decoy_states) != len(register.decoy_meta):
        raise ValueError("decoy metadata incomplete")
    mismatches = 0
    for idx in announced:
        if not 0 <= idx < len(register.decoy_meta):
            raise ValueError(f"decoy index {idx} has no metadata")
        meta = register.decoy_meta[idx]
        measure = qsim.measure_z if meta.basis is Basis.Z else qsim.measure_x
        bit, post, _ = measure(register.decoy_states[idx], 0, rng.random())
        register.decoy_states[idx] = post
        meta.measured = bit
        mismatches += int(bit != meta.prepared)
    rate = mismatches / len(announced) if len(announced) else 0.0
    return rate, rate <= threshold


def e1_encode(register: RoundRegister, key: PauliLabel, direction: Role) -> RoundRegister:
    """Apply the round key's Pauli to the authenticating party's first qubit."""
    if direction is Role.ALICE:
        q = A1
    elif direction is Role.BOB:
        q = B1
    else:
        raise ValueError("direction must be Alice or Bob")
    register.state = qsim.apply_pauli(register.state, q, key)
    return register


def e2_measure(register: RoundRegister, source, order=("a", "b", "c")):
    """Measure the round: Alice Bell on (A1, A2), Bob Bell on (B1, B2),
    Charlie Z on C1 then C2.

    ``order`` permutes the three parties' turns; the measurements act on
    disjoint qubits, so the joint outcome distribution cannot depend on it.
    """
    if sorted(order) != ["a", "b", "c"]:
        raise ValueError(f"order must be a permutation of 'a', 'b', 'c', got {order!r}")
    results = {}
    for party in order:
        if party == "a":
            results["a"], register.state = source.measure_bell(register.state, A1, A2)
        elif party == "b":
            results["b"], register.state = source.measure_bell(register.state, B1, B2)
        else:
            c1, register.state = source.measure_z(register.state, C1)
            c2, register.state = source.measure_z(register.state, C2)
            results["c"] = (c1, c2)
    return results["a"], results["b"], results["c"]


def e3_verify(a: BellLabel, b: BellLabel, c, key: PauliLabel) -> Decision:
    """Check the announcements against the shared round key.

    The two entangled triples correlate the announcements so that, honestly,
    a XOR b equals (0, c1 XOR c2) XOR key; the verifier inverts that.
    """
    if a is None or b is None or c is None:
        raise ValueError("verification needs all three announcements")
    guess = PauliLabel.from_bits(
        a.phase_bit ^ b.phase_bit, a.parity_bit ^ b.parity_bit ^ c[0] ^ c[1]
    )
    return Decision.ACCEPT if guess is key else Decision.REJECT


def run_protocol(config: ProtocolConfig, keys, strategy):
    """Execute a full run: P1 through E3 for each round.

    ``keys`` holds one PauliLabel per round.  Returns (transcript, decision,
    adversary report); the decision is Accept only if every decoy check
    passed and every round verified.  Round ``i`` uses the rng stream seeded
    by (config.seed, i), so identical inputs give identical transcripts.
    """
    from . import adversary

    if len(keys) != config.rounds:
        raise ValueError(f"got {len(keys)} keys for {config.rounds} rounds")
    for k in keys:
        if not isinstance(k, PauliLabel):
            raise ValueError(f"keys must be PauliLabel values, got {k!r}")

    rounds: list = []
    eve_states: list = []
    inferred: list = []
    checked = 0
    mismatched = 0
    aborted = False

    for i in range(config.rounds):
        rng = np.random.default_rng((config.seed, i))
        source = SampleSource(rng)
        register = p1_prepare(config, i, rng)

        eve = None
        hook = None
        if strategy is adversary.StrategyId.PRE_MEASURE:

            def hook(reg, _source=source):
                nonlocal eve
                eve = adversary.hook_premeasure(reg, _source)

        elif strategy is adversary.StrategyId.INTERCEPT_RESEND:

            def hook(reg, _rng=rng):
                adversary.hook_intercept_resend(reg, _rng)

        elif strategy is not adversary.StrategyId.HONEST:
            raise ValueError(f"unknown strategy {strategy!r}")

        p2_transmit(register, hook)
        eve_states.append(eve)

        alice_idx = [j for j, m in enumerate(register.decoy_meta) if m.owner is Role.ALICE]
        bob_idx = [j for j, m in enumerate(register.decoy_meta) if m.owner is Role.BOB]
        _, ok_a = s_check(register, alice_idx, config.decoy_error_threshold, rng)
        _, ok_b = s_check(register, bob_idx, config.decoy_error_threshold, rng)
        n_checked = len(alice_idx) + len(bob_idx)
        n_errors = sum(
            1 for m in register.decoy_meta if m.measured is not None and m.measured != m.prepared
        )
        round_rate = n_errors / n_checked if n_checked else 0.0
        checked += n_checked
        mismatched += n_errors

        if not (ok_a and ok_b):
            rounds.append(
                RoundRecord(
                    None,
                    None,
                    None,
                    round_rate,
                    register.decoy_meta,
                    Decision.ABORT,
                    PhaseId.S1 if not ok_a else PhaseId.S2,
                )
            )
            inferred.append(None)
            aborted = True
            break

        e1_encode(register, keys[i], config.direction)
        a, b, c = e2_measure(register, source)
        key_guess = None
        if eve is not None:
            c = adversary.forge_c(eve)
            announced = a if config.direction is Role.ALICE else b
            key_guess = adversary.infer_key(eve, announced, config.direction)
        decision = e3_verify(a, b, c, keys[i])
        rounds.append(
            RoundRecord(c, a, b, round_rate, register.decoy_meta, decision)
        )
        inferred.append(key_guess)

    if aborted:
        overall = Decision.ABORT
    elif all(r.decision is Decision.ACCEPT for r in rounds):
        overall = Decision.ACCEPT
    else:
        overall = Decision.REJECT
    total_rate = mismatched / checked if checked else 0.0
    transcript = Transcript(rounds, overall, total_rate)
    report = adversary.AdversaryReport(strategy, eve_states, inferred)
    return transcript, overall, report
