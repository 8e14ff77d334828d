"""Brute-force ground truth for the protocol and its attacks.

Entanglement-swapping tables and Pauli-on-Bell maps are recomputed from
amplitudes rather than trusted as label arithmetic; transcript distributions
are obtained by exhaustive branch enumeration.  The enumeration drives the
very same phase functions the sampler uses: :class:`BranchSource` implements
the outcome-source interface of :class:`qauthsim.protocol.SampleSource`, but
replays scripted choices instead of drawing randomness, and
:func:`enumerate_branches` re-executes a pipeline once per measurement
branch in depth-first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import protocol, qsim
from .adversary import StrategyId, forge_c, hook_premeasure
from .protocol import Decision, ProtocolConfig, Role
from .qsim import Basis, BellLabel, PauliLabel


class BranchSource:
    """Outcome source that follows a scripted branch of the measurement tree.

    At measurement ``i`` it takes live option ``script[i]`` (or the first
    live option beyond the script's end) from the outcome list, accumulating
    the branch probability.  ``taken`` and ``counts`` record the path and
    the live-option fan-out actually encountered, which is what the
    enumeration needs to advance to the next branch.
    """

    def __init__(self, script):
        self._script = script
        self.taken = []
        self.counts = []
        self.probability = 1.0

    def _choose(self, options):
        live = [o for o in options if o[2] is not None and o[1] > qsim.ZERO_PROB]
        depth = len(self.taken)
        index = self._script[depth] if depth < len(self._script) else 0
        outcome, p, post = live[index]
        self.taken.append(index)
        self.counts.append(len(live))
        self.probability *= p
        return outcome, post

    def measure_z(self, state, q):
        return self._choose(qsim.z_outcomes(state, q))

    def measure_x(self, state, q):
        return self._choose(qsim.x_outcomes(state, q))

    def measure_bell(self, state, q1, q2):
        return self._choose(qsim.bell_outcomes(state, q1, q2))


def enumerate_branches(pipeline):
    """Yield (result, probability) over every measurement branch of ``pipeline``.

    ``pipeline`` is a callable taking one outcome source; it is re-executed
    from scratch for each leaf.  Probabilities over all yielded branches sum
    to 1 (zero-probability branches are never entered).
    """
    script: list = []
    while True:
        source = BranchSource(script)
        result = pipeline(source)
        yield result, source.probability
        taken, counts = source.taken, source.counts
        i = len(taken) - 1
        while i >= 0 and taken[i] + 1 >= counts[i]:
            i -= 1
        if i < 0:
            return
        script = taken[:i] + [taken[i] + 1]


@dataclass
class SwapTable:
    """Joint Bell-outcome distribution after swapping two Bell pairs.

    ``inputs`` = (M on (A1, B1), N on (A2, B2)); ``joint`` maps every
    (P on (A1, A2), Q on (B1, B2)) pair to its probability.
    """

    inputs: tuple
    joint: dict


def _impose_label(state, qubit, label):
    if label.parity_bit:
        state = qsim.apply_pauli(state, qubit, PauliLabel.X)
    if label.phase_bit:
        state = qsim.apply_pauli(state, qubit, PauliLabel.Z)
    return state


def swap_table(m: BellLabel, n: BellLabel) -> SwapTable:
    """Enumerate the swap of Bell pairs M and N from raw amplitudes."""
    state = qsim.init_product(["0"] * 4)  # layout A1=0, B1=1, A2=2, B2=3
    state = qsim.apply_cnot(qsim.apply_hadamard(state, 0), 0, 1)
    state = qsim.apply_cnot(qsim.apply_hadamard(state, 2), 2, 3)
    state = _impose_label(state, 1, m)
    state = _impose_label(state, 3, n)
    joint = qsim.outcome_distribution(
        state, [((0, 2), Basis.BELL), ((1, 3), Basis.BELL)]
    )
    return SwapTable((m, n), joint)


def pauli_bell_map(p: PauliLabel, m: BellLabel) -> BellLabel:
    """Bell label after applying Pauli ``p`` to one qubit of Bell state ``m``.

    Pure label XOR; the test suite holds this against simulator brute force
    for all sixteen pairs.
    """
    return m ^ p


def exact_transcript_distribution(
    strategy: StrategyId,
    key: PauliLabel,
    direction: Role = Role.ALICE,
    hook_order=("c", "a", "b"),
    measure_order=("a", "b", "c"),
) -> dict:
    """Exact distribution of the public round transcript (c, a, b).

    Enumerates every branch of a decoy-free round (decoys are independent of
    the protocol qubits and are checked separately).  Returns the full
    64-cell map keyed by ((c1, c2), a, b).  The order arguments permute the
    enumeration order of the parties' measurements; the distribution must
    not depend on them.
    """
    if strategy not in (StrategyId.HONEST, StrategyId.PRE_MEASURE):
        raise ValueError(
            f"exact enumeration covers Honest and PreMeasure, not {strategy!r}"
        )
    config = ProtocolConfig(rounds=1, decoys_per_sequence=0, direction=direction)

    def pipeline(source):
        register = protocol.p1_prepare(config, 0, None)
        eve = None
        if strategy is StrategyId.PRE_MEASURE:
            eve = hook_premeasure(register, source, hook_order)
        protocol.e1_encode(register, key, direction)
        a, b, c = protocol.e2_measure(register, source, measure_order)
        if eve is not None:
            c = forge_c(eve)
        return c, a, b

    cells = {
        ((c1, c2), a, b): 0.0
        for c1 in (0, 1)
        for c2 in (0, 1)
        for a in BellLabel
        for b in BellLabel
    }
    for (c, a, b), probability in enumerate_branches(pipeline):
        cells[(c, a, b)] += probability
    return cells


def tv_distance(d1: dict, d2: dict) -> float:
    """Total variation distance: half the L1 distance between the maps."""
    if set(d1) != set(d2):
        raise ValueError("distributions live on different outcome spaces")
    return 0.5 * sum(abs(d1[k] - d2[k]) for k in d1)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial rate (default 95%).

    Stays inside [0, 1] and behaves sensibly at observed rates of exactly
    0 or 1, which this package hits by design.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(
        phat * (1 - phat) / trials + z * z / (4 * trials * trials)
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class RoundStats:
    """One sampled round reduced to the three acceptance-relevant bits.

    ``key_recovered`` is None when the strategy makes no key inference.
    """

    accepted: bool
    detected: bool
    key_recovered: "bool | None"


@dataclass
class RateEstimate:
    rate: float
    low: float
    high: float
    trials: int


@dataclass
class RatesReport:
    accept: RateEstimate
    detection: RateEstimate
    key_recovery: "RateEstimate | None"


def _estimate(successes: int, trials: int) -> RateEstimate:
    low, high = wilson_interval(successes, trials)
    return RateEstimate(successes / trials, low, high, trials)


def sampled_rates(results) -> RatesReport:
    """Empirical accept/detection/key-recovery rates with Wilson 95% bands."""
    if not results:
        raise ValueError("no round results to summarise")
    n = len(results)
    accept = _estimate(sum(r.accepted for r in results), n)
    detection = _estimate(sum(r.detected for r in results), n)
    with_guess = [r for r in results if r.key_recovered is not None]
    recovery = (
        _estimate(sum(r.key_recovered for r in with_guess), len(with_guess))
        if with_guess
        else None
    )
    return RatesReport(accept, detection, recovery)


def collect_round_stats(transcript, report, keys) -> list:
    """Flatten one protocol run into per-round RoundStats."""
    stats = []
    for i, rec in enumerate(transcript.rounds):
        guess = report.inferred_keys[i]
        stats.append(
            RoundStats(
                accepted=rec.decision is Decision.ACCEPT,
                detected=rec.decision is Decision.ABORT,
                key_recovered=None if guess is None else guess is keys[i],
            )
        )
    return stats
