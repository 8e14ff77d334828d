"""Dense state-vector simulator for small qubit registers.

Amplitudes are indexed big-endian: qubit 0 is the most significant bit of the
basis-state index, so ``|q0 q1 ... q_{n-1}>`` sits at index
``q0*2^(n-1) + ... + q_{n-1}``.  Operations return new :class:`StateVector`
instances rather than mutating their input.

Nothing in this module draws randomness.  Sampling measurements take a single
uniform draw from ``[0, 1)`` supplied by the caller; exhaustive callers use
the ``*_outcomes`` functions, which list every outcome with its probability
and post-measurement state.

Bell states and Pauli operators both carry a two-bit ``(phase, parity)``
label, aligned so that applying a Pauli to one half of a Bell pair XORs the
labels, and entanglement swapping constrains the XOR of the output labels to
the XOR of the input labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache, reduce

import numpy as np

NORM_TOL = 1e-10
MEASURE_NORM_TOL = 1e-6
ZERO_PROB = 1e-14

_SQRT2_INV = 1.0 / np.sqrt(2.0)


class Basis(Enum):
    """Measurement basis selector."""

    Z = "Z"
    X = "X"
    BELL = "Bell"


class BellLabel(Enum):
    """The four Bell states, keyed by (phase bit, parity bit).

    Parity 0 states are built on |00>/|11>, parity 1 on |01>/|10>; the phase
    bit picks the relative sign.
    """

    PHI_PLUS = (0, 0)
    PSI_PLUS = (0, 1)
    PHI_MINUS = (1, 0)
    PSI_MINUS = (1, 1)

    @property
    def phase_bit(self) -> int:
        return self.value[0]

    @property
    def parity_bit(self) -> int:
        return self.value[1]

    @classmethod
    def from_bits(cls, phase: int, parity: int) -> "BellLabel":
        return cls((phase & 1, parity & 1))

    def __xor__(self, other) -> "BellLabel":
        return BellLabel.from_bits(
            self.phase_bit ^ other.phase_bit, self.parity_bit ^ other.parity_bit
        )

    def __str__(self) -> str:
        return _BELL_NAMES[self]


class PauliLabel(Enum):
    """Single-qubit encoding operators, keyed by (phase bit, parity bit).

    iY is the real matrix Z@X (|0> -> -|1>, |1> -> |0>); using it instead of
    Y keeps the whole alphabet real.  The bit layout makes applying a Pauli
    to one half of a Bell pair a label XOR.
    """

    I = (0, 0)
    X = (0, 1)
    Z = (1, 0)
    IY = (1, 1)

    @property
    def phase_bit(self) -> int:
        return self.value[0]

    @property
    def parity_bit(self) -> int:
        return self.value[1]

    @classmethod
    def from_bits(cls, phase: int, parity: int) -> "PauliLabel":
        return cls((phase & 1, parity & 1))

    def __xor__(self, other) -> "PauliLabel":
        return PauliLabel.from_bits(
            self.phase_bit ^ other.phase_bit, self.parity_bit ^ other.parity_bit
        )

    def __str__(self) -> str:
        return _PAULI_NAMES[self]


_BELL_NAMES = {
    BellLabel.PHI_PLUS: "Phi+",
    BellLabel.PSI_PLUS: "Psi+",
    BellLabel.PHI_MINUS: "Phi-",
    BellLabel.PSI_MINUS: "Psi-",
}

_PAULI_NAMES = {
    PauliLabel.I: "I",
    PauliLabel.X: "X",
    PauliLabel.Z: "Z",
    PauliLabel.IY: "iY",
}

PAULI_MATRICES = {
    PauliLabel.I: np.eye(2, dtype=np.complex128),
    PauliLabel.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    PauliLabel.Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
    PauliLabel.IY: np.array([[0, 1], [-1, 0]], dtype=np.complex128),
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT2_INV

_SINGLE_QUBIT_STATES = {
    "0": np.array([1, 0], dtype=np.complex128),
    "1": np.array([0, 1], dtype=np.complex128),
    "+": np.array([_SQRT2_INV, _SQRT2_INV], dtype=np.complex128),
    "-": np.array([_SQRT2_INV, -_SQRT2_INV], dtype=np.complex128),
}


@dataclass
class StateVector:
    """Normalised pure state over ``n_qubits`` qubits."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        expected = 2**self.n_qubits
        if self.amps.shape != (expected,):
            raise ValueError(
                f"amplitude vector has shape {self.amps.shape}, "
                f"expected ({expected},) for {self.n_qubits} qubits"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def overlap(self, other: "StateVector") -> float:
        """Phase-insensitive overlap |<self|other>|."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("overlap requires equal qubit counts")
        return float(abs(np.vdot(self.amps, other.amps)))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())


@dataclass
class MeasurementRecord:
    """What a single measurement did: where, which basis, and the result."""

    qubits: tuple[int, ...]
    basis: Basis
    outcome: "int | BellLabel"
    probability: float


def same_state(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    """True when the two states agree up to a global phase."""
    return a.n_qubits == b.n_qubits and abs(a.overlap(b) - 1.0) <= tol


def init_product(tags) -> StateVector:
    """Build a product state from per-qubit tags drawn from '0', '1', '+', '-'."""
    if len(tags) == 0:
        raise ValueError("need at least one qubit")
    bad = [s for s in tags if s not in _SINGLE_QUBIT_STATES]
    if bad:
        raise ValueError(f"unknown qubit tags {bad}; expected one of 0, 1, +, -")
    vectors = [_SINGLE_QUBIT_STATES[s] for s in tags]
    amps = vectors[0].copy() if len(vectors) == 1 else reduce(np.kron, vectors)
    return StateVector(len(tags), amps)


def _require_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.n_qubits:
        raise ValueError(
            f"qubit index {q} out of range for a {state.n_qubits}-qubit state"
        )


def _check_randomness(randomness: float) -> None:
    if not 0.0 <= randomness < 1.0:
        raise ValueError(f"randomness must lie in [0, 1), got {randomness}")


# Flat-index helpers, cached per register shape.  Measurements and Pauli
# gates then reduce to dot products, sign flips, and permutation lookups on
# the flat amplitude array, which is considerably cheaper than rearranging a
# (2, ..., 2) tensor per call.  Cached arrays are marked read-only; they are
# shared across all states of the same shape.


@lru_cache(maxsize=None)
def _bit_mask(n: int, q: int, bit: int) -> np.ndarray:
    """1.0 on flat indices whose qubit-q bit equals ``bit``, else 0.0."""
    idx = np.arange(2**n)
    mask = (((idx >> (n - 1 - q)) & 1) == bit).astype(np.float64)
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def _z_signs(n: int, q: int) -> np.ndarray:
    signs = 1.0 - 2.0 * _bit_mask(n, q, 1)
    signs.setflags(write=False)
    return signs


@lru_cache(maxsize=None)
def _flip_perm(n: int, q: int) -> np.ndarray:
    """Permutation of flat indices that flips qubit ``q``."""
    perm = np.arange(2**n) ^ (1 << (n - 1 - q))
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=None)
def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    """Permutation flipping ``target`` on indices where ``control`` is set."""
    idx = np.arange(2**n)
    cbit = (idx >> (n - 1 - control)) & 1
    perm = idx ^ (cbit << (n - 1 - target))
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=None)
def _pair_masks(n: int, q1: int, q2: int) -> np.ndarray:
    """Rows (b1*2 + b2) select flat indices with (qubit q1, qubit q2) = (b1, b2)."""
    rows = np.stack(
        [
            _bit_mask(n, q1, b1) * _bit_mask(n, q2, b2)
            for b1 in (0, 1)
            for b2 in (0, 1)
        ]
    )
    rows.setflags(write=False)
    return rows


def apply_pauli(state: StateVector, q: int, label: PauliLabel) -> StateVector:
    _require_qubit(state, q)
    n, amps = state.n_qubits, state.amps
    if label is PauliLabel.I:
        out = amps.copy()
    elif label is PauliLabel.X:
        out = amps[_flip_perm(n, q)]
    elif label is PauliLabel.Z:
        out = amps * _z_signs(n, q)
    else:  # iY = Z@X
        out = amps[_flip_perm(n, q)] * _z_signs(n, q)
    return StateVector(n, out)


def apply_hadamard(state: StateVector, q: int) -> StateVector:
    _require_qubit(state, q)
    n, amps = state.n_qubits, state.amps
    if n == 1:
        return StateVector(1, HADAMARD @ amps)
    moved = amps.reshape((2,) * n).swapaxes(q, -1)
    out = (moved @ HADAMARD).swapaxes(q, -1).reshape(-1)
    return StateVector(n, out)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _require_qubit(state, control)
    _require_qubit(state, target)
    if control == target:
        raise ValueError("cnot control and target must differ")
    n = state.n_qubits
    return StateVector(n, state.amps[_cnot_perm(n, control, target)])


def _bit_probabilities(amps: np.ndarray, n: int, q: int) -> tuple[float, float]:
    weights = np.abs(amps) ** 2
    p1 = float(weights @ _bit_mask(n, q, 1))
    return float(weights.sum() - p1), p1


def _pair_probabilities(amps: np.ndarray, n: int, q1: int, q2: int) -> np.ndarray:
    weights = np.abs(amps) ** 2
    return (_pair_masks(n, q1, q2) @ weights).reshape(2, 2)


def _check_measured_mass(total: float) -> None:
    if abs(total - 1.0) > MEASURE_NORM_TOL:
        raise ValueError(
            f"state norm deviates from 1 by {abs(total - 1.0):.3e}; "
            "refusing to measure an unnormalised state"
        )


def _project_bit(amps: np.ndarray, n: int, q: int, bit: int, prob: float) -> np.ndarray:
    return amps * (_bit_mask(n, q, bit) / np.sqrt(prob))


def _project_pair(
    amps: np.ndarray, n: int, q1: int, q2: int, b1: int, b2: int, prob: float
) -> np.ndarray:
    row = _pair_masks(n, q1, q2)[2 * b1 + b2]
    return amps * (row / np.sqrt(prob))


def z_outcomes(state: StateVector, q: int) -> list:
    """Both Z outcomes on qubit ``q`` as (bit, probability, post-state).

    Outcomes with numerically zero probability carry ``None`` in place of a
    post-measurement state.
    """
    _require_qubit(state, q)
    n = state.n_qubits
    p0, p1 = _bit_probabilities(state.amps, n, q)
    _check_measured_mass(p0 + p1)
    out = []
    for bit, p in ((0, p0), (1, p1)):
        if p <= ZERO_PROB:
            out.append((bit, p, None))
        else:
            out.append((bit, p, StateVector(n, _project_bit(state.amps, n, q, bit, p))))
    return out


def x_outcomes(state: StateVector, q: int) -> list:
    """Both X outcomes on qubit ``q``; bit 0 means |+>, bit 1 means |->."""
    rotated = apply_hadamard(state, q)
    return [
        (bit, p, None if post is None else apply_hadamard(post, q))
        for bit, p, post in z_outcomes(rotated, q)
    ]


def bell_outcomes(state: StateVector, q1: int, q2: int) -> list:
    """All four Bell outcomes on the ordered pair (q1, q2).

    Implemented by rotating with CNOT(q1->q2) then H(q1), reading (phase bit,
    parity bit) off (q1, q2) in the computational basis, and rotating each
    projected state back.
    """
    _require_qubit(state, q1)
    _require_qubit(state, q2)
    if q1 == q2:
        raise ValueError("bell measurement needs two distinct qubits")
    n = state.n_qubits
    rotated = apply_hadamard(apply_cnot(state, q1, q2), q1)
    pair = _pair_probabilities(rotated.amps, n, q1, q2)
    _check_measured_mass(float(pair.sum()))
    out = []
    for label in BellLabel:
        b1, b2 = label.value
        p = float(pair[b1, b2])
        if p <= ZERO_PROB:
            out.append((label, p, None))
            continue
        projected = StateVector(n, _project_pair(rotated.amps, n, q1, q2, b1, b2, p))
        out.append((label, p, apply_cnot(apply_hadamard(projected, q1), q1, q2)))
    return out


def measure_z(
    state: StateVector, q: int, randomness: float
) -> tuple[int, StateVector, MeasurementRecord]:
    """Measure qubit ``q`` in Z, selecting the outcome with one uniform draw."""
    _require_qubit(state, q)
    _check_randomness(randomness)
    n = state.n_qubits
    p0, p1 = _bit_probabilities(state.amps, n, q)
    _check_measured_mass(p0 + p1)
    if p1 <= ZERO_PROB:
        bit = 0
    elif p0 <= ZERO_PROB:
        bit = 1
    else:
        bit = 0 if randomness < p0 else 1
    prob = (p0, p1)[bit]
    post = StateVector(n, _project_bit(state.amps, n, q, bit, prob))
    return bit, post, MeasurementRecord((q,), Basis.Z, bit, prob)


def measure_x(
    state: StateVector, q: int, randomness: float
) -> tuple[int, StateVector, MeasurementRecord]:
    """Measure qubit ``q`` in X (bit 0 = |+>), selecting with one uniform draw."""
    rotated = apply_hadamard(state, q)
    bit, post, record = measure_z(rotated, q, randomness)
    return (
        bit,
        apply_hadamard(post, q),
        MeasurementRecord((q,), Basis.X, bit, record.probability),
    )


def measure_bell(
    state: StateVector, q1: int, q2: int, randomness: float
) -> tuple[BellLabel, StateVector, MeasurementRecord]:
    """Measure the pair (q1, q2) in the Bell basis with one uniform draw."""
    _require_qubit(state, q1)
    _require_qubit(state, q2)
    if q1 == q2:
        raise ValueError("bell measurement needs two distinct qubits")
    _check_randomness(randomness)
    n = state.n_qubits
    rotated = apply_hadamard(apply_cnot(state, q1, q2), q1)
    pair = _pair_probabilities(rotated.amps, n, q1, q2)
    _check_measured_mass(float(pair.sum()))
    acc = 0.0
    chosen = None
    last_live = None
    for label in BellLabel:
        p = float(pair[label.value])
        acc += p
        if p > ZERO_PROB:
            last_live = (label, p)
            if randomness < acc:
                chosen = (label, p)
                break
    if chosen is None:
        chosen = last_live
    label, prob = chosen
    projected = StateVector(
        n, _project_pair(rotated.amps, n, q1, q2, label.value[0], label.value[1], prob)
    )
    post = apply_cnot(apply_hadamard(projected, q1), q1, q2)
    return label, post, MeasurementRecord((q1, q2), Basis.BELL, label, prob)


def _plan_outcomes(state: StateVector, qubits: tuple, basis: Basis) -> list:
    if basis is Basis.BELL:
        return bell_outcomes(state, qubits[0], qubits[1])
    if basis is Basis.Z:
        return z_outcomes(state, qubits[0])
    return x_outcomes(state, qubits[0])


def _validate_plan(state: StateVector, plan) -> None:
    seen = set()
    for qubits, basis in plan:
        want = 2 if basis is Basis.BELL else 1
        if len(qubits) != want:
            raise ValueError(
                f"{basis.value} measurement takes {want} qubit(s), got {qubits}"
            )
        for q in qubits:
            _require_qubit(state, q)
            if q in seen:
                raise ValueError(f"qubit {q} appears twice in the measurement plan")
            seen.add(q)


def outcome_distribution(state: StateVector, plan) -> dict:
    """Exact joint distribution of an ordered plan of disjoint measurements.

    ``plan`` is a list of (qubit tuple, Basis) entries: Z and X entries name
    one qubit, Bell entries name two.  Returns a dict over the full product
    outcome space (zero-probability cells included), keyed by tuples of
    per-measurement outcomes in plan order.
    """
    _validate_plan(state, plan)
    spaces = [tuple(BellLabel) if basis is Basis.BELL else (0, 1) for _, basis in plan]
    dist = {key: 0.0 for key in itertools.product(*spaces)}

    def walk(current: StateVector, depth: int, prefix: tuple, weight: float) -> None:
        if depth == len(plan):
            dist[prefix] += weight
            return
        qubits, basis = plan[depth]
        for outcome, p, post in _plan_outcomes(current, qubits, basis):
            if post is None or p <= ZERO_PROB:
                continue
            walk(post, depth + 1, prefix + (outcome,), weight * p)

    walk(state, 0, (), 1.0)
    return dist


def prepare_ghz_like(state: StateVector, qc: int, qa: int, qb: int) -> StateVector:
    """Entangle three |0> qubits into (|001> + |010> + |100> + |111>)/2.

    Basis strings are read in the order (qc, qa, qb).  Equivalently the
    result is (|0>_c Psi+_ab + |1>_c Phi+_ab)/sqrt(2): reading qc in Z leaves
    the (qa, qb) pair in Psi+ for outcome 0 and Phi+ for outcome 1.
    """
    if len({qc, qa, qb}) != 3:
        raise ValueError("ghz preparation needs three distinct qubits")
    for q in (qc, qa, qb):
        _require_qubit(state, q)
        _, p1 = _bit_probabilities(state.amps, state.n_qubits, q)
        if p1 > NORM_TOL:
            raise ValueError(f"qubit {q} must be in |0> before ghz preparation")
    s = apply_hadamard(state, qa)
    s = apply_cnot(s, qa, qb)
    s = apply_hadamard(s, qc)
    s = apply_pauli(s, qc, PauliLabel.X)
    s = apply_cnot(s, qc, qb)
    s = apply_pauli(s, qc, PauliLabel.X)
    return s


def bell_pair(label: BellLabel) -> StateVector:
    """The two-qubit Bell state carrying ``label``."""
    s = init_product(["0", "0"])
    s = apply_hadamard(s, 0)
    s = apply_cnot(s, 0, 1)
    if label.parity_bit:
        s = apply_pauli(s, 1, PauliLabel.X)
    if label.phase_bit:
        s = apply_pauli(s, 1, PauliLabel.Z)
    return s
