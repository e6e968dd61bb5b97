"""Key duplication over singlet pairs with sifting and error estimation.

Two Measurers share a source of singlet pairs. Per round each side
independently picks one of its pre-coordinated analyzer directions;
the right side's directions are the antiparallel images of the left's,
so whenever the choices match the raw outcomes agree exactly and both
sides hold the same bit. Comparing only the choice indices (never the
outcomes) sifts the rounds down to the matching ones; a disclosed
random sample of the sifted bits then estimates the error rate that
noise or an interfering third party introduced, and the disclosed
positions are discarded from the keys.

Bit convention: outcome +1 maps to bit 1 on both sides; thanks to the
antiparallel coordination no flip is needed on the right.

Stream layout under ``run_session(seed)``: outcomes use substream 0 of
the session seed, left/right noise flips substreams 1 and 2; basis
choices use substream 3 (left) and 4 (right) of each agent's private
seed; ``estimate_qber`` discloses positions from substream 5. Round
``k`` always consumes variate ``k`` of each stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ProtocolError
from .qstate import UNIT_TOL
from .rng import stream
from . import epr

BIT_CONVENTION = "outcome +1 -> bit 1 on both sides (right bases antiparallel, no flip)"

_OUTCOME_STREAM = 0
_NOISE_STREAM = {"left": 1, "right": 2}
_BASIS_STREAM = {"left": 3, "right": 4}
_SAMPLE_STREAM = 5


def _basis_rows(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] not in (1, 2):
        raise ProtocolError(
            f"{name} must hold one or two 3-vectors, got shape {arr.shape}"
        )
    lengths = np.linalg.norm(arr, axis=1)
    if np.max(np.abs(lengths - 1.0)) > UNIT_TOL:
        raise ProtocolError(f"{name} must contain unit vectors, got lengths {lengths}")
    return arr


@dataclass(frozen=True)
class MeasurerAgent:
    """One side of the protocol: identity, basis menu, private seed.

    ``bases`` holds the agent's one or two analyzer directions; the
    single-entry menu is the degenerate fixed-basis mode in which every
    round sifts.
    """

    side: str
    bases: np.ndarray
    seed: int

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ProtocolError(f"side must be 'left' or 'right', got {self.side!r}")
        rows = _basis_rows(self.bases, f"{self.side} bases").copy()
        rows.setflags(write=False)
        object.__setattr__(self, "bases", rows)
        if self.seed < 0:
            raise ProtocolError(f"agent seed must be non-negative, got {self.seed}")

    def choose(self, rounds: int) -> np.ndarray:
        """Basis indices (0-based) for ``rounds`` rounds, from the private seed."""
        if self.bases.shape[0] == 1:
            return np.zeros(rounds, dtype=np.int64)
        return stream(self.seed, _BASIS_STREAM[self.side]).integers(0, 2, rounds)


def coordinated_agents(
    bases, left_seed: int, right_seed: int
) -> tuple[MeasurerAgent, MeasurerAgent]:
    """Build the two agents with antiparallel-coordinated basis menus.

    ``bases`` holds the left agent's directions; the right agent gets
    their negatives, so matching choice indices measure antiparallel
    directions and raw outcomes coincide on the singlet.
    """
    rows = _basis_rows(bases, "bases")
    left = MeasurerAgent(side="left", bases=rows, seed=left_seed)
    right = MeasurerAgent(side="right", bases=-rows, seed=right_seed)
    return left, right


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-side bit flips with probability ``epsilon``."""

    epsilon: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise ProtocolError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")


@dataclass(frozen=True)
class RoundRecord:
    """What one side knows about one round: choice index and outcome bit."""

    index: int
    basis_index: int
    bit: int


def run_session(
    rounds: int,
    agents: tuple[MeasurerAgent, MeasurerAgent],
    noise: NoiseModel,
    seed: int,
) -> tuple[list[RoundRecord], list[RoundRecord]]:
    """Execute ``rounds`` singlet rounds and return each side's records.

    Each round the source emits a singlet, both agents pick a basis
    from their private streams, the joint outcome is drawn from the
    exact joint distribution of the chosen settings (round ``k`` uses
    variate ``k`` of the session stream), and noise flips each side's
    bit independently. ``basis_index`` in the records is 1-based.
    """
    if rounds < 1:
        raise ProtocolError(f"rounds must be >= 1, got {rounds}")
    left, right = agents
    if left.side != "left" or right.side != "right":
        raise ProtocolError("agents must be passed as (left, right)")
    if left.bases.shape != right.bases.shape or np.max(
        np.abs(left.bases + right.bases)
    ) > UNIT_TOL:
        raise ProtocolError(
            "agents are not antiparallel-coordinated: right bases must be the "
            "negatives of the left bases"
        )
    state = epr.singlet_state([0.0, 0.0, 1.0])
    choice_l = left.choose(rounds)
    choice_r = right.choose(rounds)
    u = stream(seed, _OUTCOME_STREAM).random(rounds)
    table = np.asarray(epr.OUTCOME_ORDER, dtype=np.int8)
    d_l = np.zeros(rounds, dtype=np.int8)
    d_r = np.zeros(rounds, dtype=np.int8)
    for cl in range(left.bases.shape[0]):
        for cr in range(right.bases.shape[0]):
            mask = (choice_l == cl) & (choice_r == cr)
            if not np.any(mask):
                continue
            probs = epr.joint_probabilities(state, left.bases[cl], right.bases[cr])
            cum = np.cumsum([probs[key] for key in epr.OUTCOME_ORDER])
            cum /= cum[-1]
            idx = np.minimum(np.searchsorted(cum, u[mask], side="right"), 3)
            d_l[mask] = table[idx, 0]
            d_r[mask] = table[idx, 1]
    bit_l = ((d_l + 1) // 2).astype(np.uint8)
    bit_r = ((d_r + 1) // 2).astype(np.uint8)
    if noise.epsilon > 0.0:
        flip_l = stream(seed, _NOISE_STREAM["left"]).random(rounds) < noise.epsilon
        flip_r = stream(seed, _NOISE_STREAM["right"]).random(rounds) < noise.epsilon
        bit_l = bit_l ^ flip_l.astype(np.uint8)
        bit_r = bit_r ^ flip_r.astype(np.uint8)
    rec_l = [
        RoundRecord(index=k, basis_index=int(choice_l[k]) + 1, bit=int(bit_l[k]))
        for k in range(rounds)
    ]
    rec_r = [
        RoundRecord(index=k, basis_index=int(choice_r[k]) + 1, bit=int(bit_r[k]))
        for k in range(rounds)
    ]
    return rec_l, rec_r


@dataclass(frozen=True)
class SiftedKey:
    """Bit sequence plus the original round index of every retained bit."""

    bits: np.ndarray
    rounds: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        rounds = np.asarray(self.rounds, dtype=np.int64)
        if bits.ndim != 1 or bits.shape != rounds.shape:
            raise ProtocolError(
                f"bits and rounds must be matching 1-d arrays, got {bits.shape} "
                f"and {rounds.shape}"
            )
        if bits.size and not np.all(bits <= 1):
            raise ProtocolError("key bits must be 0 or 1")
        for name, arr in (("bits", bits), ("rounds", rounds)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.bits.size


def sift(
    left: list[RoundRecord], right: list[RoundRecord]
) -> tuple[SiftedKey, SiftedKey]:
    """Keep only the rounds where both sides chose the same basis index.

    Only choice indices are compared; outcome bits are never disclosed
    here. The returned keys are aligned round for round.
    """
    if len(left) != len(right):
        raise ProtocolError(
            f"record lists must have equal length, got {len(left)} and {len(right)}"
        )
    kept = [
        (l.index, l.bit, r.bit)
        for l, r in zip(left, right)
        if l.basis_index == r.basis_index
    ]
    rounds = np.asarray([k for k, _, _ in kept], dtype=np.int64)
    return (
        SiftedKey(bits=np.asarray([b for _, b, _ in kept], dtype=np.uint8), rounds=rounds),
        SiftedKey(bits=np.asarray([b for _, _, b in kept], dtype=np.uint8), rounds=rounds),
    )


def estimate_qber(
    left: SiftedKey, right: SiftedKey, sample_fraction: float, seed: int
) -> tuple[float, tuple[SiftedKey, SiftedKey]]:
    """Disclose a random key sample, estimate the error rate, drop the sample.

    A seeded choice of ``floor(sample_fraction * len)`` positions is
    compared between the keys; the mismatch fraction is the QBER
    estimate. Disclosed positions are removed from both returned keys,
    so nothing about the undisclosed bits leaks into the report. The
    positions come from substream 5 of ``seed``, disjoint from every
    stream a session with the same seed consumes.
    """
    if len(left) != len(right) or not np.array_equal(left.rounds, right.rounds):
        raise ProtocolError("keys must be aligned on the same retained rounds")
    if len(left) == 0:
        raise ProtocolError("cannot estimate an error rate from empty keys")
    if not (0.0 < sample_fraction < 1.0):
        raise ProtocolError(
            f"sample_fraction must lie in (0, 1), got {sample_fraction!r}"
        )
    n = len(left)
    n_sample = int(sample_fraction * n)
    if n_sample < 1:
        raise ProtocolError(
            f"sample_fraction {sample_fraction!r} discloses no bits for key "
            f"length {n}"
        )
    positions = np.sort(
        stream(seed, _SAMPLE_STREAM).choice(n, size=n_sample, replace=False)
    )
    qber = float(np.mean(left.bits[positions] != right.bits[positions]))
    keep = np.setdiff1d(np.arange(n), positions)
    remaining = (
        SiftedKey(bits=left.bits[keep], rounds=left.rounds[keep]),
        SiftedKey(bits=right.bits[keep], rounds=right.rounds[keep]),
    )
    return qber, remaining


def key_hex(key: SiftedKey) -> str:
    """Hex dump of the key bits, most significant bit first per byte."""
    if len(key) == 0:
        return ""
    return np.packbits(key.bits).tobytes().hex()
