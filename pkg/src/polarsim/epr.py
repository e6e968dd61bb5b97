"""Two-photon polarization states, joint measurements, and correlations.

A pair state lives on the four-dimensional basis {|0>|0>, |0>|1>,
|1>|0>, |1>|1>} with the left photon as the first factor. The states
of interest are superpositions ``cos(theta) |S> + e^{i phi} sin(theta)
|T>`` of the antisymmetric combination |S> (the singlet) and the
symmetric combination |T> built on a reference direction ``n``.

Measuring one photon reduces the pair: the other photon is left in a
pure state fixed by the observed outcome. For the singlet that remote
state points opposite to the measured direction, which is what makes
antiparallel analyzers report identical outcomes round after round and
gives the covariance ``-m_l . m_r``.

The correlation harness also carries the two hypothesis-testing tools
used to argue against a classical alternative: the upper probability
bound ``1/(N+1)`` after N fully matched events, and the event budget
``6/P - 1`` for probing a target confidence P over a full complement
of setting pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import ceil

import numpy as np

from .errors import PairStateError
from .qstate import IDENTITY_2, as_bloch_vector, ket_from_bloch, observable_matrix
from .rng import stream

#: Fixed outcome order used everywhere a joint distribution is sampled.
OUTCOME_ORDER = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class PairPolarizationState:
    """Two-photon polarization state with its construction parameters.

    ``amplitudes[2*a + b]`` is the amplitude of left channel ``a`` and
    right channel ``b``. ``theta``, ``phi``, and ``axis`` record how the
    state was built from the singlet/symmetric combinations on ``axis``.
    """

    amplitudes: np.ndarray
    theta: float
    phi: float
    axis: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (4,):
            raise PairStateError(
                f"pair state needs 4 amplitudes, got shape {amps.shape}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-12:
            raise PairStateError(f"pair state must be normalized, got norm {norm!r}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        axis = as_bloch_vector(self.axis, unit=True, name="reference direction")
        axis = axis.copy()
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)


def _basis_pair(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    plus = ket_from_bloch(axis)
    minus = ket_from_bloch(-axis)
    return plus, minus


def singlet_state(n) -> PairPolarizationState:
    """Antisymmetric pair state ``(|n,-n> - |-n,n>) / sqrt(2)``.

    The same state (up to global phase) results for every unit ``n``;
    for ``n = z`` the amplitudes are ``(0, 1/sqrt2, -1/sqrt2, 0)``.
    """
    axis = as_bloch_vector(n, unit=True, name="reference direction")
    plus, minus = _basis_pair(axis)
    amps = (np.kron(plus, minus) - np.kron(minus, plus)) / np.sqrt(2.0)
    return PairPolarizationState(amplitudes=amps, theta=0.0, phi=0.0, axis=axis)


def pair_state(theta: float, phi: float, n) -> PairPolarizationState:
    """Superposition ``cos(theta) |S> + e^{i phi} sin(theta) |T>`` on axis ``n``.

    ``|T>`` is the symmetric combination ``(|n,-n> + |-n,n>) / sqrt(2)``;
    it is orthogonal to the singlet ``|S>``, so the result is normalized
    for every ``(theta, phi)``.
    """
    axis = as_bloch_vector(n, unit=True, name="reference direction")
    plus, minus = _basis_pair(axis)
    sym = (np.kron(plus, minus) + np.kron(minus, plus)) / np.sqrt(2.0)
    anti = (np.kron(plus, minus) - np.kron(minus, plus)) / np.sqrt(2.0)
    amps = np.cos(theta) * anti + np.exp(1.0j * phi) * np.sin(theta) * sym
    return PairPolarizationState(
        amplitudes=amps, theta=float(theta), phi=float(phi), axis=axis
    )


def joint_probabilities(state: PairPolarizationState, m_l, m_r) -> dict:
    """Outcome distribution ``{(d_l, d_r): probability}``.

    ``P(d_l, d_r) = <state| proj(d_l m_l) (x) proj(d_r m_r) |state>``
    with ``proj(+-m) = (I +- m.sigma)/2``. The four entries sum to 1.
    """
    obs_l = observable_matrix(m_l)
    obs_r = observable_matrix(m_r)
    amps = state.amplitudes
    probs = {}
    for d_l, d_r in OUTCOME_ORDER:
        proj = np.kron(
            0.5 * (IDENTITY_2 + d_l * obs_l), 0.5 * (IDENTITY_2 + d_r * obs_r)
        )
        probs[(d_l, d_r)] = float(max(0.0, np.real(np.vdot(amps, proj @ amps))))
    return probs


def left_marginal(probs: dict) -> tuple[float, float]:
    """Left-side outcome probabilities ``(P(d_l=+1), P(d_l=-1))``."""
    return (
        probs[(1, 1)] + probs[(1, -1)],
        probs[(-1, 1)] + probs[(-1, -1)],
    )


def right_marginal(probs: dict) -> tuple[float, float]:
    """Right-side outcome probabilities ``(P(d_r=+1), P(d_r=-1))``."""
    return (
        probs[(1, 1)] + probs[(-1, 1)],
        probs[(1, -1)] + probs[(-1, -1)],
    )


def covariance_analytic(state: PairPolarizationState, m_l, m_r) -> float:
    """Covariance ``<M_l M_r> - <M_l><M_r>`` of the two outcomes.

    For the singlet this equals ``-m_l . m_r`` for every setting pair.
    """
    probs = joint_probabilities(state, m_l, m_r)
    e_lr = sum(d_l * d_r * p for (d_l, d_r), p in probs.items())
    e_l = sum(d_l * p for (d_l, _), p in probs.items())
    e_r = sum(d_r * p for (_, d_r), p in probs.items())
    return float(e_lr - e_l * e_r)


def _cumulative(probs: dict) -> np.ndarray:
    cum = np.cumsum([probs[key] for key in OUTCOME_ORDER])
    return cum / cum[-1]


def _remote_after_left(
    state: PairPolarizationState, m_l: np.ndarray, d_l: int
) -> np.ndarray:
    """Right-photon ket after the left photon reduced to outcome ``d_l``."""
    left_ket = ket_from_bloch(d_l * np.asarray(m_l, dtype=float))
    v = left_ket.conj() @ state.amplitudes.reshape(2, 2)
    norm = float(np.linalg.norm(v))
    if norm < 1e-12:
        raise PairStateError(
            f"left outcome {d_l:+d} has zero probability; no remote state exists"
        )
    return v / norm


@dataclass(frozen=True)
class JointOutcome:
    """One pair event: both outcomes plus the remote state record.

    ``remote_state`` is the right photon's pure ket immediately after
    the left reduction, before the right photon meets its analyzer.
    """

    d_l: int
    d_r: int
    remote_state: np.ndarray
    seed: int


def sample_pair_event(
    state: PairPolarizationState, m_l, m_r, seed: int
) -> JointOutcome:
    """Draw one joint outcome and record the post-reduction remote state.

    The outcome pair comes from ``joint_probabilities`` via a single
    uniform variate of the stream keyed by ``seed``; the left photon is
    reduced first by convention (the statistics are order-independent).
    """
    m_l = as_bloch_vector(m_l, unit=True, name="left observable")
    m_r = as_bloch_vector(m_r, unit=True, name="right observable")
    cum = _cumulative(joint_probabilities(state, m_l, m_r))
    u = float(stream(int(seed)).random())
    idx = int(np.searchsorted(cum, u, side="right"))
    d_l, d_r = OUTCOME_ORDER[min(idx, 3)]
    return JointOutcome(
        d_l=d_l,
        d_r=d_r,
        remote_state=_remote_after_left(state, m_l, d_l),
        seed=int(seed),
    )


@dataclass(frozen=True)
class CorrelationResult:
    """Summary of N joint measurements at one setting pair.

    ``covariance`` is the mean outcome product ``mean(d_l * d_r)``. For
    the singlet both marginal means vanish analytically, so the product
    moment is the covariance estimator, and it is exactly +1 when every
    event matches; states with biased marginals need the analytic
    covariance for a mean-subtracted value. ``bound`` is the upper limit
    ``1/(N+1)`` on the probability of a mismatching alternative
    hypothesis, reported only when all N events matched (``d_l == d_r``),
    else None.
    """

    m_l: np.ndarray
    m_r: np.ndarray
    n_events: int
    covariance: float
    stderr: float
    match_count: int
    mismatch_count: int
    bound: float | None


def pair_outcomes(
    state: PairPolarizationState, m_l, m_r, n_events: int, seed: int, stream_id: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Outcome arrays ``(d_l, d_r)`` for ``n_events`` pair measurements.

    Event ``k`` consumes variate ``k`` of stream ``(seed, stream_id)``,
    so repeated calls with the same arguments reproduce the events
    bit for bit; ``correlation_experiment`` summarizes this exact
    sequence.
    """
    if n_events < 1:
        raise PairStateError(f"n_events must be >= 1, got {n_events}")
    m_l = as_bloch_vector(m_l, unit=True, name="left observable")
    m_r = as_bloch_vector(m_r, unit=True, name="right observable")
    cum = _cumulative(joint_probabilities(state, m_l, m_r))
    u = stream(int(seed), stream_id).random(n_events)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), 3)
    table = np.asarray(OUTCOME_ORDER, dtype=np.int8)
    return table[idx, 0], table[idx, 1]


def correlation_experiment(
    state: PairPolarizationState, m_l, m_r, n_events: int, seed: int, stream_id: int = 0
) -> CorrelationResult:
    """Run ``n_events`` pair measurements at a fixed setting pair.

    The events come from ``pair_outcomes`` with the same arguments; the
    optional stream id lets a multi-setting experiment give each
    setting an independent substream of one master seed.
    """
    m_l = as_bloch_vector(m_l, unit=True, name="left observable")
    m_r = as_bloch_vector(m_r, unit=True, name="right observable")
    d_l, d_r = pair_outcomes(state, m_l, m_r, n_events, seed, stream_id)
    prod = d_l.astype(np.float64) * d_r.astype(np.float64)
    covariance = float(prod.mean())
    stderr = float(np.sqrt(max(0.0, 1.0 - covariance**2) / n_events))
    match_count = int(np.count_nonzero(d_l == d_r))
    mismatch_count = n_events - match_count
    return CorrelationResult(
        m_l=m_l,
        m_r=m_r,
        n_events=n_events,
        covariance=covariance,
        stderr=stderr,
        match_count=match_count,
        mismatch_count=mismatch_count,
        bound=1.0 / (n_events + 1) if mismatch_count == 0 else None,
    )


def required_events(p: float) -> int:
    """Events needed to probe an alternative down to probability ``p``.

    Implements the budget ``ceil(6/p - 1)`` for a full program of three
    complementary setting pairs plus their cross checks; e.g. 59 events
    for ``p = 0.1``. A tiny slack keeps exact integer targets from being
    pushed up by floating-point division.
    """
    if not (0.0 < p < 1.0):
        raise PairStateError(f"probability must lie in (0, 1), got {p!r}")
    return ceil(6.0 / p - 1.0 - 1e-9)


@dataclass(frozen=True)
class ChshTerm:
    """One covariance term of the CHSH sum."""

    label: str
    sign: int
    result: CorrelationResult
    analytic: float


@dataclass(frozen=True)
class ChshResult:
    """CHSH statistic with its Monte Carlo standard error."""

    s_value: float
    stderr: float
    terms: tuple[ChshTerm, ...]

    @property
    def analytic_s(self) -> float:
        return float(sum(t.sign * t.analytic for t in self.terms))


def chsh_experiment(
    a, a_prime, b, b_prime, n_per_setting: int, seed: int
) -> ChshResult:
    """Estimate ``S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`` on the singlet.

    Each of the four setting pairs runs ``n_per_setting`` events on its
    own substream of ``seed``. Quantum mechanics allows |S| up to
    ``2 sqrt(2)``; every local deterministic assignment stays at 2 (see
    ``local_deterministic_chsh_max``).
    """
    state = singlet_state([0.0, 0.0, 1.0])
    plan = (
        ("ab", a, b, 1),
        ("ab'", a, b_prime, -1),
        ("a'b", a_prime, b, 1),
        ("a'b'", a_prime, b_prime, 1),
    )
    terms = []
    for stream_id, (label, m_l, m_r, sign) in enumerate(plan):
        result = correlation_experiment(
            state, m_l, m_r, n_per_setting, seed, stream_id=stream_id
        )
        terms.append(
            ChshTerm(
                label=label,
                sign=sign,
                result=result,
                analytic=covariance_analytic(state, m_l, m_r),
            )
        )
    s_value = float(sum(t.sign * t.result.covariance for t in terms))
    stderr = float(np.sqrt(sum(t.result.stderr**2 for t in terms)))
    return ChshResult(s_value=s_value, stderr=stderr, terms=tuple(terms))


def local_deterministic_chsh_max() -> float:
    """Largest |S| over all 16 deterministic local assignments.

    A shared hidden variable that fixes outcomes A(a), A(a'), B(b),
    B(b') in {-1, +1} can only reach |S| = 2; this enumerates every
    assignment and returns the exact maximum.
    """
    best = 0
    for aa, ap, bb, bp in product((-1, 1), repeat=4):
        s = aa * bb - aa * bp + ap * bb + ap * bp
        best = max(best, abs(s))
    return float(best)
