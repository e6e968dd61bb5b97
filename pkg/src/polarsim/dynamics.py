"""Joint photon+detector evolution and the stochastic reduction sampler.

The measurement device is a finite D-level system coupled to the photon
through a pulsed interaction that is diagonal in the analyzer basis:

    H(t) = H_det (x) I_2  +  I_D (x) H_ph  +  g(t) * J (x) SIGMA_3

with ``g(t) = g0`` inside the window ``[t_on, t_off]`` and zero outside.
Because every term commutes with ``I_D (x) SIGMA_3``, the populations of
the two photon channels are conserved; what the interaction destroys
(and, for a finite detector, periodically revives) is the coherence
between the channels. ``decompose`` exposes exactly that split.

Propagation is exact: within each constant-``g`` segment the propagator
comes from an eigendecomposition, so trace and spectrum are preserved
to machine precision rather than to an integrator tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError, StateError
from .qstate import (
    SIGMA_3,
    born_probabilities,
    pre_analyzer_state,
    reduction_unitaries,
)
from .rng import stream

_HERMITIAN_TOL = 1e-10
_ABSENT_TOL = 1e-12


def _check_hermitian(mat: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ModelError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} has non-finite entries")
    if np.max(np.abs(arr - arr.conj().T)) > _HERMITIAN_TOL:
        raise ModelError(f"{name} must be hermitian to {_HERMITIAN_TOL}")
    return arr


def _check_density(mat: np.ndarray, name: str) -> np.ndarray:
    arr = _check_hermitian(mat, name)
    if abs(np.trace(arr).real - 1.0) > 1e-9 or abs(np.trace(arr).imag) > 1e-9:
        raise ModelError(f"{name} must have unit trace, got {np.trace(arr)!r}")
    if np.min(np.linalg.eigvalsh(arr)) < -1e-9:
        raise ModelError(f"{name} must be positive semidefinite")
    return arr


@dataclass(frozen=True)
class DetectorModel:
    """A D-level detector, its photon coupling, and the pulse window.

    Attributes:
        h_detector: D x D hermitian free Hamiltonian of the detector.
        coupling: D x D hermitian operator the photon channel couples to.
        g0: Pulse amplitude; the interaction is ``g0 * coupling (x) SIGMA_3``
            while ``t_on <= t <= t_off`` and absent otherwise.
        t_on: Pulse start time.
        t_off: Pulse end time; must exceed ``t_on``.
        rho_detector: Initial detector density matrix.
        h_photon: 2 x 2 hermitian free Hamiltonian of the photon, diagonal
            in the analyzer basis (defaults to zero).
    """

    h_detector: np.ndarray
    coupling: np.ndarray
    g0: float
    t_on: float
    t_off: float
    rho_detector: np.ndarray
    h_photon: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        h_det = _check_hermitian(self.h_detector, "h_detector")
        coup = _check_hermitian(self.coupling, "coupling")
        rho = _check_density(self.rho_detector, "rho_detector")
        h_ph = _check_hermitian(self.h_photon, "h_photon")
        if h_ph.shape != (2, 2):
            raise ModelError(f"h_photon must be 2x2, got shape {h_ph.shape}")
        if np.max(np.abs(h_ph - np.diag(np.diag(h_ph)))) > _HERMITIAN_TOL:
            raise ModelError("h_photon must be diagonal in the analyzer basis")
        dim = h_det.shape[0]
        if dim < 2:
            raise ModelError(f"detector dimension must be >= 2, got {dim}")
        if coup.shape != (dim, dim) or rho.shape != (dim, dim):
            raise ModelError(
                "h_detector, coupling, and rho_detector must share one dimension"
            )
        if not np.isfinite(self.g0):
            raise ModelError(f"g0 must be finite, got {self.g0!r}")
        if not (self.t_on < self.t_off):
            raise ModelError(
                f"pulse window needs t_on < t_off, got [{self.t_on}, {self.t_off}]"
            )
        for name, arr in (
            ("h_detector", h_det),
            ("coupling", coup),
            ("rho_detector", rho),
            ("h_photon", h_ph),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dimension(self) -> int:
        return self.h_detector.shape[0]

    @classmethod
    def ladder(
        cls,
        dimension: int,
        omega: float,
        g0: float,
        t_on: float,
        t_off: float,
        detector_init: str = "ground",
    ) -> "DetectorModel":
        """Standard model: equally spaced levels with hopping coupling.

        ``h_detector = omega * diag(0, 1, ..., D-1)`` and ``coupling`` has
        ones on the two off-diagonals, so the coupling never commutes
        with the free detector Hamiltonian. ``detector_init`` selects the
        initial state: ``"ground"`` or ``"maximally_mixed"``.
        """
        if dimension < 2:
            raise ModelError(f"detector dimension must be >= 2, got {dimension}")
        h_det = omega * np.diag(np.arange(dimension, dtype=float)).astype(complex)
        coup = (
            np.diag(np.ones(dimension - 1), 1) + np.diag(np.ones(dimension - 1), -1)
        ).astype(complex)
        if detector_init == "ground":
            rho = np.zeros((dimension, dimension), dtype=complex)
            rho[0, 0] = 1.0
        elif detector_init == "maximally_mixed":
            rho = np.eye(dimension, dtype=complex) / dimension
        else:
            raise ModelError(
                "detector_init must be 'ground' or 'maximally_mixed', "
                f"got {detector_init!r}"
            )
        return cls(
            h_detector=h_det,
            coupling=coup,
            g0=g0,
            t_on=t_on,
            t_off=t_off,
            rho_detector=rho,
        )


def build_joint_initial(model: DetectorModel, photon) -> np.ndarray:
    """Product state ``rho_detector (x) |photon><photon|`` as a 2D x 2D matrix.

    Basis order is lexicographic detector (x) photon: index ``2*i + a``
    holds detector level ``i`` and photon channel ``a``.
    """
    ket = np.asarray(photon, dtype=complex)
    if ket.shape != (2,):
        raise StateError(f"photon ket must have shape (2,), got {ket.shape}")
    if abs(np.linalg.norm(ket) - 1.0) > 1e-9:
        raise StateError(f"photon ket must be normalized, got {np.linalg.norm(ket)!r}")
    return np.kron(model.rho_detector, np.outer(ket, ket.conj()))


class _Propagators:
    """Cached eigendecompositions of the pulse-on and pulse-off Hamiltonians."""

    def __init__(self, model: DetectorModel):
        dim = model.dimension
        h_free = np.kron(model.h_detector, np.eye(2)) + np.kron(
            np.eye(dim), model.h_photon
        )
        h_pulse = h_free + model.g0 * np.kron(model.coupling, SIGMA_3)
        self._eigs = {
            False: np.linalg.eigh(h_free),
            True: np.linalg.eigh(h_pulse),
        }
        self.t_on = model.t_on
        self.t_off = model.t_off

    def _segment(self, duration: float, pulsed: bool) -> np.ndarray:
        w, v = self._eigs[pulsed]
        return (v * np.exp(-1.0j * w * duration)) @ v.conj().T

    def at(self, t: float) -> np.ndarray:
        """Full propagator from time 0 to time ``t >= 0``."""
        if t < 0:
            raise ModelError(f"evolution time must be >= 0, got {t!r}")
        knots = [0.0]
        for edge in sorted((self.t_on, self.t_off)):
            if 0.0 < edge < t:
                knots.append(edge)
        knots.append(t)
        u = np.eye(len(self._eigs[False][0]), dtype=complex)
        for a, b in zip(knots[:-1], knots[1:]):
            mid = 0.5 * (a + b)
            u = self._segment(b - a, self.t_on <= mid <= self.t_off) @ u
        return u


def evolve(state: np.ndarray, model: DetectorModel, t: float) -> np.ndarray:
    """Evolve a joint density matrix from time 0 to time ``t``.

    The pulse window of ``model`` is anchored at absolute time, so the
    input plays the role of the ``t = 0`` state.
    """
    rho = np.asarray(state, dtype=complex)
    expect = 2 * model.dimension
    if rho.shape != (expect, expect):
        raise ModelError(
            f"joint state must have shape ({expect}, {expect}), got {rho.shape}"
        )
    u = _Propagators(model).at(float(t))
    out = u @ rho @ u.conj().T
    if not np.all(np.isfinite(out)):
        raise ModelError("evolution produced non-finite values")
    return out


@dataclass(frozen=True)
class BranchDecomposition:
    """Channel-resolved split of a joint density matrix.

    The joint state always has the block form

        p1 * rho1 (x) |1><1|  +  p0 * rho0 (x) |0><0|
        +  lam^dagger (x) |0><1|  +  lam (x) |1><0|

    where ``lam`` is the photon ``<1| . |0>`` block. ``rho1``/``rho0``
    are reported as None when the matching probability is below 1e-12.

    ``lambda_norm`` is the magnitude of the detector-traced coherence,
    ``|Tr lam|``: the visibility that interference between the two
    channels could still show after ignoring the detector. The Frobenius
    norm ``lambda_frobenius`` is also reported; unitary joint evolution
    keeps it constant, which is exactly why the traced quantity is the
    one that registers the loss and revival of coherence.
    """

    p1: float
    p0: float
    rho1: np.ndarray | None
    rho0: np.ndarray | None
    lam: np.ndarray
    lambda_norm: float
    lambda_frobenius: float

    def reassemble(self) -> np.ndarray:
        """Rebuild the joint density matrix from the blocks."""
        dim = self.lam.shape[0]
        block11 = self.p1 * self.rho1 if self.rho1 is not None else np.zeros((dim, dim))
        block00 = self.p0 * self.rho0 if self.rho0 is not None else np.zeros((dim, dim))
        out = np.zeros((2 * dim, 2 * dim), dtype=complex)
        four = out.reshape(dim, 2, dim, 2)
        four[:, 1, :, 1] = block11
        four[:, 0, :, 0] = block00
        four[:, 1, :, 0] = self.lam
        four[:, 0, :, 1] = self.lam.conj().T
        return out


def decompose(state: np.ndarray) -> BranchDecomposition:
    """Split a joint density matrix into channel blocks and coherence."""
    rho = np.asarray(state, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] % 2:
        raise ModelError(f"joint state must be 2D x 2D, got shape {rho.shape}")
    dim = rho.shape[0] // 2
    four = rho.reshape(dim, 2, dim, 2)
    block11 = four[:, 1, :, 1]
    block00 = four[:, 0, :, 0]
    lam = four[:, 1, :, 0]
    p1 = float(np.trace(block11).real)
    p0 = float(np.trace(block00).real)
    rho1 = block11 / p1 if p1 > _ABSENT_TOL else None
    rho0 = block00 / p0 if p0 > _ABSENT_TOL else None
    trace_lam = complex(np.trace(lam))
    return BranchDecomposition(
        p1=p1,
        p0=p0,
        rho1=rho1,
        rho0=rho0,
        lam=lam,
        lambda_norm=abs(trace_lam),
        lambda_frobenius=float(np.linalg.norm(lam)),
    )


def recurrence_scan(
    model: DetectorModel,
    photon,
    t_max: float,
    dt: float,
    threshold: float,
) -> list[float]:
    """Times where the coherence visibility revives above ``threshold``.

    Scans ``lambda_norm(t) / lambda_norm(0)`` on the grid ``0, dt, 2dt,
    ... <= t_max`` and records each upward crossing of ``threshold``
    that follows a drop below it. An empty list means the coherence
    never fell (or never came back within ``t_max``).
    """
    if dt <= 0:
        raise ModelError(f"dt must be positive, got {dt!r}")
    if t_max <= dt:
        raise ModelError(f"t_max must exceed dt, got t_max={t_max!r}, dt={dt!r}")
    if not (0.0 < threshold < 1.0):
        raise ModelError(f"threshold must lie in (0, 1), got {threshold!r}")
    initial = build_joint_initial(model, photon)
    base = decompose(initial).lambda_norm
    if base <= _ABSENT_TOL:
        raise ModelError(
            "initial coherence is zero (photon prepared in an analyzer eigenstate); "
            "nothing to scan"
        )
    props = _Propagators(model)
    revivals: list[float] = []
    below = False
    for t in np.arange(dt, t_max + 0.5 * dt, dt):
        u = props.at(float(t))
        ratio = decompose(u @ initial @ u.conj().T).lambda_norm / base
        if ratio < threshold:
            below = True
        elif below:
            revivals.append(float(t))
            below = False
    return revivals


@dataclass(frozen=True)
class EventOutcome:
    """One completed measurement event.

    ``outcome`` is +1 (vertical counter) or -1 (horizontal counter);
    ``post_photon`` is the photon ket after the matching reduction map,
    an analyzer eigenstate up to global phase. ``applied`` tags which
    map fired ('v' or 'h') and ``hidden_seed`` reproduces the event.
    """

    outcome: int
    post_photon: np.ndarray
    applied: str
    hidden_seed: int


def sample_event(n, m, hidden_seed: int) -> EventOutcome:
    """Measure state ``n`` along ``m``, resolved by the detector's hidden seed.

    The hidden parameters of the detector at the instant of measurement
    are modeled as a counter-based generator keyed by ``hidden_seed``:
    the same seed always selects the same counter, drawn with the
    vertical-channel probability ``(1 + n.m)/2``.
    """
    p_v, _ = born_probabilities(n, m)
    pair = reduction_unitaries(n, m)
    pre = pre_analyzer_state(n, m)
    u = float(stream(int(hidden_seed)).random())
    if u < p_v:
        return EventOutcome(
            outcome=1,
            post_photon=pair.u_vertical @ pre,
            applied="v",
            hidden_seed=int(hidden_seed),
        )
    return EventOutcome(
        outcome=-1,
        post_photon=pair.u_horizontal @ pre,
        applied="h",
        hidden_seed=int(hidden_seed),
    )
