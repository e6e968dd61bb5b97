"""Polarization states, observables, and analyzer reduction maps.

Conventions used everywhere in the package:

* Basis order: index 0 is the horizontal state ``|0>``, index 1 the
  vertical state ``|1>``. A measurement along direction ``m`` reports
  ``+1`` (vertical counter) or ``-1`` (horizontal counter).
* A direction is a real 3-vector ``n``; pure states require
  ``|n| = 1``, mixed states allow ``|n| <= 1``. The parametrization is
  ``n = (sin t cos p, sin t sin p, cos t)``.
* With this basis order the Pauli matrices are ``SIGMA_1 = [[0,1],[1,0]]``,
  ``SIGMA_2 = [[0,-i],[i,0]]``, ``SIGMA_3 = [[-1,0],[0,1]]``, so that
  ``SIGMA_3 |1> = +|1>`` and the ``+1`` eigenvector of ``n . sigma`` is
  the state polarized along ``n``. Reordering the basis flips the
  triple's orientation; the commutator identity here reads
  ``[M(m), M(n)] = 2i M(n x m)``.

States never get silently normalized: feeding a non-unit direction
where a unit one is required raises, with a 1e-9 tolerance on the
length check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlochVectorError, ObservableError, StateError

UNIT_TOL = 1e-9

SIGMA_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_3 = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)
IDENTITY_2 = np.eye(2, dtype=complex)

#: Axis unit vectors, convenient for plans and configs.
X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def as_bloch_vector(v, *, unit: bool = False, name: str = "vector") -> np.ndarray:
    """Validate ``v`` as a Bloch vector and return it as a float array.

    Args:
        v: Sequence of three real numbers.
        unit: Require ``|v| = 1`` (within 1e-9) instead of ``|v| <= 1``.
        name: Label used in error messages.

    Raises:
        BlochVectorError: Wrong shape, non-finite entries, or a length
            violating the requested constraint. Never normalizes.
    """
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise BlochVectorError(f"{name} must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BlochVectorError(f"{name} has non-finite entries: {arr}")
    length = float(np.linalg.norm(arr))
    if unit:
        if abs(length - 1.0) > UNIT_TOL:
            raise BlochVectorError(
                f"{name} must be a unit vector, got length {length!r}"
            )
    elif length > 1.0 + UNIT_TOL:
        raise BlochVectorError(
            f"{name} must have length <= 1 for a physical state, got {length!r}"
        )
    return arr


def ket_from_bloch(n) -> np.ndarray:
    """Pure state ``|n>`` as a 2-component ket ``(a_0, a_1)``.

    Uses ``a_1 = cos(t/2)``, ``a_0 = e^{-ip} sin(t/2)`` with
    ``t = arccos(n_z)``, ``p = atan2(n_y, n_x)``, which makes the ket
    the ``+1`` eigenvector of ``observable_matrix(n)``.
    """
    n = as_bloch_vector(n, unit=True, name="state direction")
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array(
        [np.exp(-1.0j * phi) * np.sin(theta / 2.0), np.cos(theta / 2.0)],
        dtype=complex,
    )


def density_from_bloch(n) -> np.ndarray:
    """Density matrix ``(I + n . sigma) / 2`` for ``|n| <= 1``."""
    n = as_bloch_vector(n, name="state direction")
    rho = 0.5 * (IDENTITY_2 + n[0] * SIGMA_1 + n[1] * SIGMA_2 + n[2] * SIGMA_3)
    return rho


def bloch_from_ket(ket) -> np.ndarray:
    """Direction ``<psi| sigma |psi>`` of a normalized ket."""
    ket = _as_ket(ket)
    return np.array(
        [float(np.real(np.vdot(ket, s @ ket))) for s in PAULI], dtype=float
    )


def bloch_from_density(rho) -> np.ndarray:
    """Direction ``Tr(rho sigma)`` of a density matrix."""
    rho = _as_density(rho)
    return np.array([float(np.real(np.trace(rho @ s))) for s in PAULI], dtype=float)


def observable_matrix(m) -> np.ndarray:
    """Polarization observable ``m . sigma`` for a unit direction ``m``.

    Eigenvalues are always ``+1`` (transmitted to the vertical counter)
    and ``-1`` (horizontal counter).
    """
    try:
        m = as_bloch_vector(m, unit=True, name="observable direction")
    except BlochVectorError as exc:
        raise ObservableError(str(exc)) from exc
    return m[0] * SIGMA_1 + m[1] * SIGMA_2 + m[2] * SIGMA_3


def pauli_commutator(m, n) -> np.ndarray:
    """Commutator ``[M(m), M(n)]``; equals ``2i M(n x m)`` here."""
    a = observable_matrix(m)
    b = observable_matrix(n)
    return a @ b - b @ a


def born_probabilities(n, m) -> tuple[float, float]:
    """Counter probabilities ``(p_vertical, p_horizontal)``.

    For a state with direction ``n`` (``|n| <= 1``) measured along the
    unit direction ``m``: ``p_v = (1 + n.m)/2``, ``p_h = (1 - n.m)/2``.
    """
    n = as_bloch_vector(n, name="state direction")
    try:
        m = as_bloch_vector(m, unit=True, name="observable direction")
    except BlochVectorError as exc:
        raise ObservableError(str(exc)) from exc
    p_v = 0.5 * (1.0 + float(np.dot(n, m)))
    p_v = float(np.clip(p_v, 0.0, 1.0))
    return p_v, 1.0 - p_v


def pre_analyzer_state(n, m) -> np.ndarray:
    """Pure state ``|n>`` rewritten in the analyzer eigenbasis of ``m``.

    Returns the ket ``s |0> + c |1>`` with ``c = sqrt((1 + n.m)/2)``,
    ``s = sqrt((1 - n.m)/2)``: the superposition of the two analyzer
    output channels that the photon occupies just before detection.
    """
    n = as_bloch_vector(n, unit=True, name="state direction")
    try:
        m = as_bloch_vector(m, unit=True, name="observable direction")
    except BlochVectorError as exc:
        raise ObservableError(str(exc)) from exc
    c, s = _analyzer_amplitudes(n, m)
    return np.array([s, c], dtype=complex)


@dataclass(frozen=True)
class ReductionPair:
    """The two conditional analyzer maps for one ``(n, m)`` pair.

    ``u_vertical`` rotates the pre-analyzer superposition onto ``|1>``
    (applied when the vertical counter fires), ``u_horizontal`` onto
    ``|0>``. Both are unitary for every non-degenerate input and they
    never mix in the outcome the counter excluded.
    """

    u_vertical: np.ndarray
    u_horizontal: np.ndarray


def reduction_unitaries(n, m) -> ReductionPair:
    """Conditional reduction unitaries for state ``n`` measured along ``m``.

    With ``c = sqrt((1 + n.m)/2)`` and ``s = sqrt((1 - n.m)/2)``:

    * ``u_vertical   = [[c, -s], [s, c]]`` maps ``(s, c) -> (0, 1)``,
    * ``u_horizontal = [[s, c], [-c, s]]`` maps ``(s, c) -> (1, 0)``.
    """
    n = as_bloch_vector(n, unit=True, name="state direction")
    try:
        m = as_bloch_vector(m, unit=True, name="observable direction")
    except BlochVectorError as exc:
        raise ObservableError(str(exc)) from exc
    c, s = _analyzer_amplitudes(n, m)
    u_v = np.array([[c, -s], [s, c]], dtype=complex)
    u_h = np.array([[s, c], [-c, s]], dtype=complex)
    return ReductionPair(u_vertical=u_v, u_horizontal=u_h)


def purity(rho) -> float:
    """``Tr(rho^2)``; 1 for pure states, 1/2 for the fully mixed state."""
    rho = _as_density(rho)
    return float(np.real(np.trace(rho @ rho)))


def equal_up_to_phase(ket_a, ket_b, tol: float = 1e-12) -> bool:
    """True when two normalized kets differ only by a global phase."""
    a = _as_ket(ket_a)
    b = _as_ket(ket_b)
    return bool(abs(abs(np.vdot(a, b)) - 1.0) <= tol)


def _analyzer_amplitudes(n: np.ndarray, m: np.ndarray) -> tuple[float, float]:
    dot = float(np.clip(np.dot(n, m), -1.0, 1.0))
    c = float(np.sqrt(0.5 * (1.0 + dot)))
    s = float(np.sqrt(0.5 * (1.0 - dot)))
    return c, s


def _as_ket(ket) -> np.ndarray:
    arr = np.asarray(ket, dtype=complex)
    if arr.shape != (2,):
        raise StateError(f"ket must have shape (2,), got {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > UNIT_TOL:
        raise StateError(f"ket must be normalized, got norm {norm!r}")
    return arr


def _as_density(rho) -> np.ndarray:
    arr = np.asarray(rho, dtype=complex)
    if arr.shape != (2, 2):
        raise StateError(f"density matrix must have shape (2, 2), got {arr.shape}")
    if abs(np.trace(arr) - 1.0) > 1e-9:
        raise StateError(f"density matrix must have unit trace, got {np.trace(arr)!r}")
    if not np.allclose(arr, arr.conj().T, atol=1e-9):
        raise StateError("density matrix must be hermitian")
    return arr
