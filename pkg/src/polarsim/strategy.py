"""Measurement strategies: scheduled (state, observable) pairs and statistics.

A strategy is the Measurer's pre-committed schedule: for event ``k`` the
photon is prepared along ``n_k`` and measured along ``m_k``. Running a
strategy yields the outcome sequence ``d_k`` in {-1, +1} (equivalently
bits ``b_k = (d_k + 1) / 2``), and the estimators here reproduce what
the Measurer can learn from it: outcome frequencies with their
binomial error bars, mean values for a repeated observable, average
density matrices, and per-observable subsequence statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PlanError
from .qstate import UNIT_TOL, density_from_bloch
from .rng import stream


def _direction_rows(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise PlanError(f"{name} must have shape (K, 3), got {arr.shape}")
    if arr.shape[0] < 1:
        raise PlanError(f"{name} needs at least one row")
    if not np.all(np.isfinite(arr)):
        raise PlanError(f"{name} has non-finite entries")
    lengths = np.linalg.norm(arr, axis=1)
    bad = np.nonzero(np.abs(lengths - 1.0) > UNIT_TOL)[0]
    if bad.size:
        k = int(bad[0])
        raise PlanError(
            f"{name}[{k}] must be a unit vector, got length {lengths[k]!r}"
        )
    return arr


@dataclass(frozen=True)
class StrategyPlan:
    """Immutable schedule of preparation and observable directions.

    ``states[k]`` and ``observables[k]`` are the unit Bloch vectors of
    event ``k``. Both arrays have shape (K, 3) with K >= 1.
    """

    states: np.ndarray
    observables: np.ndarray

    def __post_init__(self):
        states = _direction_rows(self.states, "states")
        observables = _direction_rows(self.observables, "observables")
        if states.shape != observables.shape:
            raise PlanError(
                "states and observables must pair up one to one, got shapes "
                f"{states.shape} and {observables.shape}"
            )
        for name, arr in (("states", states), ("observables", observables)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.states.shape[0]


def cycle_plan(length: int, states, observables) -> StrategyPlan:
    """Plan of ``length`` events cycling through the given direction lists.

    Event ``k`` uses ``states[k % len(states)]`` and
    ``observables[k % len(observables)]``. Every named strategy is an
    instance: one state and one observable repeats a single pair;
    several states with one observable simulates a mixed state; one
    state with several observables alternates measurements; and
    independent cycles schedule both at once.
    """
    if length < 1:
        raise PlanError(f"plan length must be >= 1, got {length}")
    state_rows = _direction_rows(states, "states")
    obs_rows = _direction_rows(observables, "observables")
    idx = np.arange(length)
    return StrategyPlan(
        states=state_rows[idx % state_rows.shape[0]],
        observables=obs_rows[idx % obs_rows.shape[0]],
    )


@dataclass(frozen=True)
class OutcomeSequence:
    """Results of one strategy run: ``d[k]`` in {-1, +1} plus the seed."""

    d: np.ndarray
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.d, dtype=np.int8)
        if arr.ndim != 1 or arr.size < 1:
            raise PlanError(f"outcomes must be a non-empty 1-d array, got {arr.shape}")
        if not np.all(np.abs(arr) == 1):
            raise PlanError("outcomes must contain only -1 and +1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)

    def __len__(self) -> int:
        return self.d.size

    @property
    def bits(self) -> np.ndarray:
        """Bit view ``b = (d + 1) / 2`` as uint8."""
        return ((self.d + 1) // 2).astype(np.uint8)


@dataclass(frozen=True)
class FrequencyEstimate:
    """Observed frequency with its binomial standard error.

    ``stderr = sqrt(nu * (1 - nu) / count)``, the one-sigma width of
    the estimate; the underlying probability lies within a few stderr
    of ``nu`` with the usual normal coverage.
    """

    nu: float
    stderr: float
    count: int


def predicted_probabilities(plan: StrategyPlan) -> np.ndarray:
    """Per-event probability of outcome +1: ``(1 + n_k . m_k) / 2``."""
    dots = np.einsum("kj,kj->k", plan.states, plan.observables)
    return np.clip(0.5 * (1.0 + dots), 0.0, 1.0)


def run_strategy(plan: StrategyPlan, seed: int) -> OutcomeSequence:
    """Execute every event of the plan with a deterministic generator.

    Event ``k`` consumes variate ``k`` of the counter-based stream keyed
    by ``seed``, so the sequence is reproducible and independent of
    batching: a parallel runner that jumps the stream to position ``k``
    gets bit-identical results.
    """
    probs = predicted_probabilities(plan)
    u = stream(seed).random(len(plan))
    d = np.where(u < probs, 1, -1).astype(np.int8)
    return OutcomeSequence(d=d, seed=seed)


def frequency_estimate(outcomes: OutcomeSequence, value: int = 1) -> FrequencyEstimate:
    """Frequency of ``value`` (+1 or -1) among the outcomes."""
    if value not in (1, -1):
        raise PlanError(f"value must be +1 or -1, got {value!r}")
    count = len(outcomes)
    nu = float(np.count_nonzero(outcomes.d == value)) / count
    return FrequencyEstimate(
        nu=nu, stderr=float(np.sqrt(nu * (1.0 - nu) / count)), count=count
    )


def mean_observable(plan: StrategyPlan) -> float:
    """Mean value ``(1/K) sum_k n_k . m`` for a single-observable plan.

    Equals ``Tr(rho_avg M(m))`` with ``rho_avg`` the average density of
    the plan's states. Raises when the plan schedules more than one
    observable direction.
    """
    m = plan.observables[0]
    if np.max(np.abs(plan.observables - m)) > UNIT_TOL:
        raise PlanError(
            "mean_observable needs a single observable direction; "
            "this plan schedules several (partition the events instead)"
        )
    return float(np.mean(plan.states @ m))


def average_density(plan: StrategyPlan, selector=None) -> np.ndarray:
    """Arithmetic mean of the scheduled state densities.

    With ``selector=None`` all events contribute. A 3-vector selector
    restricts to events whose observable matches it componentwise to
    1e-9; an empty selection raises.
    """
    if selector is None:
        chosen = plan.states
    else:
        sel = np.asarray(selector, dtype=float)
        if sel.shape != (3,):
            raise PlanError(f"selector must be a 3-vector, got shape {sel.shape}")
        mask = np.all(np.abs(plan.observables - sel) <= UNIT_TOL, axis=1)
        if not np.any(mask):
            raise PlanError(f"no plan events use observable direction {sel.tolist()}")
        chosen = plan.states[mask]
    return density_from_bloch(chosen.mean(axis=0))


@dataclass(frozen=True)
class ObservableGroup:
    """Statistics of the events sharing one observable direction."""

    direction: np.ndarray
    indices: np.ndarray
    frequency: FrequencyEstimate
    average_state: np.ndarray
    predicted_frequency: float


@dataclass(frozen=True)
class SubsequenceStats:
    """Partition of a run by observable direction, in first-use order."""

    groups: tuple[ObservableGroup, ...]


def partition_by_observable(
    plan: StrategyPlan, outcomes: OutcomeSequence
) -> SubsequenceStats:
    """Group events by observable direction and estimate each group.

    Directions match when every component agrees to 1e-9; plans are
    authored, so directions are exact by construction. The groups cover
    all events exactly once.
    """
    if len(plan) != len(outcomes):
        raise PlanError(
            f"plan has {len(plan)} events but outcomes have {len(outcomes)}"
        )
    reps: list[np.ndarray] = []
    members: list[list[int]] = []
    for k in range(len(plan)):
        row = plan.observables[k]
        for g, rep in enumerate(reps):
            if np.max(np.abs(row - rep)) <= UNIT_TOL:
                members[g].append(k)
                break
        else:
            reps.append(row)
            members.append([k])
    probs = predicted_probabilities(plan)
    groups = []
    for rep, idx_list in zip(reps, members):
        idx = np.asarray(idx_list, dtype=np.int64)
        d = outcomes.d[idx]
        nu = float(np.count_nonzero(d == 1)) / idx.size
        est = FrequencyEstimate(
            nu=nu, stderr=float(np.sqrt(nu * (1.0 - nu) / idx.size)), count=idx.size
        )
        groups.append(
            ObservableGroup(
                direction=rep.copy(),
                indices=idx,
                frequency=est,
                average_state=density_from_bloch(plan.states[idx].mean(axis=0)),
                predicted_frequency=float(np.mean(probs[idx])),
            )
        )
    return SubsequenceStats(groups=tuple(groups))
