"""Polarization measurement simulator.

Single-photon measurement events with state reduction, pulsed
photon+detector dynamics with coherence revivals, scheduled measurement
strategies with their estimators, entangled-pair correlation and CHSH
experiments, and a sifting key-duplication protocol. Every experiment
is deterministic given its integer seed.
"""

from .config import (
    ExperimentConfig,
    KINDS,
    load_config,
    parse_config,
    parse_config_dict,
)
from .dynamics import (
    BranchDecomposition,
    DetectorModel,
    EventOutcome,
    build_joint_initial,
    decompose,
    evolve,
    recurrence_scan,
    sample_event,
)
from .epr import (
    ChshResult,
    ChshTerm,
    CorrelationResult,
    JointOutcome,
    OUTCOME_ORDER,
    PairPolarizationState,
    chsh_experiment,
    correlation_experiment,
    covariance_analytic,
    joint_probabilities,
    left_marginal,
    local_deterministic_chsh_max,
    pair_outcomes,
    pair_state,
    required_events,
    right_marginal,
    sample_pair_event,
    singlet_state,
)
from .errors import (
    BlochVectorError,
    ConfigError,
    ModelError,
    ObservableError,
    PairStateError,
    PlanError,
    PolarsimError,
    ProtocolError,
    StateError,
)
from .presets import PRESETS, get_preset, preset_names
from .qstate import (
    IDENTITY_2,
    PAULI,
    ReductionPair,
    SIGMA_1,
    SIGMA_2,
    SIGMA_3,
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    as_bloch_vector,
    bloch_from_density,
    bloch_from_ket,
    born_probabilities,
    density_from_bloch,
    equal_up_to_phase,
    ket_from_bloch,
    observable_matrix,
    pauli_commutator,
    pre_analyzer_state,
    purity,
    reduction_unitaries,
)
from .qkd import (
    BIT_CONVENTION,
    MeasurerAgent,
    NoiseModel,
    RoundRecord,
    SiftedKey,
    coordinated_agents,
    estimate_qber,
    key_hex,
    run_session,
    sift,
)
from .report import RunReport, run, to_jsonable
from .rng import stream
from .strategy import (
    FrequencyEstimate,
    ObservableGroup,
    OutcomeSequence,
    StrategyPlan,
    SubsequenceStats,
    average_density,
    cycle_plan,
    frequency_estimate,
    mean_observable,
    partition_by_observable,
    predicted_probabilities,
    run_strategy,
)

__version__ = "0.1.0"
