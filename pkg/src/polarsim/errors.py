"""Exception types shared across the package.

Every validation failure raises one of these instead of a bare
ValueError so callers (and the CLI) can distinguish bad physics input
from bad file input.
"""


class PolarsimError(Exception):
    """Base class for all package-specific errors."""


class BlochVectorError(PolarsimError):
    """A Bloch vector has the wrong shape, is non-finite, or is too long."""


class StateError(PolarsimError):
    """A ket or density matrix fails its defining constraints."""


class ObservableError(PolarsimError):
    """An observable direction is not a unit vector."""


class ModelError(PolarsimError):
    """A detector model or evolution request is inconsistent."""


class PlanError(PolarsimError):
    """A measurement plan is empty, ragged, or used with the wrong query."""


class PairStateError(PolarsimError):
    """A two-photon state fails normalization or construction checks."""


class ProtocolError(PolarsimError):
    """A key-distribution session is misconfigured or keys are misaligned."""


class ConfigError(PolarsimError):
    """An experiment config file or preset cannot be validated."""
