"""Scalar-mode simulation of the Coulomb phase between superposed charges."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    DomainError,
    GhostFieldError,
    MatrixOverflowError,
    TruncationError,
)
from .units import Configuration, Coupling, UnitSystem, NATURAL  # noqa: E402
from .quadrature import QuadratureSpec, PhaseResult, coulomb_phase, analytic_phase  # noqa: E402
from .interference import (  # noqa: E402
    BranchPhaseMatrix,
    ChargeObservableResult,
    branch_phase_matrix,
    entanglement_witness,
    heisenberg_CA_expectation,
    relative_phase,
    tomography_without_closing,
)

__all__ = [
    "__version__",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "GhostFieldError",
    "MatrixOverflowError",
    "TruncationError",
    "Configuration",
    "Coupling",
    "UnitSystem",
    "NATURAL",
    "QuadratureSpec",
    "PhaseResult",
    "coulomb_phase",
    "analytic_phase",
    "BranchPhaseMatrix",
    "ChargeObservableResult",
    "branch_phase_matrix",
    "entanglement_witness",
    "heisenberg_CA_expectation",
    "relative_phase",
    "tomography_without_closing",
]
