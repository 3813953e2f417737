"""Mixed-state stabilizer simulator for measure-and-forget Clifford circuits.

The package tracks density matrices as stabilizer groups of rank r on n
qubits (entropy S = n - r bits), applies random two-qubit Clifford gates
in a brickwork pattern, and interleaves projective Z measurements whose
outcomes are recorded or deliberately discarded (complete dephasing).
Experiment drivers reproduce entropy sweeps, turning-point scaling,
phase diagrams, purification curves, and mutual-information probes, all
cross-checked against an exact dense density-matrix oracle at small n.
"""

from .clifford import CliffordGate2, GATE_COUNT, SYMPLECTIC_COUNT, all_gates, sample_uniform
from .dense import DenseState
from .engine import (
    CONVENTIONS,
    CircuitConfig,
    EnsembleResult,
    TrajectoryError,
    TrajectoryRecord,
    run_ensemble,
    run_trajectory,
)
from .experiments import (
    Curve,
    FitError,
    FitResult,
    Grid,
    NoTurningPointError,
    SweepSpec,
    find_turning_point,
    fit_critical,
    fit_power_law,
)
from .pauli import PauliString
from .stabilizer import (
    OutcomeSource,
    RandomOutcomes,
    ScriptedOutcomes,
    StabilizerState,
    new_maximally_mixed,
    new_pure_zero,
)

__version__ = "0.1.0"

__all__ = [
    "CONVENTIONS",
    "CircuitConfig",
    "CliffordGate2",
    "Curve",
    "DenseState",
    "EnsembleResult",
    "FitError",
    "FitResult",
    "GATE_COUNT",
    "Grid",
    "NoTurningPointError",
    "OutcomeSource",
    "PauliString",
    "RandomOutcomes",
    "SYMPLECTIC_COUNT",
    "ScriptedOutcomes",
    "StabilizerState",
    "SweepSpec",
    "TrajectoryError",
    "TrajectoryRecord",
    "all_gates",
    "find_turning_point",
    "fit_critical",
    "fit_power_law",
    "new_maximally_mixed",
    "new_pure_zero",
    "run_ensemble",
    "run_trajectory",
    "sample_uniform",
    "__version__",
]
