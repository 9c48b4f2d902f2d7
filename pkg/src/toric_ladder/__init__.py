"""Simulation toolkit for spinon interferometry on the toric ladder."""
from .calibration import (
    GammaFitReport,
    ThresholdUnreachable,
    TrotterErrorReport,
    find_optimal_trotter_steps,
    fit_gamma,
    trotter_error,
)
from .circuits import (
    QuenchSpec,
    VisonConfig,
    prep_circuit,
    quench,
    star_exponential_circuit,
    trotter_circuit,
)
from .core import Gate, apply_gate, estimate_star_expectations, expectation, sample_z_basis
from .dynamics import build_hamiltonian, evolve_exact, evolve_sampled, evolve_trotter
from .lattice import LadderModel, PauliString, build_ladder, commutes, multiply, to_matrix
from .lindblad import (
    BathSpec,
    MixedInit,
    build_superoperator,
    evolve_lindblad,
    evolve_superoperator,
    lindblad_rhs,
    mixed_initial_state,
)
from .series import ObservableSeries

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "GammaFitReport",
    "Gate",
    "LadderModel",
    "MixedInit",
    "ObservableSeries",
    "PauliString",
    "QuenchSpec",
    "ThresholdUnreachable",
    "TrotterErrorReport",
    "VisonConfig",
    "apply_gate",
    "build_hamiltonian",
    "build_ladder",
    "build_superoperator",
    "commutes",
    "estimate_star_expectations",
    "evolve_exact",
    "evolve_lindblad",
    "evolve_sampled",
    "evolve_superoperator",
    "evolve_trotter",
    "expectation",
    "find_optimal_trotter_steps",
    "fit_gamma",
    "lindblad_rhs",
    "mixed_initial_state",
    "multiply",
    "prep_circuit",
    "quench",
    "sample_z_basis",
    "star_exponential_circuit",
    "to_matrix",
    "trotter_circuit",
    "trotter_error",
]
