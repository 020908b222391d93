"""Density matrix embedding with variational fragment solvers on a simulated register."""

from .driver import (
    DmetConfig,
    DmetContext,
    DmetResult,
    FcidumpSystem,
    HChainSystem,
    SolverFailure,
    SolverOptions,
    build_context,
    electron_residual,
    run_dmet,
    run_scan,
)
from .embedding import ActiveSpace, FragmentScheme
from .fci import fci_ground_state
from .hamiltonian import MolecularHamiltonian

__version__ = "0.1.0"

__all__ = [
    "ActiveSpace",
    "DmetConfig",
    "DmetContext",
    "DmetResult",
    "FcidumpSystem",
    "FragmentScheme",
    "HChainSystem",
    "MolecularHamiltonian",
    "SolverFailure",
    "SolverOptions",
    "build_context",
    "electron_residual",
    "fci_ground_state",
    "run_dmet",
    "run_scan",
]
