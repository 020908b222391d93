"""Fermion-to-qubit mapping, Pauli algebra and exact statevector simulation."""

from .fermion import FermionOperator, anticommutator, commutator
from .pauli import PauliSum, jordan_wigner, multiply_strings, string_weight
from .resources import ResourceEstimate, count_resources, cnot_count
from .simulator import (
    CompiledGenerator,
    ContractViolation,
    apply_exponential,
    basis_state,
    expectation,
    fermion_sparse,
    hamiltonian_sparse,
    hf_occupation,
    measure_rdms,
    sector_indices,
)

__all__ = [
    "CompiledGenerator",
    "ContractViolation",
    "FermionOperator",
    "PauliSum",
    "ResourceEstimate",
    "anticommutator",
    "apply_exponential",
    "basis_state",
    "cnot_count",
    "commutator",
    "count_resources",
    "expectation",
    "fermion_sparse",
    "hamiltonian_sparse",
    "hf_occupation",
    "jordan_wigner",
    "measure_rdms",
    "multiply_strings",
    "sector_indices",
    "string_weight",
]
