"""Gate-count bookkeeping under a fixed CNOT-staircase convention."""

from __future__ import annotations

from dataclasses import dataclass

from .pauli import PauliSum, jordan_wigner, string_weight


@dataclass(frozen=True)
class ResourceEstimate:
    n_parameters: int
    n_cnot: int

    def __post_init__(self):
        if self.n_parameters < 0 or self.n_cnot < 0:
            raise ValueError("resource counts must be non-negative")


def cnot_count(op: PauliSum) -> int:
    """CNOTs for ``exp`` of every string in ``op``: ``2 (w - 1)`` each, none below weight 2."""
    return sum(2 * (string_weight(s) - 1) for s in op.terms if string_weight(s) > 1)


def count_resources(program, n_spin_orbitals: int) -> ResourceEstimate:
    """Count parameters and CNOTs of an ansatz program.

    ``program`` needs ``n_parameters`` and ``generators()``, the latter yielding
    the fermionic anti-Hermitian generator of every exponential factor.
    """
    n_cnot = sum(cnot_count(jordan_wigner(g, n_spin_orbitals)) for g in program.generators())
    return ResourceEstimate(program.n_parameters, n_cnot)
