"""Symmetric (Loewdin) orthogonalization into atom-assigned local orbitals.

For a basis with a single s function per atom this is the same as meta-Loewdin,
since there is no core/valence split to treat separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrals import IntegralSet
from .scf import MeanFieldState, inverse_sqrt


@dataclass(frozen=True, eq=False)
class LocalizedBasis:
    """Orthonormal local orbitals ``phi_lo = phi_ao @ W``.

    Attributes:
        W: AO-to-LO coefficient matrix, ``W^T S W = 1``.
        atom_of_orbital: Atom index of each local orbital.
    """

    W: np.ndarray
    atom_of_orbital: tuple[int, ...]

    @property
    def n_orb(self) -> int:
        return self.W.shape[1]

    def orbitals_on(self, atoms) -> list[int]:
        atoms = set(atoms)
        return [p for p, a in enumerate(self.atom_of_orbital) if a in atoms]


def lowdin_localize(ints: IntegralSet, mf: MeanFieldState) -> tuple[LocalizedBasis, np.ndarray]:
    """Return the Loewdin basis and the mean-field density expressed in it.

    The AO density ``P`` maps to ``D_lo = W^{-1} P W^{-T} = S^{1/2} P S^{1/2}``.

    Raises:
        IllConditionedBasisError: if the smallest overlap eigenvalue is below 1e-10.
    """
    w = inverse_sqrt(ints.overlap)
    s_half = ints.overlap @ w  # S^{1/2}
    d_lo = s_half @ mf.density @ s_half
    d_lo = 0.5 * (d_lo + d_lo.T)
    return LocalizedBasis(w, tuple(ints.orbital_atoms)), d_lo
