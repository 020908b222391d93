"""Container for one- and two-electron integrals and basis transformations.

Two-electron integrals are stored in physicists' notation,
``eri[p, q, r, s] = <pq|rs> = (pr|qs)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def chem_to_phys(eri_chem: np.ndarray) -> np.ndarray:
    """Convert ``(pq|rs)`` to ``<pr|qs>`` ordering."""
    return np.ascontiguousarray(eri_chem.transpose(0, 2, 1, 3))


def phys_to_chem(eri_phys: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(eri_phys.transpose(0, 2, 1, 3))


def transform_one_body(mat: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    return coeff.T @ mat @ coeff


def transform_two_body(eri: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """Rotate a four-index tensor with ``coeff`` on every index."""
    out = np.einsum("pqrs,pi->iqrs", eri, coeff, optimize=True)
    out = np.einsum("iqrs,qj->ijrs", out, coeff, optimize=True)
    out = np.einsum("ijrs,rk->ijks", out, coeff, optimize=True)
    return np.einsum("ijks,sl->ijkl", out, coeff, optimize=True)


def has_eightfold_symmetry(eri: np.ndarray, atol: float = 1e-10) -> bool:
    """Check real-orbital permutational symmetry of a physicists' tensor."""
    chem = phys_to_chem(eri)
    perms = [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]
    return all(np.allclose(chem, chem.transpose(p), atol=atol) for p in perms)


@dataclass(frozen=True, eq=False)
class IntegralSet:
    """Integrals of the full system in a fixed orbital basis.

    Attributes:
        overlap: Overlap matrix ``S``.
        core: Core one-electron matrix (kinetic plus nuclear attraction), Hartree.
        eri: Two-electron integrals ``<pq|rs>``, Hartree.
        e_nuc: Nuclear repulsion (or frozen-core constant), Hartree.
        orbital_atoms: Atom index on which each basis function is centred.
        n_electrons: Electron count if known from the source (FCIDUMP).
    """

    overlap: np.ndarray
    core: np.ndarray
    eri: np.ndarray
    e_nuc: float = 0.0
    orbital_atoms: tuple[int, ...] = field(default=())
    n_electrons: int | None = None

    def __post_init__(self):
        n = self.core.shape[0]
        if self.overlap.shape != (n, n) or self.eri.shape != (n, n, n, n):
            raise ValueError("inconsistent integral dimensions")
        if not self.orbital_atoms:
            object.__setattr__(self, "orbital_atoms", tuple(range(n)))
        elif len(self.orbital_atoms) != n:
            raise ValueError("orbital_atoms must have one entry per orbital")

    @property
    def n_orb(self) -> int:
        return self.core.shape[0]

    def rotated(self, coeff: np.ndarray) -> IntegralSet:
        """Integrals expressed in the orbitals ``phi @ coeff``.

        The new overlap is ``coeff.T S coeff``; orbital-to-atom labels are kept,
        which is only meaningful for local (atom-preserving) rotations.
        """
        return IntegralSet(
            overlap=transform_one_body(self.overlap, coeff),
            core=transform_one_body(self.core, coeff),
            eri=transform_two_body(self.eri, coeff),
            e_nuc=self.e_nuc,
            orbital_atoms=self.orbital_atoms if coeff.shape[1] == self.n_orb else (),
            n_electrons=self.n_electrons,
        )

    def permuted(self, order) -> IntegralSet:
        order = np.asarray(order)
        ix = np.ix_(order, order)
        return IntegralSet(
            overlap=self.overlap[ix],
            core=self.core[ix],
            eri=self.eri[np.ix_(order, order, order, order)],
            e_nuc=self.e_nuc,
            orbital_atoms=tuple(self.orbital_atoms[i] for i in order),
            n_electrons=self.n_electrons,
        )

    def energy(self, density: np.ndarray) -> float:
        """Closed-shell mean-field energy for a spatial density (trace = N)."""
        fock = self.core + coulomb_exchange(self.eri, density)
        return float(0.5 * np.sum(density * (self.core + fock)) + self.e_nuc)


def coulomb_exchange(eri: np.ndarray, density: np.ndarray) -> np.ndarray:
    """Closed-shell two-electron potential ``J - K/2`` for a spatial density."""
    coulomb = np.einsum("prqs,rs->pq", eri, density, optimize=True)
    exchange = np.einsum("prsq,rs->pq", eri, density, optimize=True)
    return coulomb - 0.5 * exchange
