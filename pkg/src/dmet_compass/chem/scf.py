"""Closed-shell restricted Hartree-Fock with DIIS acceleration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .integrals import IntegralSet, coulomb_exchange

logger = logging.getLogger(__name__)


class ScfConvergenceError(RuntimeError):
    def __init__(self, message: str, commutator_norm: float):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class IllConditionedBasisError(ValueError):
    """Overlap matrix too close to singular for symmetric orthogonalization."""


@dataclass(frozen=True, eq=False)
class MeanFieldState:
    """Converged RHF solution.

    Attributes:
        coeff: MO coefficients (AO x MO), columns ordered by orbital energy.
        mo_energies: Orbital energies, Hartree.
        occupations: 2 for occupied, 0 for virtual orbitals.
        energy: Total RHF energy including ``e_nuc``.
        density: Spatial AO density ``2 C_occ C_occ^T``.
        iterations: SCF iterations used.
    """

    coeff: np.ndarray
    mo_energies: np.ndarray
    occupations: np.ndarray
    energy: float
    density: np.ndarray
    iterations: int = 0

    @property
    def n_electrons(self) -> int:
        return int(round(self.occupations.sum()))


def inverse_sqrt(s: np.ndarray, threshold: float = 1e-10) -> np.ndarray:
    """Symmetric ``S^{-1/2}``; raises if ``S`` is numerically singular."""
    w, v = np.linalg.eigh(s)
    if w.min() < threshold:
        raise IllConditionedBasisError(f"overlap matrix is near-singular (smallest eigenvalue {w.min():.3e})")
    return (v / np.sqrt(w)) @ v.T


def _fix_signs(coeff: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(coeff), axis=0)
    signs = np.sign(coeff[idx, np.arange(coeff.shape[1])])
    signs[signs == 0] = 1.0
    return coeff * signs


class _Diis:
    def __init__(self, size: int = 8):
        self.size = size
        self.focks: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []

    def extrapolate(self, fock, error):
        self.focks.append(fock)
        self.errors.append(error)
        if len(self.focks) > self.size:
            self.focks.pop(0)
            self.errors.pop(0)
        n = len(self.focks)
        if n < 2:
            return fock
        b = -np.ones((n + 1, n + 1))
        b[n, n] = 0.0
        for i in range(n):
            for j in range(i + 1):
                b[i, j] = b[j, i] = np.vdot(self.errors[i], self.errors[j])
        rhs = np.zeros(n + 1)
        rhs[n] = -1.0
        try:
            c = np.linalg.solve(b, rhs)[:n]
        except np.linalg.LinAlgError:
            # drop history and fall back to the plain Fock matrix
            self.focks, self.errors = [fock], [error]
            return fock
        return sum(ci * fi for ci, fi in zip(c, self.focks))


def solve_rhf(
    ints: IntegralSet,
    n_electrons: int,
    *,
    max_iter: int = 200,
    tol: float = 1e-8,
    diis: bool = True,
    level_shift: float = 0.5,
    guess_density: np.ndarray | None = None,
) -> MeanFieldState:
    """Solve the closed-shell Roothaan-Hall equations.

    Args:
        ints: Integrals in any (possibly non-orthogonal) basis.
        n_electrons: Even electron count.
        max_iter: Iteration cap.
        tol: Convergence threshold on ``max |FDS - SDF|``.
        diis: Use DIIS extrapolation of the Fock matrix.
        level_shift: Virtual-space shift used while the commutator is above
            1e-3. Stretched H chains oscillate without it.
        guess_density: Optional starting density; default is the core guess.

    Raises:
        ScfConvergenceError: if ``max_iter`` is reached.
    """
    n = ints.n_orb
    if n_electrons % 2 or n_electrons < 0:
        raise ValueError(f"closed-shell RHF needs an even, non-negative electron count, got {n_electrons}")
    if n_electrons > 2 * n:
        raise ValueError(f"{n_electrons} electrons do not fit in {n} spatial orbitals")
    n_occ = n_electrons // 2
    s = ints.overlap
    x = inverse_sqrt(s)

    def diagonalize(fock):
        eps, c = np.linalg.eigh(x.T @ fock @ x)
        return eps, _fix_signs(x @ c)

    if guess_density is None:
        _, c = diagonalize(ints.core)
        density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    else:
        density = np.array(guess_density, dtype=float)

    accel = _Diis() if diis else None
    err_norm = np.inf
    for it in range(1, max_iter + 1):
        fock = ints.core + coulomb_exchange(ints.eri, density)
        comm = fock @ density @ s - s @ density @ fock
        err_norm = float(np.max(np.abs(comm))) if n else 0.0
        if err_norm < tol:
            eps, c = diagonalize(fock)
            occ = np.zeros(n)
            occ[:n_occ] = 2.0
            density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
            energy = ints.energy(density)
            logger.debug("RHF converged in %d iterations, E=%.12f", it, energy)
            return MeanFieldState(c, eps, occ, energy, density, it)
        if accel is not None:
            fock = accel.extrapolate(fock, x.T @ comm @ x)
        if level_shift and err_norm > 1e-3:
            fock = fock + level_shift * (s - 0.5 * s @ density @ s)
        _, c = diagonalize(fock)
        density = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    raise ScfConvergenceError(
        f"RHF did not converge in {max_iter} iterations (max commutator {err_norm:.3e})", err_norm
    )

