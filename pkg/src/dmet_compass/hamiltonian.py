"""Spin-free second-quantized electronic Hamiltonian.

``H = c + sum_pq h_pq E_pq + 1/2 sum_pqrs <pq|rs> sum_{st} a+_{p s} a+_{q t} a_{s t} a_{r s}``

Spatial orbital ``k`` maps to spin orbitals ``2k`` (alpha) and ``2k+1`` (beta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def spin_orbital_one_body(h: np.ndarray) -> np.ndarray:
    return np.kron(h, np.eye(2))


def spin_orbital_two_body(v: np.ndarray) -> np.ndarray:
    """``<PQ|RS>`` over spin orbitals from spatial physicists' integrals."""
    n = v.shape[0]
    out = np.zeros((2 * n,) * 4)
    for s in range(2):
        for t in range(2):
            out[s::2, t::2, s::2, t::2] = v
    return out


@dataclass(frozen=True, eq=False)
class MolecularHamiltonian:
    """Number-conserving Hamiltonian over ``n_orb`` spatial orbitals.

    Attributes:
        constant: Scalar energy offset (nuclear repulsion, frozen core, ...).
        one_body: Spatial one-electron matrix ``h``.
        two_body: Spatial two-electron integrals ``<pq|rs>``.
    """

    constant: float
    one_body: np.ndarray
    two_body: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.one_body.shape[0]
        if self.one_body.shape != (n, n) or self.two_body.shape != (n,) * 4:
            raise ValueError("inconsistent Hamiltonian dimensions")

    @property
    def n_orb(self) -> int:
        return self.one_body.shape[0]

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orb

    def spin_orbital_tensors(self) -> tuple[np.ndarray, np.ndarray]:
        if "so" not in self._cache:
            self._cache["so"] = (spin_orbital_one_body(self.one_body), spin_orbital_two_body(self.two_body))
        return self._cache["so"]

    def energy_from_rdms(self, rdm1: np.ndarray, rdm2: np.ndarray) -> float:
        """Energy from spin-orbital RDMs ``<a+_P a_Q>`` and ``<a+_P a+_Q a_R a_S>``."""
        h, v = self.spin_orbital_tensors()
        e2 = 0.5 * np.einsum("pqsr,pqrs->", v, rdm2, optimize=True)
        return float(self.constant + np.sum(h * rdm1).real + e2.real)

    def rotated(self, coeff: np.ndarray) -> MolecularHamiltonian:
        from .chem.integrals import transform_one_body, transform_two_body

        return MolecularHamiltonian(
            self.constant, transform_one_body(self.one_body, coeff), transform_two_body(self.two_body, coeff)
        )

    def sector_matrix(self, n_alpha: int, n_beta: int):
        """Sparse Fock-space matrix restricted to the ``(n_alpha, n_beta)`` block."""
        key = ("sector", n_alpha, n_beta)
        if key not in self._cache:
            from .qubit.simulator import hamiltonian_sparse

            self._cache[key] = hamiltonian_sparse(self, n_alpha, n_beta)
        return self._cache[key]
