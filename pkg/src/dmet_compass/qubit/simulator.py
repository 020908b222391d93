"""Exact statevector simulation on the Jordan-Wigner register.

States are plain complex ``numpy`` vectors of length ``2**n_qubits``; basis
index bit ``k`` is the occupation of spin orbital ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .fermion import FermionOperator
from .pauli import PauliSum

HERMITICITY_TOL = 1e-10


class ContractViolation(ValueError):
    """An operator does not have the Hermiticity structure the call requires."""


def basis_state(occupied, n_qubits: int) -> np.ndarray:
    state = np.zeros(1 << n_qubits, dtype=complex)
    state[sum(1 << p for p in occupied)] = 1.0
    return state


def hf_occupation(n_alpha: int, n_beta: int) -> list[int]:
    """Spin orbitals occupied by the aufbau determinant."""
    return [2 * k for k in range(n_alpha)] + [2 * k + 1 for k in range(n_beta)]


def sector_indices(n_orb: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """Sorted basis indices with the given alpha and beta electron counts."""
    idx = np.arange(1 << (2 * n_orb), dtype=np.int64)
    alpha_mask = sum(1 << (2 * k) for k in range(n_orb))
    na = np.bitwise_count(idx & alpha_mask)
    nb = np.bitwise_count(idx & (alpha_mask << 1))
    return idx[(na == n_alpha) & (nb == n_beta)]


def apply_ladders(term, basis: np.ndarray):
    """Act with a ladder product on computational basis states.

    Returns ``(targets, signs, valid)``; ``signs`` is zero where the product
    annihilates the state.
    """
    basis = np.array(basis, dtype=np.int64)
    sign = np.ones(basis.shape, dtype=float)
    valid = np.ones(basis.shape, dtype=bool)
    for p, dagger in reversed(term):
        bit = (basis >> p) & 1
        valid &= bit == (0 if dagger else 1)
        parity = np.bitwise_count(basis & ((1 << p) - 1)) & 1
        sign *= 1.0 - 2.0 * parity
        basis = basis ^ (1 << p)
    sign[~valid] = 0.0
    return basis, sign, valid


def fermion_sparse(op: FermionOperator, n_qubits: int, columns: np.ndarray | None = None) -> sp.csr_matrix:
    """Sparse matrix of a fermionic operator, optionally only on some columns."""
    dim = 1 << n_qubits
    cols = np.arange(dim, dtype=np.int64) if columns is None else np.asarray(columns, dtype=np.int64)
    rows_all, cols_all, vals_all = [], [], []
    for term, coeff in op.terms.items():
        tgt, sign, valid = apply_ladders(term, cols)
        rows_all.append(tgt[valid])
        cols_all.append(cols[valid])
        vals_all.append(coeff * sign[valid])
    if not rows_all:
        return sp.csr_matrix((dim, dim), dtype=complex)
    mat = sp.csr_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))), shape=(dim, dim)
    )
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


def hamiltonian_sparse(ham, n_alpha: int | None = None, n_beta: int | None = None) -> sp.csr_matrix:
    """Fock-space matrix of a :class:`MolecularHamiltonian`.

    With ``n_alpha``/``n_beta`` only the columns of that sector are built; the
    operator conserves both counts so the result is exact on that sector.
    """
    n = ham.n_orb
    nq = 2 * n
    cols = None if n_alpha is None else sector_indices(n, n_alpha, n_beta)
    if cols is None:
        cols = np.arange(1 << nq, dtype=np.int64)
    h, v = ham.spin_orbital_tensors()
    rows_all, cols_all, vals_all = [cols], [cols], [np.full(cols.shape, ham.constant, dtype=float)]

    def add(term, coeff):
        tgt, sign, valid = apply_ladders(term, cols)
        if valid.any():
            rows_all.append(tgt[valid])
            cols_all.append(cols[valid])
            vals_all.append(coeff * sign[valid])

    for p in range(nq):
        for q in range(nq):
            if abs(h[p, q]) > 1e-15:
                add(((p, True), (q, False)), h[p, q])
    # antisymmetrized pairs: sum_{P<Q, R<S} (<PQ|RS> - <PQ|SR>) a+_P a+_Q a_S a_R
    for p in range(nq):
        for q in range(p + 1, nq):
            for r in range(nq):
                for s in range(r + 1, nq):
                    w = v[p, q, r, s] - v[p, q, s, r]
                    if abs(w) > 1e-15:
                        add(((p, True), (q, True), (s, False), (r, False)), w)
    dim = 1 << nq
    mat = sp.csr_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))), shape=(dim, dim)
    )
    mat.sum_duplicates()
    return mat


@dataclass(frozen=True, eq=False)
class CompiledGenerator:
    """Anti-Hermitian generator split into its invariant subspaces.

    ``pair_a``/``pair_b``/``pair_g`` describe 2-dimensional blocks
    ``[[0, -g], [g, 0]]``, the usual case for a fermionic excitation acting on
    one determinant. ``blocks`` holds the larger ones, diagonalized
    once, ``exp(t G) = V exp(-i t w) V^+`` with ``i G = V w V^+``.
    """

    dim: int
    matrix: sp.csr_matrix
    pair_a: np.ndarray
    pair_b: np.ndarray
    pair_g: np.ndarray
    blocks: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    @classmethod
    def from_sparse(cls, mat) -> CompiledGenerator:
        mat = sp.csr_matrix(mat, dtype=complex)
        mat.eliminate_zeros()
        resid = abs(mat + mat.conj().T).max() if mat.nnz else 0.0
        if resid > HERMITICITY_TOL:
            raise ContractViolation(f"generator is not anti-Hermitian (residual {resid:.2e})")
        dim = mat.shape[0]
        coo = mat.tocoo()
        _, labels = connected_components((abs(mat) + abs(mat.T)).tocsr(), directed=False)
        size = np.bincount(labels)
        has_diag = np.zeros(size.shape[0], dtype=bool)
        has_diag[labels[coo.row[coo.row == coo.col]]] = True
        complex_entry = np.zeros(size.shape[0], dtype=bool)
        complex_entry[labels[coo.row[np.abs(coo.data.imag) > 0]]] = True
        simple = (size == 2) & ~has_diag & ~complex_entry
        lower = (coo.row > coo.col) & simple[labels[coo.row]]
        pair_a = coo.col[lower].astype(np.int64)
        pair_b = coo.row[lower].astype(np.int64)
        pair_g = coo.data[lower].real.copy()
        blocks = []
        rest = np.unique(labels[coo.row[~simple[labels[coo.row]]]])
        for comp in rest:
            idx = np.flatnonzero(labels == comp)
            sub = mat[idx][:, idx].toarray()
            w, vecs = np.linalg.eigh(1j * sub)
            blocks.append((idx, w, vecs))
        return cls(dim, mat, pair_a, pair_b, pair_g, tuple(blocks))

    @classmethod
    def from_pauli(cls, gen: PauliSum) -> CompiledGenerator:
        return cls.from_sparse(gen.to_sparse())

    @classmethod
    def from_fermion(cls, gen: FermionOperator, n_qubits: int) -> CompiledGenerator:
        return cls.from_sparse(fermion_sparse(gen, n_qubits))

    def apply(self, state: np.ndarray, theta: float) -> np.ndarray:
        """Return ``exp(theta G) state``."""
        out = state.copy()
        if theta == 0.0:
            return out
        if self.pair_a.size:
            c = np.cos(theta * self.pair_g)
            s = np.sin(theta * self.pair_g)
            xa = state[self.pair_a]
            xb = state[self.pair_b]
            out[self.pair_a] = c * xa - s * xb
            out[self.pair_b] = s * xa + c * xb
        for idx, w, vecs in self.blocks:
            out[idx] = vecs @ (np.exp(-1j * theta * w) * (vecs.conj().T @ state[idx]))
        return out

    def act(self, state: np.ndarray) -> np.ndarray:
        """Return ``G state`` (used for gradients)."""
        return self.matrix @ state


def apply_exponential(state: np.ndarray, generator, theta: float) -> np.ndarray:
    """Apply ``exp(theta * generator)`` exactly.

    Args:
        state: Statevector.
        generator: Anti-Hermitian :class:`PauliSum` or :class:`CompiledGenerator`.
        theta: Rotation angle.

    Raises:
        ContractViolation: if the generator is not anti-Hermitian.
    """
    if isinstance(generator, PauliSum):
        if generator.anti_hermiticity_residual() > HERMITICITY_TOL:
            raise ContractViolation("generator is not anti-Hermitian")
        generator = CompiledGenerator.from_pauli(generator)
    return generator.apply(state, theta)


def expectation(state: np.ndarray, operator) -> float:
    """``<state|H|state>`` for a Hermitian PauliSum or sparse matrix.

    Raises:
        ContractViolation: if a PauliSum has coefficients with imaginary
            part above 1e-12.
    """
    if isinstance(operator, PauliSum):
        if operator.hermiticity_residual() > 1e-12:
            raise ContractViolation("observable is not Hermitian")
        value = np.vdot(state, operator.apply(state))
    else:
        value = np.vdot(state, operator @ state)
    return float(value.real)


def _annihilate(state: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros_like(state)
    idx = np.arange(state.shape[0], dtype=np.int64)
    occ = idx[(idx >> p) & 1 == 1]
    sign = 1.0 - 2.0 * (np.bitwise_count(occ & ((1 << p) - 1)) & 1)
    out[occ ^ (1 << p)] = sign * state[occ]
    return out


def measure_rdms(state: np.ndarray, n_spin_orbitals: int) -> tuple[np.ndarray, np.ndarray]:
    """Spin-orbital ``rdm1[p,q] = <a+_p a_q>`` and ``rdm2[p,q,r,s] = <a+_p a+_q a_r a_s>``."""
    n = n_spin_orbitals
    if state.shape[0] != 1 << n:
        raise ValueError(f"state of length {state.shape[0]} does not live on {n} qubits")
    single = [_annihilate(state, p) for p in range(n)]
    m1 = np.array(single)
    rdm1 = m1.conj() @ m1.T
    # phi[r, s] = a_r a_s |psi>; only r < s needed, the rest follows from antisymmetry
    pairs = [(r, s) for r in range(n) for s in range(r + 1, n)]
    rdm2 = np.zeros((n, n, n, n), dtype=complex)
    if pairs:
        phi = np.array([_annihilate(single[s], r) for r, s in pairs])
        support = np.flatnonzero(np.any(phi != 0, axis=0))
        phi = phi[:, support]
        gram = phi.conj() @ phi.T  # <a_r' a_s' psi | a_r a_s psi> = <a+_s' a+_r' a_r a_s>
        ri = np.array([r for r, _ in pairs])
        si = np.array([s for _, s in pairs])
        # <a+_p a+_q a_r a_s> with p=s', q=r' over unordered pairs and the four sign patterns
        P, Q = np.meshgrid(np.arange(len(pairs)), np.arange(len(pairs)), indexing="ij")
        a, b = si[P], ri[P]  # p, q from the bra pair (s', r')
        c, d = ri[Q], si[Q]  # r, s from the ket pair
        g = gram[P, Q]
        rdm2[a, b, c, d] = g
        rdm2[b, a, c, d] = -g
        rdm2[a, b, d, c] = -g
        rdm2[b, a, d, c] = g
    return rdm1, rdm2
