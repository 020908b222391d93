"""Fragment/bath construction and embedded Hamiltonians.

Everything here works in the orthonormal localized (LO) basis. An embedded
problem is spanned by the fragment orbitals followed by the bath orbitals; the
remaining occupied environment is folded into an effective one-body operator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .chem.integrals import IntegralSet, coulomb_exchange, transform_one_body, transform_two_body
from .chem.localize import LocalizedBasis
from .chem.scf import MeanFieldState, solve_rhf
from .hamiltonian import MolecularHamiltonian, spin_orbital_two_body

logger = logging.getLogger(__name__)

BATH_THRESHOLD = 1e-13


class InvalidSchemeError(ValueError):
    pass


class EmbeddingInconsistencyError(RuntimeError):
    pass


class InvalidActiveSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class FragmentScheme:
    """Disjoint atom groups covering the molecule."""

    groups: tuple[tuple[int, ...], ...]

    @classmethod
    def chunks(cls, n_atoms: int, size: int) -> FragmentScheme:
        """Consecutive groups of ``size`` atoms (the last one may be shorter)."""
        if size < 1:
            raise InvalidSchemeError("fragment size must be positive")
        return cls(tuple(tuple(range(i, min(i + size, n_atoms))) for i in range(0, n_atoms, size)))

    def validate(self, n_atoms: int) -> None:
        seen: dict[int, int] = {}
        for g, group in enumerate(self.groups):
            if not group:
                raise InvalidSchemeError(f"fragment {g} is empty")
            for a in group:
                if not 0 <= a < n_atoms:
                    raise InvalidSchemeError(f"fragment {g} names atom {a}, molecule has {n_atoms}")
                if a in seen:
                    raise InvalidSchemeError(f"atom {a} appears in fragments {seen[a]} and {g}")
                seen[a] = g
        missing = sorted(set(range(n_atoms)) - set(seen))
        if missing:
            raise InvalidSchemeError(f"atoms {missing} are not in any fragment")


def partition(scheme: FragmentScheme, basis: LocalizedBasis) -> list[list[int]]:
    """Localized-orbital indices of every fragment."""
    n_atoms = max(basis.atom_of_orbital) + 1 if basis.atom_of_orbital else 0
    scheme.validate(n_atoms)
    return [basis.orbitals_on(group) for group in scheme.groups]


@dataclass(frozen=True, eq=False)
class Bath:
    """Result of the Schmidt decomposition of the mean-field state.

    Coefficient matrices are expressed over the full LO basis (rows), with
    zeros on fragment rows.
    """

    fragment_orbitals: tuple[int, ...]
    bath_orbitals: np.ndarray
    env_occupied: np.ndarray
    d_env: np.ndarray
    n_emb_electrons: int
    bath_occupations: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        """Embedding orbitals: fragment unit vectors, then bath vectors."""
        n = self.d_env.shape[0]
        frag = np.zeros((n, len(self.fragment_orbitals)))
        frag[list(self.fragment_orbitals), np.arange(len(self.fragment_orbitals))] = 1.0
        return np.hstack([frag, self.bath_orbitals])


def _fix_column_signs(vecs: np.ndarray) -> np.ndarray:
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def build_bath(fragment_orbitals, d_lo: np.ndarray, threshold: float = BATH_THRESHOLD) -> Bath:
    """Entangled bath from the environment block of ``D_lo / 2``.

    Eigenvalues in ``(threshold, 1 - threshold)`` give bath orbitals, those at
    or above ``1 - threshold`` are the occupied environment, the rest are
    dropped. If round-off pushes more than ``L_A`` eigenvalues into the bath
    window, only the ``L_A`` most entangled ones (closest to 1/2) are kept.

    Raises:
        EmbeddingInconsistencyError: if the projected electron count is more
            than 1e-6 away from an even integer.
    """
    n = d_lo.shape[0]
    frag = sorted(int(i) for i in fragment_orbitals)
    env = [i for i in range(n) if i not in set(frag)]
    n_frag = len(frag)
    bath = np.zeros((n, 0))
    env_occ = np.zeros((n, 0))
    occupations = np.zeros(0)
    if env:
        w, v = np.linalg.eigh(0.5 * d_lo[np.ix_(env, env)])
        bath_mask = (w > threshold) & (w < 1.0 - threshold)
        occ_mask = w >= 1.0 - threshold
        idx = np.flatnonzero(bath_mask)
        if idx.size > n_frag:
            logger.warning(
                "%d environment eigenvalues in the bath window for a %d-orbital fragment; keeping the most entangled",
                idx.size,
                n_frag,
            )
            order = np.argsort(np.abs(w[idx] - 0.5), kind="stable")[:n_frag]
            dropped = np.setdiff1d(idx, idx[order])
            occ_mask[dropped[w[dropped] > 0.5]] = True
            idx = np.sort(idx[order])
        # most occupied bath orbital first
        idx = idx[np.argsort(-w[idx], kind="stable")]
        occupations = w[idx]
        bath = np.zeros((n, idx.size))
        bath[env] = _fix_column_signs(v[:, idx])
        occ_idx = np.flatnonzero(occ_mask)
        env_occ = np.zeros((n, occ_idx.size))
        env_occ[env] = _fix_column_signs(v[:, occ_idx])
    d_env = 2.0 * env_occ @ env_occ.T
    basis = np.hstack([np.eye(n)[:, frag], bath])
    trace = float(np.trace(basis.T @ d_lo @ basis))
    n_emb = int(round(trace))
    if n_emb % 2:
        n_emb_even = 2 * int(round(trace / 2))
        raise EmbeddingInconsistencyError(
            f"embedded electron count {trace:.8f} is not close to an even integer (nearest even {n_emb_even})"
        )
    if abs(trace - n_emb) > 1e-6:
        raise EmbeddingInconsistencyError(f"embedded electron count {trace:.10f} is not an integer within 1e-6")
    return Bath(tuple(frag), bath, env_occ, d_env, n_emb, occupations)


@dataclass(frozen=True, eq=False)
class EmbeddedSubsystem:
    """Fragment + bath problem with the environment folded in.

    Attributes:
        bath: Orbital definitions from :func:`build_bath`.
        t_emb: Bare core Hamiltonian ``t`` projected into the embedding space.
        h_tilde: ``t + J[D_env] - K[D_env]/2`` projected into the embedding space.
        eri_emb: ``<pq|rs>`` over embedding orbitals.
        e_core: Mean-field energy of the occupied environment.
        d_emb: Projected mean-field density (spatial, used as SCF guess).
    """

    bath: Bath
    t_emb: np.ndarray
    h_tilde: np.ndarray
    eri_emb: np.ndarray
    e_core: float
    d_emb: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_orb(self) -> int:
        return self.t_emb.shape[0]

    @property
    def n_fragment(self) -> int:
        return len(self.bath.fragment_orbitals)

    @property
    def n_electrons(self) -> int:
        return self.bath.n_emb_electrons

    @property
    def fragment_orbitals(self) -> tuple[int, ...]:
        return self.bath.fragment_orbitals


def build_subsystem(ints_lo: IntegralSet, fragment_orbitals, d_lo: np.ndarray) -> EmbeddedSubsystem:
    """Bath plus projected integrals for one fragment (``ints_lo`` must be orthonormal)."""
    bath = build_bath(fragment_orbitals, d_lo)
    basis = bath.basis
    if basis.shape[1] and np.abs(basis.T @ basis - np.eye(basis.shape[1])).max() > 1e-10:
        raise EmbeddingInconsistencyError("embedding orbitals are not orthonormal")
    g_env = coulomb_exchange(ints_lo.eri, bath.d_env)
    h_tilde_lo = ints_lo.core + g_env
    e_core = float(np.sum(bath.d_env * (ints_lo.core + 0.5 * g_env)))
    return EmbeddedSubsystem(
        bath=bath,
        t_emb=transform_one_body(ints_lo.core, basis),
        h_tilde=transform_one_body(h_tilde_lo, basis),
        eri_emb=transform_two_body(ints_lo.eri, basis),
        e_core=e_core,
        d_emb=transform_one_body(d_lo, basis),
    )


def build_embedding_hamiltonian(sub: EmbeddedSubsystem, mu: float = 0.0) -> MolecularHamiltonian:
    """Embedded Hamiltonian with ``-mu`` on every fragment orbital.

    The constant is zero: the environment energy ``e_core`` is kept on the
    subsystem and the nuclear repulsion is added once for the whole molecule.
    """
    if not np.isfinite(mu):
        raise ValueError("chemical potential must be finite")
    if sub.eri_emb.shape != (sub.n_orb,) * 4 or sub.h_tilde.shape != (sub.n_orb,) * 2:
        raise ValueError("embedded integral dimensions do not match")
    one = sub.h_tilde.copy()
    idx = np.arange(sub.n_fragment)
    one[idx, idx] -= mu
    return MolecularHamiltonian(0.0, one, sub.eri_emb)


def embedded_mean_field(sub: EmbeddedSubsystem, mu: float = 0.0) -> MeanFieldState:
    """RHF of the embedded problem, started from the projected global density."""
    ham = build_embedding_hamiltonian(sub, mu)
    ints = IntegralSet(np.eye(sub.n_orb), ham.one_body, ham.two_body)
    return solve_rhf(ints, sub.n_electrons, guess_density=sub.d_emb)


@dataclass(frozen=True)
class ActiveSpace:
    """Frozen-core / frozen-virtual selection over embedded orbitals."""

    n_active_electrons: int
    n_active_orbitals: int
    frozen_occupied: tuple[int, ...] = ()
    frozen_virtual: tuple[int, ...] = ()

    @classmethod
    def from_counts(cls, n_orb: int, n_electrons: int, n_active_electrons: int, n_active_orbitals: int):
        """Freeze the lowest doubly occupied and the highest virtual orbitals."""
        n_core = (n_electrons - n_active_electrons) // 2
        n_virt = n_orb - n_core - n_active_orbitals
        if (n_electrons - n_active_electrons) % 2 or n_core < 0 or n_virt < 0:
            raise InvalidActiveSpaceError(
                f"({n_active_electrons}e, {n_active_orbitals}o) does not fit {n_electrons} electrons in {n_orb} orbitals"
            )
        return cls(n_active_electrons, n_active_orbitals, tuple(range(n_core)), tuple(range(n_orb - n_virt, n_orb)))

    def active_orbitals(self, n_orb: int) -> list[int]:
        frozen = set(self.frozen_occupied) | set(self.frozen_virtual)
        return [p for p in range(n_orb) if p not in frozen]

    def validate(self, n_orb: int, n_electrons: int) -> None:
        frozen = list(self.frozen_occupied) + list(self.frozen_virtual)
        if len(set(frozen)) != len(frozen) or any(not 0 <= p < n_orb for p in frozen):
            raise InvalidActiveSpaceError("frozen orbital lists overlap or are out of range")
        if 2 * len(self.frozen_occupied) + self.n_active_electrons != n_electrons:
            raise InvalidActiveSpaceError(
                f"2 x {len(self.frozen_occupied)} frozen + {self.n_active_electrons} active != {n_electrons} electrons"
            )
        if len(self.active_orbitals(n_orb)) != self.n_active_orbitals:
            raise InvalidActiveSpaceError("active orbital count does not match the frozen lists")
        if not 0 <= self.n_active_electrons <= 2 * self.n_active_orbitals:
            raise InvalidActiveSpaceError("active electrons do not fit the active orbitals")


def apply_active_space(ham: MolecularHamiltonian, space: ActiveSpace, n_electrons: int) -> MolecularHamiltonian:
    """Fold frozen-occupied orbitals into ``h`` and the constant, drop frozen virtuals."""
    n = ham.n_orb
    space.validate(n, n_electrons)
    core = list(space.frozen_occupied)
    act = space.active_orbitals(n)
    v = ham.two_body
    h = ham.one_body
    d_core = np.zeros((n, n))
    d_core[core, core] = 2.0
    g = coulomb_exchange(v, d_core)
    e_frozen = float(np.sum(d_core * (h + 0.5 * g)))
    h_eff = (h + g)[np.ix_(act, act)]
    return MolecularHamiltonian(ham.constant + e_frozen, h_eff, v[np.ix_(act, act, act, act)])


def _determinant_part(g1: np.ndarray) -> np.ndarray:
    return np.einsum("ps,qr->pqrs", g1, g1) - np.einsum("pr,qs->pqrs", g1, g1)


def expand_active_rdms(rdm1_act, rdm2_act, space: ActiveSpace, n_orb: int):
    """Spin-orbital RDMs over all embedded orbitals given active-space RDMs.

    The state is the frozen doubly occupied core times the active state, so
    ``Gamma = Gamma_act + det(gamma) - det(gamma_act)`` with
    ``det(g)_pqrs = g_ps g_qr - g_pr g_qs``.
    """
    act = space.active_orbitals(n_orb)
    so_act = np.array([2 * p + s for p in act for s in (0, 1)])
    so_core = np.array([2 * p + s for p in space.frozen_occupied for s in (0, 1)], dtype=int)
    nso = 2 * n_orb
    g_act = np.zeros((nso, nso), dtype=rdm1_act.dtype)
    g_act[np.ix_(so_act, so_act)] = rdm1_act
    rdm1 = g_act.copy()
    rdm1[so_core, so_core] = 1.0
    rdm2 = np.zeros((nso,) * 4, dtype=rdm2_act.dtype)
    rdm2[np.ix_(so_act, so_act, so_act, so_act)] = rdm2_act
    rdm2 += _determinant_part(rdm1) - _determinant_part(g_act)
    return rdm1, rdm2


def rotate_rdms(rdm1: np.ndarray, rdm2: np.ndarray, coeff: np.ndarray):
    """Transform spin-orbital RDMs from orbitals ``phi @ coeff`` back to ``phi``.

    ``coeff`` is spatial; the spin-orbital transformation is ``kron(coeff, I_2)``.
    """
    u = np.kron(coeff, np.eye(2))
    r1 = u @ rdm1 @ u.T
    r2 = np.einsum("Pp,Qq,pqrs,Rr,Ss->PQRS", u, u, rdm2, u, u, optimize=True)
    return r1, r2


def fragment_energy(sub: EmbeddedSubsystem, rdm1: np.ndarray, rdm2: np.ndarray) -> float:
    """Energy attributed to the fragment orbitals of ``sub``.

    ``rdm1``/``rdm2`` are spin-orbital RDMs in the fragment+bath basis. The
    sum over the first index runs over fragment spin orbitals only; the
    one-body weight is ``(t + h_tilde) / 2``.
    """
    nso = 2 * sub.n_orb
    if rdm1.shape != (nso, nso) or rdm2.shape != (nso,) * 4:
        raise ValueError(f"RDM shapes {rdm1.shape}, {rdm2.shape} do not match {nso} embedded spin orbitals")
    h_mix = np.kron(0.5 * (sub.t_emb + sub.h_tilde), np.eye(2))
    v = spin_orbital_two_body(sub.eri_emb)
    nf = 2 * sub.n_fragment
    e1 = np.sum(h_mix[:nf] * rdm1[:nf])
    e2 = 0.5 * np.einsum("pqsr,pqrs->", v[:nf], rdm2[:nf], optimize=True)
    return float((e1 + e2).real)


def fragment_electron_count(rdm1: np.ndarray, fragment_orbitals) -> float:
    """Sum of diagonal 1-RDM entries over the spin orbitals of the given spatial orbitals."""
    idx = [2 * p + s for p in fragment_orbitals for s in (0, 1)]
    if not idx:
        return 0.0
    return float(np.real(np.trace(rdm1[np.ix_(idx, idx)])))


def total_energy(fragment_energies, e_nuc: float) -> float:
    return float(sum(fragment_energies) + e_nuc)
