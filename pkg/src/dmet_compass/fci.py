"""Determinant-based full CI with alpha/beta string factorization.

The CI vector is stored as ``C[I_alpha, I_beta]``. Sigma vectors follow the
Knowles-Handy scheme: one-body replacement lists for each string, a
``D_rs = E_rs C`` intermediate, a contraction with the two-electron integrals,
and a second pass of replacements.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np
import scipy.linalg

from .hamiltonian import MolecularHamiltonian
from .chem.integrals import phys_to_chem

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
DEFAULT_MAX_DETERMINANTS = 1_000_000


class FciCapacityError(RuntimeError):
    """The requested CI space exceeds the configured determinant cap."""


class DavidsonError(RuntimeError):
    pass


def _strings(n_orb: int, n_el: int) -> np.ndarray:
    return np.array([sum(1 << k for k in occ) for occ in itertools.combinations(range(n_orb), n_el)], dtype=np.int64)


@dataclass(frozen=True)
class ReplacementTable:
    """All ``E_pq |I> = sign |J>`` for one spin, including ``p == q``.

    Arrays have shape ``(n_strings, n_entries)``; ``pq`` is ``p * n_orb + q``.
    """

    target: np.ndarray
    sign: np.ndarray
    pq: np.ndarray
    qp: np.ndarray


def _replacement_table(strings: np.ndarray, n_orb: int) -> ReplacementTable:
    address = {int(s): i for i, s in enumerate(strings)}
    rows_t, rows_s, rows_pq = [], [], []
    for s in strings:
        s = int(s)
        t_, s_, pq_ = [], [], []
        for q in range(n_orb):
            if not s >> q & 1:
                continue
            removed = s ^ (1 << q)
            for p in range(n_orb):
                if p != q and removed >> p & 1:
                    continue
                new = removed | (1 << p)
                # a+_p a_q: parity of electrons below q in s, then below p in s - q
                parity = bin(s & ((1 << q) - 1)).count("1") + bin(removed & ((1 << p) - 1)).count("1")
                t_.append(address[new])
                s_.append(-1.0 if parity & 1 else 1.0)
                pq_.append(p * n_orb + q)
        rows_t.append(t_)
        rows_s.append(s_)
        rows_pq.append(pq_)
    target = np.array(rows_t, dtype=np.int64).reshape(len(strings), -1)
    pq = np.array(rows_pq, dtype=np.int64).reshape(len(strings), -1)
    qp = (pq % n_orb) * n_orb + pq // n_orb
    return ReplacementTable(target, np.array(rows_s).reshape(len(strings), -1), pq, qp)


@dataclass(frozen=True, eq=False)
class CiSpace:
    """Determinants with fixed ``n_alpha`` and ``n_beta`` over ``n_orb`` spatial orbitals."""

    n_orb: int
    n_alpha: int
    n_beta: int

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_orb

    @cached_property
    def alpha_strings(self) -> np.ndarray:
        return _strings(self.n_orb, self.n_alpha)

    @cached_property
    def beta_strings(self) -> np.ndarray:
        return _strings(self.n_orb, self.n_beta)

    @property
    def shape(self) -> tuple[int, int]:
        return comb(self.n_orb, self.n_alpha), comb(self.n_orb, self.n_beta)

    @property
    def n_determinants(self) -> int:
        na, nb = self.shape
        return na * nb

    @cached_property
    def alpha_table(self) -> ReplacementTable:
        return _replacement_table(self.alpha_strings, self.n_orb)

    @cached_property
    def beta_table(self) -> ReplacementTable:
        return _replacement_table(self.beta_strings, self.n_orb)

    def determinants(self) -> np.ndarray:
        """Spin-orbital occupation bitmasks (bit ``2k`` alpha, ``2k+1`` beta), row-major in (alpha, beta)."""

        def spread(strings, offset):
            out = np.zeros_like(strings)
            for k in range(self.n_orb):
                out |= ((strings >> k) & 1) << (2 * k + offset)
            return out

        a = spread(self.alpha_strings, 0)
        b = spread(self.beta_strings, 1)
        return (a[:, None] | b[None, :]).ravel()


class FciSolver:
    """Sigma-vector engine for one Hamiltonian and one CI space."""

    def __init__(self, ham: MolecularHamiltonian, n_alpha: int, n_beta: int, block_size: int = 64):
        self.ham = ham
        self.space = CiSpace(ham.n_orb, n_alpha, n_beta)
        n = ham.n_orb
        eri = phys_to_chem(ham.two_body)
        self.h = ham.one_body
        # k_pq = h_pq - 1/2 sum_r (pr|rq) absorbs the normal-ordering correction
        self.k = (ham.one_body - 0.5 * np.einsum("prrq->pq", eri)).ravel()
        self.v = 0.5 * eri.reshape(n * n, n * n)
        self.eri = eri
        self.block_size = block_size

    def sigma(self, c: np.ndarray) -> np.ndarray:
        """``H C`` for ``c`` of shape ``(n_alpha_str, n_beta_str[, m])`` (constant included)."""
        squeeze = c.ndim == 2
        if squeeze:
            c = c[..., None]
        na, nb = self.space.shape
        ta, tb = self.space.alpha_table, self.space.beta_table
        kk = self.k.shape[0]
        m = c.shape[2]
        out = np.zeros_like(c)
        ib = np.arange(nb)[:, None]
        for start in range(0, na, self.block_size):
            rows = np.arange(start, min(start + self.block_size, na))
            blk = rows.size
            d = np.zeros((blk, kk, nb, m))
            bi = np.arange(blk)[:, None]
            d[bi, ta.qp[rows]] = ta.sign[rows][..., None, None] * c[ta.target[rows]]
            vals = c[rows][:, tb.target] * tb.sign[None, :, :, None]  # (blk, nb, T, m)
            d[:, tb.qp, ib] += vals
            g = np.matmul(self.v[None], d.reshape(blk, kk, nb * m)).reshape(blk, kk, nb, m)
            g += self.k[None, :, None, None] * c[rows][:, None]
            out[rows] += np.einsum("bjtm,jt->bjm", g[:, tb.qp, tb.target], tb.sign)
            contrib = (ta.sign[rows][..., None, None] * g[bi, ta.pq[rows]]).reshape(-1, nb, m)
            np.add.at(out, ta.target[rows].ravel(), contrib)
        out += self.ham.constant * c
        return out[..., 0] if squeeze else out

    def diagonal(self) -> np.ndarray:
        n = self.space.n_orb
        occ_a = ((self.space.alpha_strings[:, None] >> np.arange(n)) & 1).astype(float)
        occ_b = ((self.space.beta_strings[:, None] >> np.arange(n)) & 1).astype(float)
        j = np.einsum("ppqq->pq", self.eri)
        kx = np.einsum("pqqp->pq", self.eri)
        hd = np.diag(self.h)
        ea = occ_a @ hd + 0.5 * np.einsum("ip,pq,iq->i", occ_a, j - kx, occ_a)
        eb = occ_b @ hd + 0.5 * np.einsum("ip,pq,iq->i", occ_b, j - kx, occ_b)
        eab = occ_a @ j @ occ_b.T
        return ea[:, None] + eb[None, :] + eab + self.ham.constant

    def dense_matrix(self) -> np.ndarray:
        """Explicit CI matrix, ``H = sum_M E(.,M) V E(M,.)`` plus the one-body part."""
        na, nb = self.space.shape
        dim = na * nb
        ta, tb = self.space.alpha_table, self.space.beta_table
        ma, mb = np.divmod(np.arange(dim), nb)
        # for determinant M: E_xy |M> = sign |J>, alpha entries then beta entries
        tgt = np.concatenate([ta.target[ma] * nb + mb[:, None], ma[:, None] * nb + tb.target[mb]], axis=1)
        xy = np.concatenate([ta.pq[ma], tb.pq[mb]], axis=1)
        sgn = np.concatenate([ta.sign[ma], tb.sign[mb]], axis=1)
        mat = np.zeros((dim, dim))
        np.add.at(mat, (tgt, np.broadcast_to(np.arange(dim)[:, None], tgt.shape)), sgn * self.k[xy])
        for m0 in range(0, dim, 512):
            sl = slice(m0, min(m0 + 512, dim))
            t, x, g = tgt[sl], xy[sl], sgn[sl]
            vals = g[:, :, None] * g[:, None, :] * self.v[x[:, :, None], x[:, None, :]]
            np.add.at(mat, (np.broadcast_to(t[:, :, None], vals.shape), np.broadcast_to(t[:, None, :], vals.shape)), vals)
        mat[np.diag_indices(dim)] += self.ham.constant
        return 0.5 * (mat + mat.T)

    def davidson(self, tol: float = 1e-9, max_subspace: int = 30, max_iter: int = 500):
        na, nb = self.space.shape
        dim = na * nb
        diag = self.diagonal().ravel()
        x = np.zeros(dim)
        x[int(np.argmin(diag))] = 1.0
        vs = [x]
        hvs = [self.sigma(x.reshape(na, nb)).ravel()]
        theta = diag.min()
        for it in range(max_iter):
            v = np.array(vs)
            hv = np.array(hvs)
            sub = v @ hv.T
            sub = 0.5 * (sub + sub.T)
            w, u = np.linalg.eigh(sub)
            theta = w[0]
            x = u[:, 0] @ v
            hx = u[:, 0] @ hv
            r = hx - theta * x
            rnorm = np.linalg.norm(r)
            if rnorm < tol:
                logger.debug("Davidson converged in %d iterations", it + 1)
                return theta, x
            denom = diag - theta
            denom[np.abs(denom) < 1e-8] = 1e-8
            t = r / denom
            if len(vs) >= max_subspace:
                vs, hvs = [x / np.linalg.norm(x)], [hx / np.linalg.norm(x)]
            for _ in range(2):
                for b in vs:
                    t -= np.dot(b, t) * b
            tn = np.linalg.norm(t)
            if tn < 1e-14:
                # preconditioned residual lies in the subspace; fall back to the raw residual
                t = r.copy()
                for b in vs:
                    t -= np.dot(b, t) * b
                tn = np.linalg.norm(t)
                if tn < 1e-14:
                    return theta, x
            t /= tn
            vs.append(t)
            hvs.append(self.sigma(t.reshape(na, nb)).ravel())
        raise DavidsonError(f"Davidson did not converge (residual {rnorm:.2e})")

    def one_body_vectors(self, c: np.ndarray, spin: str) -> np.ndarray:
        """``out[p, q] = E^spin_pq C`` for every spatial pair."""
        n = self.space.n_orb
        na, nb = self.space.shape
        out = np.zeros((n * n, na, nb))
        if spin == "a":
            t = self.space.alpha_table
            src = np.broadcast_to(np.arange(na)[:, None], t.target.shape)
            out[t.pq, t.target] = t.sign[..., None] * c[src]
        else:
            t = self.space.beta_table
            src = np.broadcast_to(np.arange(nb)[:, None], t.target.shape)
            out[t.pq, :, t.target] = t.sign[..., None] * c.T[src]
        return out.reshape(n, n, na, nb)

    def rdms(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Spin-orbital ``<a+_P a_Q>`` and ``<a+_P a+_Q a_R a_S>`` for a real CI vector."""
        n = self.space.n_orb
        va = self.one_body_vectors(c, "a").reshape(n * n, -1)
        vb = self.one_body_vectors(c, "b").reshape(n * n, -1)
        flat = c.ravel()
        ga = (va @ flat).reshape(n, n)
        gb = (vb @ flat).reshape(n, n)
        # m[s, p, q, r] = <E_sp C | E_qr C> = <E_ps E_qr>
        maa = (va @ va.T).reshape(n, n, n, n)
        mbb = (vb @ vb.T).reshape(n, n, n, n)
        mab = (va @ vb.T).reshape(n, n, n, n)
        eye = np.eye(n)
        # same spin: <a+p a+q a_r a_s> = <E_ps E_qr> - delta_qs <E_pr>
        gaa = maa.transpose(1, 2, 3, 0) - np.einsum("qs,pr->pqrs", eye, ga)
        gbb = mbb.transpose(1, 2, 3, 0) - np.einsum("qs,pr->pqrs", eye, gb)
        gab = mab.transpose(1, 2, 3, 0)  # p alpha, q beta, r beta, s alpha
        nso = 2 * n
        rdm1 = np.zeros((nso, nso))
        rdm1[0::2, 0::2] = ga
        rdm1[1::2, 1::2] = gb
        rdm2 = np.zeros((nso,) * 4)
        a, b = slice(0, None, 2), slice(1, None, 2)
        rdm2[a, a, a, a] = gaa
        rdm2[b, b, b, b] = gbb
        rdm2[a, b, b, a] = gab
        rdm2[b, a, b, a] = -gab.transpose(1, 0, 2, 3)
        rdm2[a, b, a, b] = -gab.transpose(0, 1, 3, 2)
        rdm2[b, a, a, b] = gab.transpose(1, 0, 3, 2)
        return rdm1, rdm2


@dataclass(frozen=True, eq=False)
class FciResult:
    energy: float
    amplitudes: np.ndarray
    space: CiSpace
    rdm1: np.ndarray | None = None
    rdm2: np.ndarray | None = None


def fci_ground_state(
    ham: MolecularHamiltonian,
    n_alpha: int,
    n_beta: int,
    *,
    compute_rdms: bool = True,
    method: str = "auto",
    max_determinants: int = DEFAULT_MAX_DETERMINANTS,
    tol: float = 1e-9,
) -> FciResult:
    """Lowest eigenpair of ``ham`` in the ``(n_alpha, n_beta)`` sector.

    Args:
        ham: Hamiltonian over spatial orbitals.
        n_alpha: Alpha electron count.
        n_beta: Beta electron count.
        compute_rdms: Also return spin-orbital 1- and 2-RDMs.
        method: ``"dense"``, ``"davidson"`` or ``"auto"`` (dense below 2000
            determinants).
        max_determinants: Capacity cap.
        tol: Davidson residual tolerance.

    Raises:
        FciCapacityError: if the sector is larger than ``max_determinants``.
    """
    n = ham.n_orb
    if not (0 <= n_alpha <= n and 0 <= n_beta <= n):
        raise ValueError(f"sector ({n_alpha}, {n_beta}) is empty for {n} orbitals")
    space = CiSpace(n, n_alpha, n_beta)
    if space.n_determinants > max_determinants:
        raise FciCapacityError(
            f"{space.n_determinants} determinants exceed the cap of {max_determinants}; "
            "use smaller fragments or an active space"
        )
    solver = FciSolver(ham, n_alpha, n_beta)
    if method == "auto":
        method = "dense" if space.n_determinants < DENSE_LIMIT else "davidson"
    if method == "dense":
        w, u = scipy.linalg.eigh(solver.dense_matrix(), subset_by_index=[0, 0], driver="evr")
        energy, vec = float(w[0]), u[:, 0]
    elif method == "davidson":
        energy, vec = solver.davidson(tol=tol)
        energy = float(energy)
        vec = vec / np.linalg.norm(vec)
    else:
        raise ValueError(f"unknown FCI method {method!r}")
    # deterministic global sign: largest amplitude positive
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        vec = -vec
    amps = vec.reshape(space.shape)
    rdm1 = rdm2 = None
    if compute_rdms:
        rdm1, rdm2 = solver.rdms(amps)
    return FciResult(energy, amps, space, rdm1, rdm2)
