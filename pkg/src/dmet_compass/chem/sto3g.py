"""Closed-form STO-3G integrals for hydrogen-only geometries.

Each hydrogen carries one contracted 1s function built from three normalized
s-type primitives. Nuclear attraction and electron repulsion use the zeroth
Boys function.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .geometry import Geometry
from .integrals import IntegralSet, chem_to_phys

STO3G_H_EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
STO3G_H_COEFFICIENTS = np.array([0.15432897, 0.53532814, 0.44463454])


class UnsupportedElementError(ValueError):
    """The built-in integral generator only knows hydrogen."""


def boys_f0(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    small = t < 1e-12
    safe = np.where(small, 1.0, t)
    val = 0.5 * np.sqrt(np.pi / safe) * erf(np.sqrt(safe))
    return np.where(small, 1.0 - t / 3.0, val)


def _contraction_weights() -> np.ndarray:
    alpha = STO3G_H_EXPONENTS
    w = STO3G_H_COEFFICIENTS * (2.0 * alpha / np.pi) ** 0.75
    # renormalize the contracted function exactly
    p = alpha[:, None] + alpha[None, :]
    self_overlap = np.einsum("i,j,ij->", w, w, (np.pi / p) ** 1.5)
    return w / np.sqrt(self_overlap)


def compute_sto3g_integrals(geometry: Geometry) -> IntegralSet:
    """Overlap, core Hamiltonian, ERIs and nuclear repulsion in STO-3G.

    Raises:
        UnsupportedElementError: if any atom is not hydrogen. Other elements
            can be used by supplying integrals through an FCIDUMP file.
    """
    for el in geometry.elements:
        if el.capitalize() != "H":
            raise UnsupportedElementError(
                f"built-in STO-3G integrals support hydrogen only (got {el!r}); "
                "supply integrals through an FCIDUMP file instead"
            )
    centers = geometry.coordinates("bohr")
    charges = np.ones(len(centers))
    n = len(centers)
    alpha = STO3G_H_EXPONENTS
    w = _contraction_weights()
    k = len(alpha)

    # primitive-pair quantities, axes (A, a, B, b)
    a_exp = np.broadcast_to(alpha[None, :, None, None], (n, k, n, k))
    b_exp = np.broadcast_to(alpha[None, None, None, :], (n, k, n, k))
    p = a_exp + b_exp
    mu = a_exp * b_exp / p
    diff = centers[:, None, :] - centers[None, :, :]
    r2 = np.einsum("abx,abx->ab", diff, diff)[:, None, :, None]
    prod_center = (
        a_exp[..., None] * centers[:, None, None, None, :] + b_exp[..., None] * centers[None, None, :, None, :]
    ) / p[..., None]
    kab = np.exp(-mu * r2)
    weights = w[None, :, None, None] * w[None, None, None, :]

    s_prim = (np.pi / p) ** 1.5 * kab
    t_prim = mu * (3.0 - 2.0 * mu * r2) * s_prim
    v_prim = np.zeros_like(s_prim)
    for c, z in zip(centers, charges):
        pc2 = np.sum((prod_center - c) ** 2, axis=-1)
        v_prim -= z * 2.0 * np.pi / p * kab * boys_f0(p * pc2)

    overlap = np.einsum("AaBb,AaBb->AB", weights, s_prim)
    kinetic = np.einsum("AaBb,AaBb->AB", weights, t_prim)
    nuclear = np.einsum("AaBb,AaBb->AB", weights, v_prim)

    # (AB|CD) over primitive quadruples
    p1 = p[:, :, :, :, None, None, None, None]
    p2 = p[None, None, None, None]
    pq_dist2 = np.sum(
        (prod_center[:, :, :, :, None, None, None, None, :] - prod_center[None, None, None, None]) ** 2, axis=-1
    )
    pref = 2.0 * np.pi**2.5 / (p1 * p2 * np.sqrt(p1 + p2))
    eri_prim = (
        pref
        * kab[:, :, :, :, None, None, None, None]
        * kab[None, None, None, None]
        * boys_f0(p1 * p2 / (p1 + p2) * pq_dist2)
    )
    eri_chem = np.einsum("AaBb,CcDd,AaBbCcDd->ABCD", weights, weights, eri_prim, optimize=True)

    e_nuc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            e_nuc += charges[i] * charges[j] / np.linalg.norm(centers[i] - centers[j])

    overlap = 0.5 * (overlap + overlap.T)
    core = kinetic + nuclear
    core = 0.5 * (core + core.T)
    return IntegralSet(
        overlap=overlap,
        core=core,
        eri=chem_to_phys(eri_chem),
        e_nuc=float(e_nuc),
        orbital_atoms=tuple(range(n)),
        n_electrons=int(round(charges.sum())) - geometry.charge,
    )
