"""STO-3G integrals against quadrature and textbook values."""

import numpy as np
import pytest
from scipy.integrate import quad

from dmet_compass.chem import Geometry, UnsupportedElementError, build_h_chain, compute_sto3g_integrals
from dmet_compass.chem.integrals import chem_to_phys, has_eightfold_symmetry, phys_to_chem, transform_two_body
from dmet_compass.chem.sto3g import STO3G_H_COEFFICIENTS, STO3G_H_EXPONENTS

BOHR = 0.52917721092  # Angstrom per bohr, only to place atoms at a round bohr distance


def _primitives():
    a = STO3G_H_EXPONENTS
    c = STO3G_H_COEFFICIENTS * (2 * a / np.pi) ** 0.75
    # tabulated coefficients are normalized only to ~1e-8; renormalize exactly
    norm = sum(ci * cj * (np.pi / (ai + aj)) ** 1.5 for ai, ci in zip(a, c) for aj, cj in zip(a, c))
    return a, c / np.sqrt(norm)


def _gauss_1d(a, A, b, B):
    f = lambda x: np.exp(-a * (x - A) ** 2 - b * (x - B) ** 2)  # noqa: E731
    return quad(f, -30, 30, points=[A, B], epsabs=1e-14)[0]


def overlap_quadrature(RA, RB):
    a, c = _primitives()
    total = 0.0
    for ai, ci in zip(a, c):
        for bj, cj in zip(a, c):
            total += ci * cj * np.prod([_gauss_1d(ai, RA[k], bj, RB[k]) for k in range(3)])
    return total


def _pair(ai, A, bj, B):
    p = ai + bj
    P = (ai * A + bj * B) / p
    K = np.exp(-ai * bj / p * np.sum((A - B) ** 2))
    return p, P, K


def nuclear_quadrature(RA, RB, RC):
    """Attraction to a unit charge at RC via 1/r = 2/sqrt(pi) int exp(-t^2 r^2) dt."""
    a, c = _primitives()
    total = 0.0
    for ai, ci in zip(a, c):
        for bj, cj in zip(a, c):
            p, P, K = _pair(ai, RA, bj, RB)
            d2 = np.sum((P - RC) ** 2)
            f = lambda t: (np.pi / (p + t * t)) ** 1.5 * np.exp(-p * t * t / (p + t * t) * d2)  # noqa: E731
            total += ci * cj * K * 2 / np.sqrt(np.pi) * quad(f, 0, np.inf, epsabs=1e-13)[0]
    return -total


def eri_quadrature(R1, R2, R3, R4):
    """``(12|34)`` with the same integral representation of 1/r12."""
    a, c = _primitives()
    total = 0.0
    for ai, ci in zip(a, c):
        for bj, cj in zip(a, c):
            p, P, K1 = _pair(ai, R1, bj, R2)
            for ak, ck in zip(a, c):
                for bl, cl in zip(a, c):
                    q, Q, K2 = _pair(ak, R3, bl, R4)
                    d2 = np.sum((P - Q) ** 2)

                    def f(t):
                        den = p * q + t * t * (p + q)
                        return (np.pi**2 / den) ** 1.5 * np.exp(-p * q * t * t / den * d2)

                    val = 2 / np.sqrt(np.pi) * quad(f, 0, np.inf, epsabs=1e-13)[0]
                    total += ci * cj * ck * cl * K1 * K2 * val
    return total


@pytest.fixture(scope="module")
def h3_bent():
    g = Geometry((("H", (0.0, 0.0, 0.0)), ("H", (0.9, 0.0, 0.0)), ("H", (0.3, 0.8, 0.2))))
    return g, compute_sto3g_integrals(g)


def test_overlap_matches_quadrature(h3_bent):
    g, ints = h3_bent
    R = g.coordinates("bohr")
    for i in range(3):
        for j in range(3):
            assert ints.overlap[i, j] == pytest.approx(overlap_quadrature(R[i], R[j]), abs=1e-9)


def test_nuclear_attraction_and_eri_match_quadrature(h3_bent):
    g, ints = h3_bent
    R = g.coordinates("bohr")
    # core = T + sum_C V_C; compare the V part by subtracting an independent kinetic term
    a, c = _primitives()

    def kinetic(RA, RB):
        t = 0.0
        for ai, ci in zip(a, c):
            for bj, cj in zip(a, c):
                p, _, K = _pair(ai, RA, bj, RB)
                mu = ai * bj / p
                t += ci * cj * mu * (3 - 2 * mu * np.sum((RA - RB) ** 2)) * (np.pi / p) ** 1.5 * K
        return t

    for i, j in [(0, 0), (0, 1), (1, 2), (0, 2)]:
        v = sum(nuclear_quadrature(R[i], R[j], R[k]) for k in range(3))
        assert ints.core[i, j] == pytest.approx(kinetic(R[i], R[j]) + v, abs=1e-8)
    chem = phys_to_chem(ints.eri)
    for idx in [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 2, 2), (0, 2, 1, 2)]:
        assert chem[idx] == pytest.approx(eri_quadrature(*(R[k] for k in idx)), abs=1e-8)


def test_h2_textbook_values():
    """H2 at 1.4 bohr, zeta = 1.24 (standard minimal-basis tables, 4 decimals)."""
    ints = compute_sto3g_integrals(Geometry((("H", (0, 0, 0)), ("H", (1.4 * BOHR, 0, 0)))))
    chem = phys_to_chem(ints.eri)
    assert ints.overlap[0, 1] == pytest.approx(0.6593, abs=1e-4)
    assert ints.core[0, 0] == pytest.approx(-1.1204, abs=1e-4)
    assert ints.core[0, 1] == pytest.approx(-0.9584, abs=1e-4)
    assert chem[0, 0, 0, 0] == pytest.approx(0.7746, abs=1e-4)
    assert chem[0, 0, 1, 1] == pytest.approx(0.5697, abs=1e-4)
    assert chem[1, 0, 0, 0] == pytest.approx(0.4441, abs=1e-4)
    assert chem[1, 0, 1, 0] == pytest.approx(0.2970, abs=1e-4)
    assert ints.e_nuc == pytest.approx(1 / 1.4, abs=1e-6)


def test_symmetries_and_shapes():
    ints = compute_sto3g_integrals(build_h_chain(5, 1.3, "ring"))
    assert ints.n_orb == 5 and ints.n_electrons == 5
    assert np.allclose(ints.overlap, ints.overlap.T)
    assert np.all(np.linalg.eigvalsh(ints.overlap) > 0)
    assert np.allclose(ints.core, ints.core.T)
    assert has_eightfold_symmetry(ints.eri)


def test_atom_permutation_permutes_integrals():
    g = Geometry((("H", (0.0, 0.0, 0.0)), ("H", (0.9, 0.1, 0.0)), ("H", (2.0, -0.3, 0.4))))
    order = [2, 0, 1]
    a = compute_sto3g_integrals(g).permuted(order)
    b = compute_sto3g_integrals(g.permuted(order))
    assert np.allclose(a.core, b.core, atol=1e-13)
    assert np.allclose(a.eri, b.eri, atol=1e-13)
    assert a.e_nuc == pytest.approx(b.e_nuc, abs=1e-13)


def test_notation_round_trip():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(3, 3, 3, 3))
    assert np.array_equal(phys_to_chem(chem_to_phys(x)), x)


def test_two_body_transform_naive():
    rng = np.random.default_rng(4)
    eri = rng.normal(size=(3, 3, 3, 3))
    c = rng.normal(size=(3, 2))
    ref = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    for p in range(3):
                        for q in range(3):
                            for r in range(3):
                                for s in range(3):
                                    ref[i, j, k, m] += c[p, i] * c[q, j] * c[r, k] * c[s, m] * eri[p, q, r, s]
    assert np.allclose(transform_two_body(eri, c), ref)


def test_non_hydrogen_rejected():
    with pytest.raises(UnsupportedElementError, match="FCIDUMP"):
        compute_sto3g_integrals(Geometry((("He", (0.0, 0.0, 0.0)),)))
