import numpy as np
import pytest

from dmet_compass.chem import Geometry, ScfConvergenceError, build_h_chain, compute_sto3g_integrals, solve_rhf
from dmet_compass.chem.integrals import phys_to_chem
from dmet_compass.chem.scf import IllConditionedBasisError, inverse_sqrt


def sigma_g_energy(ints):
    """Closed form for H2 in a minimal basis: the occupied orbital is fixed by symmetry."""
    s = ints.overlap[0, 1]
    c = np.ones(2) / np.sqrt(2 * (1 + s))
    h = c @ ints.core @ c
    j = np.einsum("p,q,r,s,pqrs->", c, c, c, c, phys_to_chem(ints.eri))
    return 2 * h + j + ints.e_nuc


@pytest.mark.parametrize("d", [0.5, 0.7414, 1.4, 3.0])
def test_h2_closed_form(d):
    ints = compute_sto3g_integrals(build_h_chain(2, d))
    assert solve_rhf(ints, 2).energy == pytest.approx(sigma_g_energy(ints), abs=1e-10)


def test_h2_textbook_energy():
    ints = compute_sto3g_integrals(Geometry((("H", (0, 0, 0)), ("H", (1.4 * 0.52917721092, 0, 0)))))
    assert solve_rhf(ints, 2).energy == pytest.approx(-1.1167, abs=2e-4)


@pytest.mark.parametrize("n,d,topo", [(4, 1.0, "linear"), (6, 2.5, "linear"), (6, 1.5, "ring"), (10, 1.2, "linear")])
def test_solution_properties(n, d, topo):
    ints = compute_sto3g_integrals(build_h_chain(n, d, topo))
    mf = solve_rhf(ints, n)
    s = ints.overlap
    assert np.allclose(mf.coeff.T @ s @ mf.coeff, np.eye(n), atol=1e-10)
    ds = mf.density @ s
    assert np.allclose(ds @ ds, 2 * ds, atol=1e-8)
    assert np.trace(ds) == pytest.approx(n)
    assert np.all(np.diff(mf.mo_energies) >= -1e-12)
    assert mf.energy == pytest.approx(ints.energy(mf.density))
    # converged: Fock commutes with the density
    from dmet_compass.chem.integrals import coulomb_exchange

    f = ints.core + coulomb_exchange(ints.eri, mf.density)
    assert np.abs(f @ mf.density @ s - s @ mf.density @ f).max() < 1e-7


def test_aufbau_lowest_energy():
    ints = compute_sto3g_integrals(build_h_chain(4, 1.0))
    e = solve_rhf(ints, 4).energy
    for guess_seed in range(5):
        rng = np.random.default_rng(guess_seed)
        c = np.linalg.qr(rng.normal(size=(4, 4)))[0]
        x = inverse_sqrt(ints.overlap) @ c
        guess = 2 * x[:, :2] @ x[:, :2].T
        assert solve_rhf(ints, 4, guess_density=guess).energy >= e - 1e-9


def test_errors():
    ints = compute_sto3g_integrals(build_h_chain(3, 1.0))
    with pytest.raises(ValueError, match="even"):
        solve_rhf(ints, 3)
    with pytest.raises(ValueError, match="fit"):
        solve_rhf(ints, 8)
    with pytest.raises(ScfConvergenceError):
        solve_rhf(compute_sto3g_integrals(build_h_chain(6, 2.5)), 6, max_iter=2)
    with pytest.raises(IllConditionedBasisError):
        inverse_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))
