import numpy as np
import pytest

from dmet_compass.ansatz import (
    ExcitationOperator,
    build_uccsd,
    compass_construct,
    generate_scatterer_pool,
    shares_cso,
    single_group,
)
from dmet_compass.chem import build_h_chain, compute_sto3g_integrals, solve_rhf
from dmet_compass.fci import fci_ground_state
from dmet_compass.hamiltonian import MolecularHamiltonian
from dmet_compass.qubit import expectation, hamiltonian_sparse
from dmet_compass.vqe import (
    OptimizerSettings,
    VqeEngine,
    optimize_global,
    optimize_single_parameter,
    optimize_two_parameter,
    prepare_state,
)


def mo_hamiltonian(n, d):
    ints = compute_sto3g_integrals(build_h_chain(n, d))
    mo = ints.rotated(solve_rhf(ints, n).coeff)
    return MolecularHamiltonian(ints.e_nuc, mo.core, mo.eri)


@pytest.fixture(scope="module")
def h4():
    ham = mo_hamiltonian(4, 1.8)
    return ham, VqeEngine(ham, 2, 2)


@pytest.mark.parametrize("d", [0.7414, 1.5, 3.0])
def test_h2_double_rotation_is_two_level_problem(d):
    ham = mo_hamiltonian(2, d)
    h, v = ham.one_body, ham.two_body
    e_gg = 2 * h[0, 0] + v[0, 0, 0, 0]
    e_uu = 2 * h[1, 1] + v[1, 1, 1, 1]
    k = v[0, 0, 1, 1]
    e_min = ham.constant + np.linalg.eigvalsh([[e_gg, k], [k, e_uu]])[0]
    engine = VqeEngine(ham, 1, 1)
    double = single_group(ExcitationOperator((0, 1), (2, 3)))
    res = optimize_single_parameter(engine, double)
    assert res.energy == pytest.approx(e_min, abs=1e-10)
    # E(theta) is an exact cosine in 2 theta
    thetas = np.linspace(-np.pi, np.pi, 7)
    energies = [engine.energy([double], [t]) for t in thetas]
    a = 0.5 * (e_gg + e_uu) + ham.constant
    amp = np.hypot(0.5 * (e_gg - e_uu), k)
    assert all(a - amp - 1e-10 <= e <= a + amp + 1e-10 for e in energies)


def test_uccsd_h2_equals_fci():
    ham = mo_hamiltonian(2, 1.2)
    engine = VqeEngine(ham, 1, 1)
    res = optimize_global(engine, build_uccsd(4, 1, 1))
    assert res.converged
    assert res.energy == pytest.approx(fci_ground_state(ham, 1, 1).energy, abs=1e-10)


def test_two_parameter_against_grid(h4):
    _, engine = h4
    parent = single_group(ExcitationOperator((2, 3), (4, 5)))
    scatterers = [single_group(s) for s in generate_scatterer_pool(4, 4) if shares_cso(s, parent)]
    sg = scatterers[0]
    theta_p = optimize_single_parameter(engine, parent).parameters[0]
    res = optimize_two_parameter(engine, parent, sg, theta_p)
    grid = np.linspace(-np.pi, np.pi, 201)
    best = min(engine.energy([parent, sg], [a, b]) for a in grid for b in grid)
    assert res.energy <= best + 1e-10
    assert -np.pi <= min(res.parameters) and max(res.parameters) <= np.pi


def test_adjoint_gradient_matches_finite_differences(h4):
    _, engine = h4
    prog, _ = compass_construct(engine)
    factors = prog.factors()
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.uniform(-0.5, 0.5, size=len(factors))
        e, g = engine.energy_and_gradient(factors, x)
        assert e == pytest.approx(engine.energy(factors, x))
        h = 1e-6
        fd = np.array(
            [(engine.energy(factors, x + h * np.eye(len(x))[k]) - engine.energy(factors, x - h * np.eye(len(x))[k])) / (2 * h) for k in range(len(x))]
        )
        assert np.allclose(g, fd, atol=1e-8)


def test_gradient_at_reference_matches_finite_difference(h4):
    _, engine = h4
    g = single_group(ExcitationOperator((0, 1), (6, 7)))
    h = 1e-6
    fd = (engine.energy([g], [h]) - engine.energy([g], [-h])) / (2 * h)
    assert engine.gradient_at_reference(g) == pytest.approx(fd, abs=1e-8)


def test_variational_bound(h4):
    ham, engine = h4
    e_fci = fci_ground_state(ham, 2, 2).energy
    prog = build_uccsd(8, 2, 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(-np.pi, np.pi, size=prog.n_parameters)
        assert engine.energy(prog.factors(), x) >= e_fci - 1e-12


def test_state_matches_full_register(h4):
    ham, engine = h4
    prog = build_uccsd(8, 2, 2)
    x = np.random.default_rng(1).uniform(-1, 1, size=prog.n_parameters)
    full = prepare_state(prog, x)
    restricted = prepare_state(prog, x, engine)
    assert np.allclose(full, restricted, atol=1e-12)
    assert expectation(full, hamiltonian_sparse(ham)) == pytest.approx(engine.energy(prog.factors(), x), abs=1e-10)
    with pytest.raises(ValueError):
        prepare_state(prog, x[:-1])


def test_finite_difference_mode_agrees(h4):
    _, engine = h4
    prog = build_uccsd(8, 2, 2)
    a = optimize_global(engine, prog)
    b = optimize_global(engine, prog, OptimizerSettings(gradient="finite-difference"))
    assert b.energy == pytest.approx(a.energy, abs=1e-8)


def test_gradient_free_fallback_runs(h4):
    ham, engine = h4
    prog = build_uccsd(8, 2, 2)
    res = optimize_global(engine, prog, OptimizerSettings(method="COBYLA", max_iter=50))
    assert res.energy <= engine.reference_energy + 1e-12


def test_iteration_cap_reports_not_converged(h4):
    _, engine = h4
    prog = build_uccsd(8, 2, 2)
    res = optimize_global(engine, prog, OptimizerSettings(max_iter=1))
    assert not res.converged
    assert res.energy <= engine.reference_energy + 1e-12


def test_empty_program_gives_reference(h4):
    _, engine = h4
    from dmet_compass.ansatz import AnsatzProgram

    res = optimize_global(engine, AnsatzProgram(8, 2, 2))
    assert res.energy == pytest.approx(engine.reference_energy)
    assert res.parameters.size == 0


def test_settings_validation():
    with pytest.raises(ValueError):
        OptimizerSettings(energy_tol=0)
    with pytest.raises(ValueError):
        OptimizerSettings(gradient="magic")
