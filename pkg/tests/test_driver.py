import dataclasses

import numpy as np
import pytest

from dmet_compass import (
    DmetConfig,
    FragmentScheme,
    HChainSystem,
    MolecularHamiltonian,
    fci_ground_state,
    run_dmet,
)
from dmet_compass.chem import build_h_chain, compute_sto3g_integrals, solve_rhf
from dmet_compass.driver import (
    DmetProblem,
    SolverFailure,
    SolverOptions,
    build_context,
    electron_residual,
    run_scan,
    secant_search,
)

from dmet_compass.embedding import InvalidActiveSpaceError

from oracles import OracleDmet


def canonical_fci(n, d):
    ints = compute_sto3g_integrals(build_h_chain(n, d))
    mo = ints.rotated(solve_rhf(ints, n).coeff)
    return fci_ground_state(MolecularHamiltonian(ints.e_nuc, mo.core, mo.eri), n // 2, n // 2).energy


def test_secant_linear_root_in_three_evaluations():
    calls = []

    def f(mu):
        calls.append(mu)
        return 2.0 * (mu - 0.3)

    history, ok = secant_search(f, 0.0, 1e-3, 1e-10, 10)
    assert ok and len(history) == 3 == len(calls)
    assert history[-1][0] == pytest.approx(0.3, abs=1e-12)


def test_secant_flat_step_and_cap():
    history, ok = secant_search(lambda mu: 1.0, 0.0, 1e-3, 1e-6, 4)
    assert not ok and len(history) == 4
    assert history[2][0] == pytest.approx(1e-3 + 1e-4)


def test_secant_nonlinear():
    history, ok = secant_search(lambda mu: np.tanh(5 * mu) - 0.2, 0.0, 1e-3, 1e-12, 30)
    assert ok
    assert np.tanh(5 * history[-1][0]) == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("solver", ["fci", "uccsd", "compass"])
def test_identity_embedding(solver):
    cfg = DmetConfig(HChainSystem(4, 1.2), FragmentScheme(((0, 1, 2, 3),)), solver=solver)
    res = run_dmet(cfg)
    assert res.converged and res.cycles == 1 and res.mu == 0.0
    tol = 1e-8 if solver == "fci" else 1e-3
    assert res.energy == pytest.approx(canonical_fci(4, 1.2), abs=tol)


def test_hf_solver_reproduces_rhf():
    cfg = DmetConfig(HChainSystem(6, 1.5), 2, solver="hf")
    res = run_dmet(cfg)
    assert res.converged and res.cycles == 1
    assert res.energy == pytest.approx(res.e_rhf, abs=1e-9)


@pytest.mark.parametrize("mu", [0.0, 0.03, -0.05])
def test_same_mu_against_oracle(mu):
    cfg = DmetConfig(HChainSystem(4, 1.8), 2, solver="fci")
    problem = DmetProblem(cfg)
    record, _ = problem.evaluate(mu)
    ctx = problem.context
    oracle = OracleDmet(ctx.integrals_lo, ctx.fragment_orbitals, ctx.n_electrons)
    assert record.total_energy == pytest.approx(oracle.energy(mu), abs=1e-9)
    assert record.residual == pytest.approx(oracle.residual(mu), abs=1e-9)


def test_residual_is_decreasing_in_mu():
    cfg = DmetConfig(HChainSystem(4, 1.8), 1, solver="fci")
    ctx = build_context(cfg)
    values = [electron_residual(mu, cfg, ctx) for mu in (-0.2, 0.0, 0.2)]
    assert values[0] < values[1] < values[2]


def test_residual_history_and_trace():
    cfg = DmetConfig(HChainSystem(4, 2.0), 1, solver="fci", tolerance=1e-8)
    res = run_dmet(cfg)
    assert res.converged
    assert abs(res.residual) < 1e-8
    assert len(res.trace) == res.cycles
    assert all(len(c.fragment_energies) == 4 for c in res.trace)
    assert res.trace[-1].total_energy == res.energy


@pytest.mark.parametrize("solver", ["uccsd", "compass"])
def test_fragment_solve_has_no_memory(solver):
    # visiting other mu values first must not change the answer at mu
    cfg = DmetConfig(HChainSystem(6, 2.2), 2, solver=solver)
    ctx = build_context(cfg)
    mu = -0.01
    visited = DmetProblem(cfg, ctx)
    visited.evaluate(0.0)
    visited.evaluate(0.03)
    a, _ = visited.evaluate(mu)
    b, _ = DmetProblem(cfg, ctx).evaluate(mu)
    assert a.residual == b.residual
    assert a.total_energy == b.total_energy


def test_workers_give_identical_results():
    cfg = DmetConfig(HChainSystem(6, 1.6), 2, solver="uccsd")
    a = run_dmet(cfg)
    b = run_dmet(dataclasses.replace(cfg, workers=3))
    assert a.energy == b.energy and a.mu == b.mu


def test_active_space_full_equals_no_active_space():
    base = DmetConfig(HChainSystem(4, 1.5), 2, solver="fci")
    full = run_dmet(base)
    same = run_dmet(dataclasses.replace(base, active_space=(4, 4)))
    assert same.energy == pytest.approx(full.energy, abs=1e-10)
    frozen = run_dmet(dataclasses.replace(base, active_space={0: (2, 3), 1: (2, 3)}))
    assert frozen.converged


def test_bad_active_space_rejected_before_solving():
    cfg = DmetConfig(HChainSystem(4, 1.5), 2, solver="fci", active_space={1: (2, 4)})
    with pytest.raises(InvalidActiveSpaceError):
        run_dmet(cfg)


def test_solver_failure_carries_fragment_and_mu(monkeypatch):
    import dmet_compass.driver as driver

    real = driver.fci_ground_state

    def flaky(ham, na, nb, **kw):
        if ham.one_body[0, 0] < -10:
            raise RuntimeError("boom")
        return real(ham, na, nb, **kw)

    monkeypatch.setattr(driver, "fci_ground_state", flaky)
    cfg = DmetConfig(HChainSystem(4, 1.5), 2, solver="fci")
    problem = DmetProblem(cfg)
    with pytest.raises(SolverFailure) as info:
        problem.evaluate(50.0)
    assert info.value.fragment == 0 and info.value.mu == 50.0


def test_scan_isolates_failures():
    cfg = DmetConfig(HChainSystem(4, 1.0), 2, solver="hf")
    points = run_scan(cfg, [1.0, -1.0, 1.5])
    assert [p.d for p in points] == [1.0, -1.0, 1.5]
    assert points[0].result is not None and points[2].result is not None
    assert points[1].result is None and points[1].error
    assert run_scan(cfg, []) == []


def test_config_validation():
    with pytest.raises(ValueError, match="unknown solver"):
        DmetConfig(HChainSystem(4, 1.0), 2, solver="dmrg")
    with pytest.raises(ValueError):
        DmetConfig(HChainSystem(4, 1.0), 2, tolerance=0)
    with pytest.raises(ValueError):
        DmetConfig(HChainSystem(4, 1.0), 2, mu0=0.1, mu1=0.1)


def test_ring_fragments_are_equivalent():
    cfg = DmetConfig(HChainSystem(6, 1.4, "ring"), 2, solver="fci")
    res = run_dmet(cfg)
    e = res.trace[-1].fragment_energies
    assert np.allclose(e, e[0], atol=1e-9)


def test_options_passed_to_compass():
    cfg = DmetConfig(HChainSystem(4, 2.0), 2, solver="compass", options=SolverOptions(eps2=10.0))
    res = run_dmet(cfg)
    assert all(p.n_scatterers == 0 for cycle in res.programs for p in cycle)
