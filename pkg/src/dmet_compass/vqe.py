"""Variational optimization on the exact statevector simulator.

The engine keeps states restricted to the ``(n_alpha, n_beta)`` block of Fock
space, which every spin-conserving generator preserves. Energies come with
analytic gradients from a reverse (adjoint) sweep through the factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .ansatz.operators import OperatorGroup, compiled_generator
from .ansatz.program import AnsatzProgram
from .hamiltonian import MolecularHamiltonian
from .qubit.simulator import hf_occupation, measure_rdms, sector_indices

logger = logging.getLogger(__name__)

MICRO_BOUNDS = (-np.pi, np.pi)
NEWTON_MAX_PARAMS = 100


@dataclass(frozen=True)
class OptimizerSettings:
    """Settings for the global optimization.

    Attributes:
        method: ``"SLSQP"`` (default) or a gradient-free fallback such as
            ``"COBYLA"`` / ``"Nelder-Mead"``.
        gradient: ``"analytic"`` (adjoint sweep) or ``"finite-difference"``.
        fd_step: Central-difference step when ``gradient="finite-difference"``.
        energy_tol: Energy convergence tolerance.
        step_tol: Parameter step tolerance (gradient-free methods).
        grad_tol: After SLSQP stops, a quasi-Newton polish runs until the
            largest gradient component is below this. Energies converge
            quadratically in the parameters but RDMs only linearly, so a
            tight gradient is what makes fragment populations reproducible.
            A short Newton refinement follows for programs of up to 100
            parameters.
        max_iter: Iteration cap.
    """

    method: str = "SLSQP"
    gradient: str = "analytic"
    fd_step: float = 1e-5
    energy_tol: float = 1e-14
    step_tol: float = 1e-8
    grad_tol: float = 1e-8
    max_iter: int = 500

    def __post_init__(self):
        if min(self.energy_tol, self.step_tol, self.fd_step, self.grad_tol) <= 0 or self.max_iter < 1:
            raise ValueError("optimizer tolerances must be positive")
        if self.gradient not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")


@dataclass(frozen=True, eq=False)
class VqeResult:
    energy: float
    parameters: np.ndarray
    state: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ScreeningResult:
    energy: float
    parameters: tuple[float, ...]
    converged: bool


class VqeEngine:
    """Statevector machinery for one Hamiltonian and one electron sector."""

    def __init__(self, ham: MolecularHamiltonian, n_alpha: int, n_beta: int):
        self.ham = ham
        self.n_alpha = n_alpha
        self.n_beta = n_beta
        self.n_qubits = ham.n_qubits
        self.sector = sector_indices(ham.n_orb, n_alpha, n_beta)
        self._sector_key = tuple(int(x) for x in self.sector)
        full = ham.sector_matrix(n_alpha, n_beta)
        self.h = full[self.sector][:, self.sector].tocsr()
        ref_bits = sum(1 << p for p in hf_occupation(n_alpha, n_beta))
        self.ref_index = int(np.searchsorted(self.sector, ref_bits))
        self._compiled: dict[OperatorGroup, object] = {}
        self.n_energy_calls = 0

    def reference(self) -> np.ndarray:
        psi = np.zeros(self.sector.size, dtype=complex)
        psi[self.ref_index] = 1.0
        return psi

    def compiled(self, group: OperatorGroup):
        gen = self._compiled.get(group)
        if gen is None:
            gen = compiled_generator(group, self.n_qubits, self._sector_key)
            self._compiled[group] = gen
        return gen

    def prepare(self, factors, params) -> np.ndarray:
        psi = self.reference()
        for group, theta in zip(factors, params):
            psi = self.compiled(group).apply(psi, float(theta))
        return psi

    def energy_of(self, psi: np.ndarray) -> float:
        return float(np.vdot(psi, self.h @ psi).real)

    def energy(self, factors, params) -> float:
        self.n_energy_calls += 1
        return self.energy_of(self.prepare(factors, params))

    @property
    def reference_energy(self) -> float:
        return self.energy_of(self.reference())

    def energy_and_gradient(self, factors, params) -> tuple[float, np.ndarray]:
        """Energy and ``dE/dtheta`` via one forward and one reverse sweep."""
        self.n_energy_calls += 1
        psi = self.prepare(factors, params)
        lam = self.h @ psi
        energy = float(np.vdot(psi, lam).real)
        grad = np.zeros(len(factors))
        phi = psi
        for k in range(len(factors) - 1, -1, -1):
            gen = self.compiled(factors[k])
            grad[k] = 2.0 * np.vdot(lam, gen.act(phi)).real
            phi = gen.apply(phi, -float(params[k]))
            lam = gen.apply(lam, -float(params[k]))
        return energy, grad

    def gradient_at_reference(self, group: OperatorGroup, psi: np.ndarray | None = None) -> float:
        """``d/dtheta <psi| e^{-theta G} H e^{theta G} |psi>`` at zero, ``2 Re <psi|H G|psi>``."""
        psi = self.reference() if psi is None else psi
        return float(2.0 * np.vdot(self.h @ psi, self.compiled(group).act(psi)).real)

    def full_state(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros(1 << self.n_qubits, dtype=complex)
        out[self.sector] = psi
        return out

    def rdms(self, psi: np.ndarray):
        return measure_rdms(self.full_state(psi), self.n_qubits)


def _objective(engine: VqeEngine, factors, settings: OptimizerSettings):
    if settings.gradient == "analytic":
        return lambda x: engine.energy_and_gradient(factors, x)
    h = settings.fd_step

    def fun(x):
        e = engine.energy(factors, x)
        g = np.zeros_like(x)
        for k in range(x.size):
            d = np.zeros_like(x)
            d[k] = h
            g[k] = (engine.energy(factors, x + d) - engine.energy(factors, x - d)) / (2 * h)
        return e, g

    return fun


def _newton_refine(fun, x, energy, steps: int = 3, h: float = 1e-5):
    """A few Newton steps with a central-difference Hessian of the analytic gradient.

    Quasi-Newton methods stall with gradients around 1e-8; RDMs inherit that
    error linearly. Near a minimum one Newton step takes the gradient to round-off.
    """
    _, g = fun(x)
    for _ in range(steps):
        gmax = np.abs(g).max()
        if gmax < 1e-14:
            break
        n = x.size
        hess = np.empty((n, n))
        for k in range(n):
            step = np.zeros(n)
            step[k] = h
            hess[k] = (fun(x + step)[1] - fun(x - step)[1]) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        if np.linalg.eigvalsh(hess).min() <= 0:
            break
        trial = x - np.linalg.solve(hess, g)
        e_new, g_new = fun(trial)
        if e_new > energy + 1e-13 or np.abs(g_new).max() >= gmax:
            break
        x, energy, g = trial, float(e_new), g_new
    return x, energy


def _minimize(engine: VqeEngine, factors, x0, bounds=None, settings: OptimizerSettings | None = None, polish=False):
    """Run the configured optimizer; returns ``(x, energy, iterations, converged, message)``."""
    settings = settings or OptimizerSettings()
    x0 = np.asarray(x0, dtype=float)
    if settings.method.upper() != "SLSQP":
        opts = {"maxiter": settings.max_iter}
        if settings.method == "Nelder-Mead":
            opts.update(xatol=settings.step_tol, fatol=settings.energy_tol)
        res = minimize(lambda x: engine.energy(factors, x), x0, method=settings.method, bounds=bounds, options=opts)
        return np.asarray(res.x, dtype=float), float(res.fun), int(getattr(res, "nit", 0)), bool(res.success), res.message
    fun = _objective(engine, factors, settings)
    res = minimize(
        fun, x0, jac=True, method="SLSQP", bounds=bounds, options={"ftol": settings.energy_tol, "maxiter": settings.max_iter}
    )
    x, energy, nit, ok, msg = np.asarray(res.x, dtype=float), float(res.fun), int(res.nit), bool(res.success), res.message
    if polish:
        _, g = fun(x)
        if np.abs(g).max() > settings.grad_tol:
            res2 = minimize(fun, x, jac=True, method="BFGS", options={"gtol": settings.grad_tol, "maxiter": settings.max_iter})
            nit += int(res2.nit)
            if float(res2.fun) <= energy + 1e-12:
                x, energy = np.asarray(res2.x, dtype=float), float(res2.fun)
        if settings.gradient == "analytic" and x.size <= NEWTON_MAX_PARAMS:
            x, energy = _newton_refine(fun, x, energy)
        _, g = fun(x)
        ok = ok and np.abs(g).max() <= 10 * settings.grad_tol
        if not ok:
            msg = f"{msg}; gradient {np.abs(g).max():.2e} after polish"
    return x, energy, nit, ok, msg


def optimize_single_parameter(engine: VqeEngine, group: OperatorGroup) -> ScreeningResult:
    """Minimize ``<ref| e^{-theta G} H e^{theta G} |ref>`` over ``theta`` in ``[-pi, pi]``."""
    e_ref = engine.reference_energy
    x, energy, _, ok, msg = _minimize(engine, [group], [0.0], bounds=[MICRO_BOUNDS])
    theta = float(x[0])
    if energy > e_ref:
        energy, theta = e_ref, 0.0
    if not ok:
        logger.warning("single-parameter screening of %s did not converge: %s", group.label(), msg)
    return ScreeningResult(energy, (theta,), ok)


def optimize_two_parameter(
    engine: VqeEngine, parent: OperatorGroup, scatterer: OperatorGroup, theta_parent: float
) -> ScreeningResult:
    """Minimize over ``(theta_I, theta_nu)`` for ``e^{sigma} e^{tau} |ref>``, starting at ``(theta_I, 0)``."""
    start = [float(theta_parent), 0.0]
    e_start = engine.energy([parent, scatterer], start)
    x, energy, _, ok, msg = _minimize(engine, [parent, scatterer], start, bounds=[MICRO_BOUNDS, MICRO_BOUNDS])
    x = tuple(float(v) for v in x)
    if energy > e_start:
        energy, x = e_start, tuple(start)
    if not ok:
        logger.warning("two-parameter screening of %s did not converge: %s", scatterer.label(), msg)
    return ScreeningResult(energy, x, ok)


def optimize_global(
    engine: VqeEngine,
    program: AnsatzProgram,
    settings: OptimizerSettings | None = None,
    initial: np.ndarray | None = None,
) -> VqeResult:
    """Optimize every parameter of ``program`` from its warm start."""
    factors = program.factors()
    x0 = program.initial_parameters() if initial is None else np.asarray(initial, dtype=float)
    if len(factors) == 0:
        psi = engine.reference()
        return VqeResult(engine.energy_of(psi), np.zeros(0), engine.full_state(psi), 0, True)
    e0 = engine.energy(factors, x0)
    x, energy, nit, ok, msg = _minimize(engine, factors, x0, settings=settings, polish=True)
    if energy > e0:
        x, energy = x0, e0
    if not ok:
        logger.warning("global optimization of %s did not converge: %s", program.name or "program", msg)
    psi = engine.prepare(factors, x)
    return VqeResult(energy, x, engine.full_state(psi), nit, ok)


def prepare_state(program: AnsatzProgram, parameters, engine: VqeEngine | None = None) -> np.ndarray:
    """Full-register statevector of ``program`` at ``parameters``.

    Without an engine the factors act on the whole ``2**n`` register starting
    from the aufbau determinant.

    Raises:
        ValueError: if the parameter count does not match the program.
    """
    parameters = np.asarray(parameters, dtype=float)
    if parameters.size != program.n_parameters:
        raise ValueError(f"{parameters.size} parameters for a program with {program.n_parameters}")
    if engine is not None:
        return engine.full_state(engine.prepare(program.factors(), parameters))
    psi = np.zeros(1 << program.n_qubits, dtype=complex)
    psi[sum(1 << p for p in hf_occupation(program.n_alpha, program.n_beta))] = 1.0
    for group, theta in zip(program.factors(), parameters):
        psi = compiled_generator(group, program.n_qubits).apply(psi, float(theta))
    return psi
