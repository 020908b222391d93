"""The DMET macro-cycle: per-fragment solves, electron-count residual and
secant update of the global chemical potential.

Mean-field quantities and baths are built once per geometry and reused for
every trial ``mu``; only the embedded Hamiltonians change.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import (
    adapt_construct,
    build_uccsd,
    build_uccsdt,
    compass_construct,
    embed_parameters,
)
from .ansatz.program import AnsatzProgram
from .chem import IntegralSet, build_h_chain, compute_sto3g_integrals, lowdin_localize, read_fcidump, solve_rhf
from .chem.scf import MeanFieldState
from .embedding import (
    ActiveSpace,
    EmbeddedSubsystem,
    FragmentScheme,
    apply_active_space,
    build_embedding_hamiltonian,
    build_subsystem,
    embedded_mean_field,
    expand_active_rdms,
    fragment_electron_count,
    fragment_energy,
    partition,
    rotate_rdms,
    total_energy,
)
from .fci import fci_ground_state
from .qubit.resources import ResourceEstimate, count_resources
from .vqe import OptimizerSettings, VqeEngine, optimize_global

logger = logging.getLogger(__name__)

SOLVERS = ("fci", "uccsd", "uccsdt", "compass", "adapt", "hf")


class SolverFailure(RuntimeError):
    """A fragment solve failed; carries the fragment index and the trial ``mu``."""

    def __init__(self, fragment: int, mu: float, cause: BaseException):
        super().__init__(f"fragment {fragment} at mu={mu:.10g}: {cause}")
        self.fragment = fragment
        self.mu = mu


@dataclass(frozen=True)
class HChainSystem:
    n: int
    d: float
    topology: str = "linear"


@dataclass(frozen=True)
class FcidumpSystem:
    path: str
    atom_map_path: str | None = None


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the variational solvers (ignored by ``fci`` and ``hf``)."""

    pool_kind: str = "partial_pairing"
    eps1: float = 1e-5
    eps2: float = 1e-7
    cso_set: tuple[int, ...] | None = None
    adapt_grad_tol: float = 1e-4
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)


@dataclass(frozen=True)
class DmetConfig:
    """Everything a DMET run needs.

    ``active_space`` is either one space for every fragment or a mapping from
    fragment index to its own space. A space is an :class:`ActiveSpace` or an
    ``(n_active_electrons, n_active_orbitals)`` pair, resolved per fragment by
    freezing the lowest occupied and highest virtual embedded orbitals.
    """

    system: HChainSystem | FcidumpSystem | IntegralSet
    fragments: FragmentScheme | int
    solver: str = "fci"
    options: SolverOptions = field(default_factory=SolverOptions)
    active_space: ActiveSpace | tuple[int, int] | dict | None = None
    tolerance: float = 1e-5
    max_cycles: int = 50
    mu0: float = 0.0
    mu1: float = 1e-3
    workers: int | None = None

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; valid solvers: {', '.join(SOLVERS)}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if self.mu0 == self.mu1:
            raise ValueError("secant seeds mu0 and mu1 must differ")

    def with_solver(self, solver: str) -> DmetConfig:
        return dataclasses.replace(self, solver=solver)


@dataclass(frozen=True, eq=False)
class DmetContext:
    """Mean-field data shared by every residual evaluation of one geometry."""

    integrals: IntegralSet
    mean_field: MeanFieldState
    integrals_lo: IntegralSet
    fragment_orbitals: list[list[int]]
    subsystems: list[EmbeddedSubsystem]

    @property
    def n_electrons(self) -> int:
        return self.integrals.n_electrons

    @property
    def e_nuc(self) -> float:
        return self.integrals.e_nuc


def load_integrals(system) -> IntegralSet:
    if isinstance(system, IntegralSet):
        return system
    if isinstance(system, HChainSystem):
        return compute_sto3g_integrals(build_h_chain(system.n, system.d, system.topology))
    if isinstance(system, FcidumpSystem):
        return read_fcidump(Path(system.path), system.atom_map_path)
    raise TypeError(f"unsupported system description {type(system).__name__}")


def build_context(config: DmetConfig) -> DmetContext:
    ints = load_integrals(config.system)
    mf = solve_rhf(ints, ints.n_electrons)
    basis, d_lo = lowdin_localize(ints, mf)
    ints_lo = ints.rotated(basis.W)
    n_atoms = max(basis.atom_of_orbital) + 1
    scheme = config.fragments
    if isinstance(scheme, int):
        scheme = FragmentScheme.chunks(n_atoms, scheme)
    frags = partition(scheme, basis)
    subs = [build_subsystem(ints_lo, f, d_lo) for f in frags]
    logger.info(
        "context: %d orbitals, %d electrons, E_rhf=%.10f, %d fragments",
        ints.n_orb,
        ints.n_electrons,
        mf.energy,
        len(subs),
    )
    return DmetContext(ints, mf, ints_lo, frags, subs)


@dataclass(frozen=True, eq=False)
class FragmentSolution:
    energy: float
    n_electrons: float
    solver_energy: float
    resources: ResourceEstimate
    n_scatterers: int
    program: AnsatzProgram | None = None


@dataclass(frozen=True, eq=False)
class CycleRecord:
    mu: float
    residual: float
    fragment_energies: tuple[float, ...]
    resources: tuple[ResourceEstimate, ...]
    total_energy: float

    @property
    def parameter_counts(self) -> tuple[int, ...]:
        return tuple(r.n_parameters for r in self.resources)

    @property
    def cnot_counts(self) -> tuple[int, ...]:
        return tuple(r.n_cnot for r in self.resources)


@dataclass(frozen=True, eq=False)
class DmetResult:
    energy: float
    mu: float
    residual: float
    converged: bool
    trace: tuple[CycleRecord, ...]
    solver: str
    e_rhf: float
    programs: tuple = ()

    @property
    def cycles(self) -> int:
        return len(self.trace)

    def average_resources(self) -> tuple[float, float]:
        """Mean parameter and CNOT counts over all (fragment, cycle) pairs."""
        params = [r.n_parameters for c in self.trace for r in c.resources]
        cnots = [r.n_cnot for c in self.trace for r in c.resources]
        if not params:
            return 0.0, 0.0
        return float(np.mean(params)), float(np.mean(cnots))


class FragmentSolver:
    """High-level solver for one fragment.

    ``solve`` keeps no state between calls, so its result depends only on ``mu``.
    """

    def __init__(self, sub: EmbeddedSubsystem, index: int, config: DmetConfig):
        self.sub = sub
        self.index = index
        self.config = config
        space = config.active_space
        if isinstance(space, dict):
            space = space.get(index)
        if isinstance(space, tuple):
            space = ActiveSpace.from_counts(sub.n_orb, sub.n_electrons, *space)
        self.space = space

    def _hamiltonian(self, mu: float):
        ham = build_embedding_hamiltonian(self.sub, mu)
        emf = embedded_mean_field(self.sub, mu)
        ham_mo = ham.rotated(emf.coeff)
        n_el = self.sub.n_electrons
        if self.space is not None:
            return emf, apply_active_space(ham_mo, self.space, n_el), self.space.n_active_electrons
        return emf, ham_mo, n_el

    def solve(self, mu: float) -> FragmentSolution:
        emf, ham, n_el = self._hamiltonian(mu)
        if n_el % 2:
            raise ValueError(f"embedded problem has an odd electron count {n_el}")
        na = nb = n_el // 2
        solver = self.config.solver
        opts = self.config.options
        program = None
        n_scatterers = 0
        if solver == "fci":
            res = fci_ground_state(ham, na, nb)
            e_solver, rdm1, rdm2 = res.energy, res.rdm1, res.rdm2
            resources = ResourceEstimate(0, 0)
        else:
            engine = VqeEngine(ham, na, nb)
            if solver == "hf":
                program = AnsatzProgram(ham.n_qubits, na, nb, name="hf")
                vqe = optimize_global(engine, program, opts.optimizer)
            elif solver in ("uccsd", "uccsdt"):
                program = build_uccsd(ham.n_qubits, na, nb)
                vqe = optimize_global(engine, program, opts.optimizer)
                if solver == "uccsdt":
                    large = build_uccsdt(ham.n_qubits, na, nb)
                    program = large.with_initial(embed_parameters(program, vqe.parameters, large))
                    vqe = optimize_global(engine, program, opts.optimizer)
            elif solver == "compass":
                program, _ = compass_construct(engine, opts.eps1, opts.eps2, opts.pool_kind, opts.cso_set)
                vqe = _best_start(engine, program, opts.optimizer)
                n_scatterers = program.n_scatterers
            elif solver == "adapt":
                program, vqe = adapt_construct(engine, opts.adapt_grad_tol, opts.optimizer)
            else:  # pragma: no cover - rejected by DmetConfig
                raise ValueError(solver)
            e_solver = vqe.energy
            rdm1, rdm2 = engine.rdms(engine.prepare(program.factors(), vqe.parameters))
            resources = count_resources(program, ham.n_qubits)
        if self.space is not None:
            rdm1, rdm2 = expand_active_rdms(rdm1, rdm2, self.space, self.sub.n_orb)
        rdm1, rdm2 = rotate_rdms(rdm1, rdm2, emf.coeff)
        return FragmentSolution(
            energy=fragment_energy(self.sub, rdm1, rdm2),
            n_electrons=fragment_electron_count(rdm1, range(self.sub.n_fragment)),
            solver_energy=float(e_solver),
            resources=resources,
            n_scatterers=n_scatterers,
            program=program,
        )


COMPASS_START_SCALES = (1.0, 1.5, 2.0, 3.0)


def _best_start(engine, program, settings, scales=COMPASS_START_SCALES):
    """Optimize from the screening amplitudes times each of ``scales``; keep the lowest energy.

    Product ansatze have local minima when bonds are stretched, and the
    screening values (each factor optimized alone) tend to underestimate the
    coupled amplitudes. The start set is fixed, so the result is a function
    of the embedded Hamiltonian only.
    """
    x0 = np.asarray(program.initial_parameters(), dtype=float)
    best = None
    for scale in scales:
        res = optimize_global(engine, program, settings, scale * x0)
        if best is None or res.energy < best.energy - 1e-12:
            best = res
    return best


def _worker_count(config: DmetConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    env = os.environ.get("THREADS")
    return max(1, int(env)) if env and env.isdigit() else 1


class DmetProblem:
    """Context plus per-fragment solvers for one configuration."""

    def __init__(self, config: DmetConfig, context: DmetContext | None = None):
        self.config = config
        self.context = context or build_context(config)
        self.solvers = [FragmentSolver(s, i, config) for i, s in enumerate(self.context.subsystems)]

    def solve_fragments(self, mu: float) -> list[FragmentSolution]:
        def run(fs: FragmentSolver):
            try:
                return fs.solve(mu)
            except Exception as exc:
                raise SolverFailure(fs.index, mu, exc) from exc

        workers = _worker_count(self.config)
        if workers == 1 or len(self.solvers) == 1:
            return [run(fs) for fs in self.solvers]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, self.solvers))

    def evaluate(self, mu: float) -> tuple[CycleRecord, list[FragmentSolution]]:
        sols = self.solve_fragments(mu)
        residual = sum(s.n_electrons for s in sols) - self.context.n_electrons
        energies = tuple(s.energy for s in sols)
        record = CycleRecord(
            mu=float(mu),
            residual=float(residual),
            fragment_energies=energies,
            resources=tuple(s.resources for s in sols),
            total_energy=total_energy(energies, self.context.e_nuc),
        )
        logger.info("mu=%.10f  dN=%.3e  E=%.10f", mu, residual, record.total_energy)
        return record, sols

    def residual(self, mu: float) -> float:
        return self.evaluate(mu)[0].residual


def electron_residual(mu: float, config: DmetConfig, context: DmetContext | None = None) -> float:
    """``N_tot(mu) - N`` summed over fragment populations, solving every fragment from scratch."""
    return DmetProblem(config, context).residual(mu)


def secant_search(residual, mu0: float, mu1: float, tol: float, max_cycles: int):
    """Root of ``residual(mu)`` by the secant method.

    Returns ``(history, converged)`` with ``history`` the list
    of ``(mu, residual(mu))`` evaluations in order. A denominator below 1e-14
    nudges ``mu`` by 1e-4 instead of dividing.
    """
    history: list[tuple[float, float]] = []
    mu = mu0
    while len(history) < max_cycles:
        r = float(residual(mu))
        history.append((mu, r))
        if abs(r) < tol:
            return history, True
        if len(history) == 1:
            mu = mu1
            continue
        (m1, r1), (m2, r2) = history[-2], history[-1]
        denom = r2 - r1
        mu = m2 + 1e-4 if abs(denom) < 1e-14 else m2 - r2 * (m2 - m1) / denom
    return history, False


def run_dmet(config: DmetConfig, context: DmetContext | None = None) -> DmetResult:
    """Secant iteration on ``mu`` until ``|dN| < tolerance`` or ``max_cycles`` evaluations."""
    problem = DmetProblem(config, context)
    trace: list[CycleRecord] = []
    programs = []

    def residual(mu):
        record, sols = problem.evaluate(mu)
        trace.append(record)
        programs.append(tuple(s.program for s in sols))
        return record.residual

    _, converged = secant_search(residual, config.mu0, config.mu1, config.tolerance, config.max_cycles)
    if not converged:
        logger.warning("DMET did not converge in %d cycles (dN=%.3e)", config.max_cycles, trace[-1].residual)
    last = trace[-1]
    return DmetResult(
        energy=last.total_energy,
        mu=last.mu,
        residual=last.residual,
        converged=converged,
        trace=tuple(trace),
        solver=config.solver,
        e_rhf=problem.context.mean_field.energy,
        programs=tuple(programs),
    )


@dataclass(frozen=True)
class ScanPoint:
    d: float
    result: DmetResult | None
    error: str | None = None


def run_scan(config: DmetConfig, bond_lengths) -> list[ScanPoint]:
    """Independent DMET runs over H-chain bond lengths, in input order.

    A failing point is recorded with its error and the scan moves on.
    """
    if not isinstance(config.system, HChainSystem):
        raise ValueError("scans need an h_chain system")
    out = []
    for d in bond_lengths:
        cfg = dataclasses.replace(config, system=dataclasses.replace(config.system, d=float(d)))
        try:
            out.append(ScanPoint(float(d), run_dmet(cfg)))
        except Exception as exc:
            logger.error("scan point d=%g failed: %s", d, exc)
            out.append(ScanPoint(float(d), None, str(exc)))
    return out
