"""Dynamic ansatz construction by energy screening of doubles and scatterers.

Stage one optimizes every spin-adapted double alone on the reference and keeps
those that lower the energy by more than ``eps1``. Each kept double opens a
block; blocks are applied in descending order of their energy gain. Stage two
pairs each block parent with every scatterer sharing a contractible orbital
with it and keeps the scatterer when the two-parameter circuit gains more than
``eps2`` over the parent alone. All singles are appended last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cmp_to_key

from .operators import OperatorGroup, single_group
from .pools import default_cso_set, doubles_groups, generate_scatterer_pool, shares_cso, singles_groups
from .program import AnsatzProgram, OperatorBlock
from .ucc import closed_shell_counts

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


class ScreeningError(RuntimeError):
    """A micro-cycle failed; ``operator`` names the candidate."""

    def __init__(self, message: str, operator: str):
        super().__init__(f"{operator}: {message}")
        self.operator = operator


@dataclass(frozen=True)
class CandidateRecord:
    label: str
    delta_e: float
    accepted: bool
    converged: bool


@dataclass
class CompassReport:
    reference_energy: float = 0.0
    doubles: list[CandidateRecord] = field(default_factory=list)
    scatterers: list[tuple[str, CandidateRecord]] = field(default_factory=list)


def _by_energy(items):
    """Sort ``(delta_e, group, payload)`` by descending ``delta_e``; near ties fall back to the canonical key."""

    def cmp(x, y):
        if abs(x[0] - y[0]) > TIE_TOL:
            return -1 if x[0] > y[0] else 1
        kx, ky = x[1].key, y[1].key
        return (kx > ky) - (kx < ky)

    return sorted(items, key=cmp_to_key(cmp))


def compass_construct(
    engine,
    eps1: float = 1e-5,
    eps2: float = 1e-7,
    pool_kind: str = "partial_pairing",
    cso_set=None,
    warm_start: dict | None = None,
) -> tuple[AnsatzProgram, CompassReport]:
    """Screen the pools against ``engine``'s Hamiltonian and return the program.

    ``engine`` is a :class:`dmet_compass.vqe.VqeEngine`. ``warm_start`` maps
    ``(block parent, factor)`` to a previously optimized angle; matching factors
    start there instead of at their screening value.
    """
    from ..vqe import optimize_single_parameter, optimize_two_parameter

    if eps1 <= 0 or eps2 <= 0:
        raise ValueError("screening thresholds must be positive")
    n_occ, n_virt = closed_shell_counts(engine.n_qubits, engine.n_alpha, engine.n_beta)
    cso = default_cso_set(n_occ, n_virt) if cso_set is None else frozenset(cso_set)
    report = CompassReport(reference_energy=engine.reference_energy)
    e_ref = report.reference_energy

    kept = []
    for group in doubles_groups(n_occ, n_virt):
        try:
            res = optimize_single_parameter(engine, group)
        except Exception as exc:  # pragma: no cover - numerical failure path
            raise ScreeningError(str(exc), group.label()) from exc
        delta = e_ref - res.energy if res.converged else 0.0
        accepted = delta > eps1
        report.doubles.append(CandidateRecord(group.label(), delta, accepted, res.converged))
        if accepted:
            kept.append((delta, group, res))

    scatterers = [single_group(s) for s in generate_scatterer_pool(n_occ, n_virt, pool_kind, cso)]
    blocks, initial = [], []
    for delta, parent, res in _by_energy(kept):
        found = []
        for sg in scatterers:
            if not shares_cso(sg.terms[0][1], parent):
                continue
            try:
                pair = optimize_two_parameter(engine, parent, sg, res.parameters[0])
            except Exception as exc:  # pragma: no cover
                raise ScreeningError(str(exc), f"{parent.label()} / {sg.label()}") from exc
            gain = res.energy - pair.energy if pair.converged else 0.0
            accepted = gain > eps2
            report.scatterers.append((parent.label(), CandidateRecord(sg.label(), gain, accepted, pair.converged)))
            if accepted:
                found.append((gain, sg, pair))
        found = _by_energy(found)
        blocks.append(
            OperatorBlock(
                parent,
                tuple(sg for _, sg, _ in found),
                screening_energy=delta,
                scatterer_energies=tuple(g for g, _, _ in found),
            )
        )
        initial.append(res.parameters[0])
        initial.extend(pair.parameters[1] for _, _, pair in found)

    singles = tuple(singles_groups(n_occ, n_virt))
    initial.extend(0.0 for _ in singles)
    program = AnsatzProgram(engine.n_qubits, engine.n_alpha, engine.n_beta, tuple(blocks), singles, name="compass")
    if warm_start:
        initial = [warm_start.get(k, v) for k, v in zip(factor_keys(program), initial)]
    return program.with_initial(initial), report


def factor_keys(program: AnsatzProgram) -> list[tuple[OperatorGroup | None, OperatorGroup]]:
    """Stable identity of every factor: ``(block parent or None for singles, factor)``."""
    keys = []
    for block in program.blocks:
        keys.extend((block.parent, f) for f in block.factors())
    keys.extend((None, s) for s in program.singles)
    return keys
