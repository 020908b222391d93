"""Executable ansatz description: an ordered list of exponential factors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import OperatorGroup


@dataclass(frozen=True)
class OperatorBlock:
    """A parent operator and the scatterers that ride on it.

    Within a block the parent is applied first, then the scatterers in the
    stored order.
    """

    parent: OperatorGroup
    scatterers: tuple[OperatorGroup, ...] = ()
    screening_energy: float | None = None
    scatterer_energies: tuple[float, ...] = ()

    def factors(self) -> tuple[OperatorGroup, ...]:
        return (self.parent,) + self.scatterers


@dataclass(frozen=True)
class AnsatzProgram:
    """Blocks in application order (the first block acts on the reference first),
    followed by the single excitations.

    Every factor carries its own parameter, so ``n_parameters`` equals the
    number of exponentials. ``initial`` holds starting values in factor order.
    """

    n_qubits: int
    n_alpha: int
    n_beta: int
    blocks: tuple[OperatorBlock, ...] = ()
    singles: tuple[OperatorGroup, ...] = ()
    initial: tuple[float, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.initial is not None and len(self.initial) != self.n_parameters:
            raise ValueError(f"{len(self.initial)} initial values for {self.n_parameters} parameters")

    def factors(self) -> list[OperatorGroup]:
        out = []
        for block in self.blocks:
            out.extend(block.factors())
        out.extend(self.singles)
        return out

    @property
    def n_parameters(self) -> int:
        return sum(1 + len(b.scatterers) for b in self.blocks) + len(self.singles)

    @property
    def n_scatterers(self) -> int:
        return sum(len(b.scatterers) for b in self.blocks)

    def generators(self):
        return [f.generator() for f in self.factors()]

    def initial_parameters(self) -> np.ndarray:
        if self.initial is None:
            return np.zeros(self.n_parameters)
        return np.array(self.initial, dtype=float)

    def with_initial(self, values) -> AnsatzProgram:
        return AnsatzProgram(
            self.n_qubits, self.n_alpha, self.n_beta, self.blocks, self.singles, tuple(map(float, values)), self.name
        )
