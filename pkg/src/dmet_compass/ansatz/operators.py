"""Excitation and scatterer operators over spin orbitals.

Spin orbital ``p`` has spin ``p % 2`` (0 alpha, 1 beta). Operators are
defined relative to the aufbau reference in which the ``n_occ`` lowest spin
orbitals are filled.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..qubit.fermion import FermionOperator
from ..qubit.simulator import CompiledGenerator, fermion_sparse


def spin(p: int) -> int:
    return p % 2


def flip(p: int) -> int:
    return p ^ 1


def _sort_sign(seq) -> tuple[tuple[int, ...], float]:
    """Sorted copy of ``seq`` and the parity of the sorting permutation."""
    seq = list(seq)
    sign = 1.0
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return tuple(seq), sign


@dataclass(frozen=True, order=True)
class ExcitationOperator:
    """``a+_{a} a+_{b} ... a_{j} a_{i}`` with ``occupied=(i, j, ...)`` and ``virtual=(a, b, ...)``."""

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]

    def __post_init__(self):
        if len(self.occupied) != len(self.virtual) or not 1 <= len(self.occupied) <= 3:
            raise ValueError("excitation needs matching occupied/virtual tuples of rank 1-3")
        if len(set(self.occupied)) != len(self.occupied) or len(set(self.virtual)) != len(self.virtual):
            raise ValueError("repeated index in excitation")
        if sorted(map(spin, self.occupied)) != sorted(map(spin, self.virtual)):
            raise ValueError(f"excitation {self.occupied}->{self.virtual} does not conserve spin")

    @property
    def kind(self) -> str:
        return ("single", "double", "triple")[len(self.occupied) - 1]

    @property
    def indices(self) -> frozenset[int]:
        return frozenset(self.occupied) | frozenset(self.virtual)

    def ladders(self):
        return tuple((a, True) for a in self.virtual) + tuple((i, False) for i in reversed(self.occupied))

    def fermion(self) -> FermionOperator:
        return FermionOperator.product(self.ladders())

    def spin_flipped(self) -> tuple[ExcitationOperator, float]:
        """Spin-complemented operator in canonical index order, with the reordering sign."""
        occ, s1 = _sort_sign(flip(i) for i in self.occupied)
        virt, s2 = _sort_sign(flip(a) for a in self.virtual)
        return ExcitationOperator(occ, virt), s1 * s2

    def label(self) -> str:
        return f"T{','.join(map(str, self.occupied))}->{','.join(map(str, self.virtual))}"


@dataclass(frozen=True, order=True)
class ScattererOperator:
    """Two-body operator of net excitation rank one.

    ``S_h``: ``a+_a a+_m a_j a_i`` with ``i, j, m`` occupied and ``a`` virtual.
    ``S_p``: ``a+_a a+_b a_e a_i`` with ``i`` occupied and ``a, b, e`` virtual.
    The contractible index (CSO) is ``m`` for ``S_h`` and ``e`` for ``S_p``.
    """

    kind: str
    created: tuple[int, int]
    destroyed: tuple[int, int]

    def __post_init__(self):
        if self.kind not in ("S_h", "S_p"):
            raise ValueError(f"unknown scatterer kind {self.kind!r}")
        if len(set(self.created)) != 2 or len(set(self.destroyed)) != 2:
            raise ValueError("repeated index in scatterer")
        if sorted(map(spin, self.created)) != sorted(map(spin, self.destroyed)):
            raise ValueError("scatterer does not conserve spin")
        if set(self.created) & set(self.destroyed):
            raise ValueError("scatterer creates and destroys the same spin orbital")

    @property
    def cso(self) -> int:
        # S_h: created = (a, m); S_p: destroyed = (i, e)
        return self.created[1] if self.kind == "S_h" else self.destroyed[1]

    @property
    def indices(self) -> frozenset[int]:
        return frozenset(self.created) | frozenset(self.destroyed)

    def ladders(self):
        return tuple((p, True) for p in self.created) + tuple((q, False) for q in reversed(self.destroyed))

    def fermion(self) -> FermionOperator:
        return FermionOperator.product(self.ladders())

    def label(self) -> str:
        return f"{self.kind}{','.join(map(str, self.destroyed))}->{','.join(map(str, self.created))}"


@dataclass(frozen=True)
class OperatorGroup:
    """Operators sharing one variational parameter, ``G = sum_k c_k (O_k - O_k^+)``."""

    terms: tuple[tuple[float, ExcitationOperator | ScattererOperator], ...]

    @property
    def kind(self) -> str:
        op = self.terms[0][1]
        return op.kind

    @property
    def is_scatterer(self) -> bool:
        return isinstance(self.terms[0][1], ScattererOperator)

    @property
    def indices(self) -> frozenset[int]:
        return frozenset().union(*(op.indices for _, op in self.terms))

    @property
    def key(self):
        """Canonical ordering key used for deterministic tie-breaking."""
        order = {"single": 0, "double": 1, "triple": 2, "S_h": 3, "S_p": 4}
        op = self.terms[0][1]
        if isinstance(op, ExcitationOperator):
            return (order[op.kind], op.occupied, op.virtual)
        return (order[op.kind], op.destroyed, op.created)

    def generator(self) -> FermionOperator:
        gen = FermionOperator()
        for c, op in self.terms:
            t = op.fermion()
            gen = gen + c * (t - t.adjoint())
        return gen

    def label(self) -> str:
        return " + ".join(("" if c > 0 else "-") + op.label() for c, op in self.terms)


def single_group(op) -> OperatorGroup:
    return OperatorGroup(((1.0, op),))


def spin_adapt(ops) -> list[OperatorGroup]:
    """Pair every excitation with its spin complement, keeping first-seen order."""
    seen = set()
    groups = []
    for op in ops:
        if op in seen:
            continue
        partner, sign = op.spin_flipped()
        seen.add(op)
        if partner == op:
            groups.append(OperatorGroup(((1.0, op),)))
        else:
            seen.add(partner)
            groups.append(OperatorGroup(((1.0, op), (sign, partner))))
    return groups


@lru_cache(maxsize=8192)
def compiled_generator(group: OperatorGroup, n_qubits: int, sector: tuple[int, ...] | None = None) -> CompiledGenerator:
    """Exponentiable form of a group, optionally restricted to a basis-index sector."""
    if sector is None:
        return CompiledGenerator.from_fermion(group.generator(), n_qubits)
    cols = np.asarray(sector, dtype=np.int64)
    full = fermion_sparse(group.generator(), n_qubits, columns=cols)
    return CompiledGenerator.from_sparse(full[cols][:, cols])
