"""Molecular geometries and hydrogen-chain builders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ANGSTROM_TO_BOHR = 1.8897259886


class InvalidGeometryError(ValueError):
    """Raised for malformed or degenerate geometries."""


@dataclass(frozen=True)
class Geometry:
    """Atoms with Cartesian positions in Angstrom.

    Attributes:
        atoms: Sequence of ``(element, (x, y, z))`` pairs.
        charge: Total molecular charge.
        multiplicity: Spin multiplicity ``2S + 1``.
    """

    atoms: tuple[tuple[str, tuple[float, float, float]], ...]
    charge: int = 0
    multiplicity: int = 1
    label: str = field(default="", compare=False)

    def __post_init__(self):
        coords = self.coordinates()
        if not np.all(np.isfinite(coords)):
            raise InvalidGeometryError("atomic positions must be finite")
        n = len(self.atoms)
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(coords[i] - coords[j]) <= 1e-6:
                    raise InvalidGeometryError(f"atoms {i} and {j} coincide")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def elements(self) -> list[str]:
        return [el for el, _ in self.atoms]

    def coordinates(self, unit: str = "angstrom") -> np.ndarray:
        """Return an ``(n_atoms, 3)`` array in ``angstrom`` or ``bohr``."""
        xyz = np.array([pos for _, pos in self.atoms], dtype=float).reshape(-1, 3)
        if unit == "bohr":
            return xyz * ANGSTROM_TO_BOHR
        if unit != "angstrom":
            raise ValueError(f"unknown unit {unit!r}")
        return xyz

    def permuted(self, order) -> Geometry:
        return Geometry(tuple(self.atoms[i] for i in order), self.charge, self.multiplicity, self.label)


def build_h_chain(n: int, d: float, topology: str = "linear") -> Geometry:
    """Equally spaced hydrogen atoms on a line or a ring.

    Args:
        n: Number of hydrogen atoms (at least 2).
        d: Nearest-neighbour distance in Angstrom.
        topology: ``"linear"`` places atoms at ``(k d, 0, 0)``; ``"ring"`` puts
            them on a regular polygon whose neighbouring atoms sit ``d`` apart.
    """
    if n < 2:
        raise InvalidGeometryError(f"an H chain needs at least 2 atoms, got {n}")
    if not d > 0:
        raise InvalidGeometryError(f"bond length must be positive, got {d}")
    if topology == "linear":
        atoms = tuple(("H", (k * d, 0.0, 0.0)) for k in range(n))
    elif topology == "ring":
        # chord between neighbours is d, so the radius follows from the chord length
        radius = d / (2.0 * math.sin(math.pi / n))
        atoms = tuple(
            ("H", (radius * math.cos(2 * math.pi * k / n), radius * math.sin(2 * math.pi * k / n), 0.0))
            for k in range(n)
        )
    else:
        raise InvalidGeometryError(f"unknown topology {topology!r}")
    return Geometry(atoms, label=f"H{n}-{topology}-{d:g}")
