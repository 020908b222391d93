"""Integrals, mean-field solution and orbital localization."""

from .fcidump import FcidumpParseError, read_atom_map, read_fcidump, write_atom_map, write_fcidump
from .geometry import ANGSTROM_TO_BOHR, Geometry, InvalidGeometryError, build_h_chain
from .integrals import IntegralSet, chem_to_phys, phys_to_chem, transform_one_body, transform_two_body
from .localize import LocalizedBasis, lowdin_localize
from .scf import IllConditionedBasisError, MeanFieldState, ScfConvergenceError, solve_rhf
from .sto3g import UnsupportedElementError, compute_sto3g_integrals

__all__ = [
    "ANGSTROM_TO_BOHR",
    "FcidumpParseError",
    "Geometry",
    "IllConditionedBasisError",
    "IntegralSet",
    "InvalidGeometryError",
    "LocalizedBasis",
    "MeanFieldState",
    "ScfConvergenceError",
    "UnsupportedElementError",
    "build_h_chain",
    "chem_to_phys",
    "compute_sto3g_integrals",
    "lowdin_localize",
    "phys_to_chem",
    "read_atom_map",
    "read_fcidump",
    "solve_rhf",
    "transform_one_body",
    "transform_two_body",
    "write_atom_map",
    "write_fcidump",
]
