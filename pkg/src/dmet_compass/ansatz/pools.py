"""Operator pools relative to a closed-shell aufbau reference.

``n_occ`` and ``n_virt`` count spin orbitals; occupied spin orbitals are
``0 .. n_occ-1`` and virtual ones ``n_occ .. n_occ+n_virt-1``.
"""

from __future__ import annotations

from itertools import combinations

from .operators import ExcitationOperator, ScattererOperator, OperatorGroup, spin, spin_adapt

POOL_KINDS = ("partial_pairing", "opposite_spin")


def _excitations(n_occ: int, n_virt: int, rank: int) -> list[ExcitationOperator]:
    occ = range(n_occ)
    virt = range(n_occ, n_occ + n_virt)
    out = []
    for o in combinations(occ, rank):
        for v in combinations(virt, rank):
            if sorted(map(spin, o)) == sorted(map(spin, v)):
                out.append(ExcitationOperator(o, v))
    return sorted(out, key=lambda e: (e.occupied, e.virtual))


def generate_single_pool(n_occ: int, n_virt: int) -> list[ExcitationOperator]:
    return _excitations(n_occ, n_virt, 1)


def generate_double_pool(n_occ: int, n_virt: int) -> list[ExcitationOperator]:
    """All spin-conserving doubles, lexicographic in ``(i, j, a, b)``."""
    return _excitations(n_occ, n_virt, 2)


def generate_triple_pool(n_occ: int, n_virt: int) -> list[ExcitationOperator]:
    return _excitations(n_occ, n_virt, 3)


def default_cso_set(n_occ: int, n_virt: int) -> frozenset[int]:
    """Both spin orbitals of the HOMO and of the LUMO."""
    cso = set()
    if n_occ >= 2:
        cso |= {n_occ - 2, n_occ - 1}
    if n_virt >= 2:
        cso |= {n_occ, n_occ + 1}
    return frozenset(cso)


def generate_scatterer_pool(
    n_occ: int, n_virt: int, pool_kind: str = "partial_pairing", cso_set=None
) -> list[ScattererOperator]:
    """Hole (``S_h``) and particle (``S_p``) scatterers.

    ``partial_pairing``: the two destroyed holes of ``S_h`` (or the two created
    particles of ``S_p``) are the alpha/beta pair of one spatial orbital.
    ``opposite_spin``: the excitation vertex ``i -> a`` and the scattering
    vertex (``j -> m`` or ``e -> b``) carry opposite spins.
    """
    if pool_kind not in POOL_KINDS:
        raise ValueError(f"unknown scatterer pool {pool_kind!r}; expected one of {POOL_KINDS}")
    cso = default_cso_set(n_occ, n_virt) if cso_set is None else frozenset(cso_set)
    occ = list(range(n_occ))
    virt = list(range(n_occ, n_occ + n_virt))
    out: list[ScattererOperator] = []
    if pool_kind == "partial_pairing":
        for k in range(0, n_occ - 1, 2):
            i, j = k, k + 1
            for m in occ:
                if m in (i, j) or m not in cso:
                    continue
                for a in virt:
                    if spin(a) != spin(m):
                        out.append(ScattererOperator("S_h", (a, m), (i, j)))
        for k in range(n_occ, n_occ + n_virt - 1, 2):
            a, b = k, k + 1
            for e in virt:
                if e in (a, b) or e not in cso:
                    continue
                for i in occ:
                    if spin(i) != spin(e):
                        out.append(ScattererOperator("S_p", (a, b), (i, e)))
    else:
        for i in occ:
            for a in virt:
                if spin(a) != spin(i):
                    continue
                for j in occ:
                    if j == i or spin(j) == spin(i):
                        continue
                    for m in occ:
                        if m in (i, j) or m not in cso or spin(m) != spin(j):
                            continue
                        out.append(ScattererOperator("S_h", (a, m), (i, j)))
                for e in virt:
                    if e == a or e not in cso or spin(e) == spin(i):
                        continue
                    for b in virt:
                        if b in (a, e) or spin(b) != spin(e):
                            continue
                        out.append(ScattererOperator("S_p", (a, b), (i, e)))
    return sorted(set(out), key=lambda s: (s.kind, s.destroyed, s.created))


def shares_cso(s: ScattererOperator, t: ExcitationOperator | OperatorGroup) -> bool:
    """True if the scatterer's contractible index is touched by ``t``."""
    return s.cso in t.indices


def singles_groups(n_occ: int, n_virt: int) -> list[OperatorGroup]:
    return spin_adapt(generate_single_pool(n_occ, n_virt))


def doubles_groups(n_occ: int, n_virt: int) -> list[OperatorGroup]:
    return spin_adapt(generate_double_pool(n_occ, n_virt))


def triples_groups(n_occ: int, n_virt: int) -> list[OperatorGroup]:
    return spin_adapt(generate_triple_pool(n_occ, n_virt))
