"""Static unitary coupled-cluster programs."""

from __future__ import annotations

from .pools import doubles_groups, singles_groups, triples_groups
from .program import AnsatzProgram, OperatorBlock


def closed_shell_counts(n_qubits: int, n_alpha: int, n_beta: int) -> tuple[int, int]:
    """Occupied and virtual spin-orbital counts for a closed-shell aufbau reference."""
    if n_alpha != n_beta:
        raise ValueError(f"closed-shell reference required, got n_alpha={n_alpha}, n_beta={n_beta}")
    if n_qubits % 2 or not 0 <= 2 * n_alpha <= n_qubits:
        raise ValueError(f"cannot place {2 * n_alpha} electrons in {n_qubits} spin orbitals")
    return 2 * n_alpha, n_qubits - 2 * n_alpha


def build_uccsd(n_qubits: int, n_alpha: int, n_beta: int) -> AnsatzProgram:
    """Spin-adapted UCCSD: doubles in canonical order, then singles, zero start."""
    n_occ, n_virt = closed_shell_counts(n_qubits, n_alpha, n_beta)
    blocks = tuple(OperatorBlock(g) for g in doubles_groups(n_occ, n_virt))
    return AnsatzProgram(n_qubits, n_alpha, n_beta, blocks, tuple(singles_groups(n_occ, n_virt)), name="uccsd")


def build_uccsdt(n_qubits: int, n_alpha: int, n_beta: int) -> AnsatzProgram:
    """UCCSD plus spin-adapted triples, placed after the doubles."""
    n_occ, n_virt = closed_shell_counts(n_qubits, n_alpha, n_beta)
    parents = doubles_groups(n_occ, n_virt) + triples_groups(n_occ, n_virt)
    blocks = tuple(OperatorBlock(g) for g in parents)
    return AnsatzProgram(n_qubits, n_alpha, n_beta, blocks, tuple(singles_groups(n_occ, n_virt)), name="uccsdt")


def embed_parameters(small: AnsatzProgram, small_params, large: AnsatzProgram):
    """Map optimal parameters of ``small`` onto the matching factors of ``large``.

    Factors of ``large`` absent from ``small`` start at zero. Used to warm-start
    UCCSDT from the UCCSD optimum so its energy can only go down.
    """
    values = {}
    for group, theta in zip(small.factors(), small_params):
        values.setdefault(group, float(theta))
    return [values.get(g, 0.0) for g in large.factors()]
