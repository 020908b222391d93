"""Gradient-driven ansatz growth from a singles-and-doubles pool."""

from __future__ import annotations

import logging

import numpy as np

from .pools import doubles_groups, singles_groups
from .program import AnsatzProgram, OperatorBlock
from .ucc import closed_shell_counts

logger = logging.getLogger(__name__)


def adapt_construct(engine, grad_tol: float = 1e-4, settings=None, max_operators: int = 200):
    """Grow a program one operator at a time until every pool gradient is below ``grad_tol``.

    Each step appends the operator with the largest ``|<psi|[H, G]|psi>|`` and
    reoptimizes all parameters from the previous optimum (new angle at zero).
    Operators may be picked more than once. Returns ``(program, VqeResult)``.
    """
    from ..vqe import optimize_global

    if grad_tol <= 0:
        raise ValueError("grad_tol must be positive")
    n_occ, n_virt = closed_shell_counts(engine.n_qubits, engine.n_alpha, engine.n_beta)
    pool = singles_groups(n_occ, n_virt) + doubles_groups(n_occ, n_virt)
    chosen = []
    params = np.zeros(0)
    program = AnsatzProgram(engine.n_qubits, engine.n_alpha, engine.n_beta, name="adapt")
    result = optimize_global(engine, program, settings)
    psi = engine.reference()
    for _ in range(max_operators):
        grads = np.array([abs(engine.gradient_at_reference(g, psi)) for g in pool])
        if grads.size == 0 or grads.max() < grad_tol:
            break
        best = int(np.argmax(grads))
        chosen.append(pool[best])
        logger.debug("adapt step %d: %s, |g|=%.3e", len(chosen), pool[best].label(), grads[best])
        blocks = tuple(OperatorBlock(g) for g in chosen)
        program = AnsatzProgram(engine.n_qubits, engine.n_alpha, engine.n_beta, blocks, (), name="adapt")
        program = program.with_initial(np.append(params, 0.0))
        result = optimize_global(engine, program, settings)
        params = result.parameters
        program = program.with_initial(params)
        psi = engine.prepare(program.factors(), params)
    else:
        logger.warning("adapt stopped at the %d-operator cap", max_operators)
    return program, result
