import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))


def random_symmetric_integrals(rng, n, scale=0.3):
    """Random real one-body matrix and 8-fold symmetric physicists' ERIs."""
    h = rng.normal(size=(n, n))
    h = 0.5 * (h + h.T)
    a = rng.normal(size=(n, n, n, n)) * scale
    chem = a + a.transpose(1, 0, 2, 3)
    chem = chem + chem.transpose(0, 1, 3, 2)
    chem = chem + chem.transpose(2, 3, 0, 1)
    return h, chem.transpose(0, 2, 1, 3).copy()


def random_hamiltonian(rng, n_orb, scale=0.3):
    from dmet_compass.hamiltonian import MolecularHamiltonian

    h, v = random_symmetric_integrals(rng, n_orb, scale)
    return MolecularHamiltonian(float(rng.normal()), h, v)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
