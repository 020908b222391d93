"""Pauli-string algebra and the Jordan-Wigner map.

A Pauli string is a pair of integer bitmasks ``(x, z)``: qubit ``k`` carries
``X`` if only bit ``k`` of ``x`` is set, ``Z`` if only bit ``k`` of ``z`` is set,
and ``Y`` if both are. The string operator is the literal tensor product, so
``Y = i X Z`` accounts for the phase when strings are multiplied.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import scipy.sparse as sp

from .fermion import FermionOperator

PRUNE_TOL = 1e-14

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_FROM_LETTER = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}


def _popcount(x: int) -> int:
    return bin(x).count("1")


def multiply_strings(s1: tuple[int, int], s2: tuple[int, int]) -> tuple[complex, tuple[int, int]]:
    """Product of two Pauli strings as ``phase * string``."""
    x1, z1 = s1
    x2, z2 = s2
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = (_popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3) + 2 * _popcount(z1 & x2)) % 4
    return 1j**k, (x3, z3)


def string_weight(s: tuple[int, int]) -> int:
    return _popcount(s[0] | s[1])


class PauliSum:
    """Complex linear combination of Pauli strings on a fixed register."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self.terms: dict[tuple[int, int], complex] = {}
        for s, c in (terms or {}).items():
            if abs(c) >= PRUNE_TOL:
                self.terms[s] = complex(c)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> PauliSum:
        """``label[k]`` is the letter on qubit ``k`` (so ``"ZI"`` is ``Z_0``)."""
        x = z = 0
        for k, ch in enumerate(label.upper()):
            bx, bz = _FROM_LETTER[ch]
            x |= bx << k
            z |= bz << k
        return cls(len(label), {(x, z): coeff})

    def label(self, s: tuple[int, int]) -> str:
        return "".join(_LETTERS[((s[0] >> k) & 1, (s[1] >> k) & 1)] for k in range(self.n_qubits))

    def _check(self, other: PauliSum):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"register mismatch: {self.n_qubits} vs {other.n_qubits} qubits")

    def __add__(self, other: PauliSum) -> PauliSum:
        self._check(other)
        out = defaultdict(complex, self.terms)
        for s, c in other.terms.items():
            out[s] += c
        return PauliSum(self.n_qubits, out)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            out = defaultdict(complex)
            for s1, c1 in self.terms.items():
                for s2, c2 in other.terms.items():
                    phase, s3 = multiply_strings(s1, s2)
                    out[s3] += phase * c1 * c2
            return PauliSum(self.n_qubits, out)
        return PauliSum(self.n_qubits, {s: c * other for s, c in self.terms.items()})

    def __rmul__(self, scalar):
        return self * scalar

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum) or other.n_qubits != self.n_qubits:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self, atol: float = 1e-12) -> bool:
        return all(abs(c) < atol for c in self.terms.values())

    def adjoint(self) -> PauliSum:
        # every Pauli string is Hermitian
        return PauliSum(self.n_qubits, {s: c.conjugate() for s, c in self.terms.items()})

    def hermiticity_residual(self) -> float:
        """Largest imaginary coefficient; zero for a Hermitian operator."""
        return max((abs(c.imag) for c in self.terms.values()), default=0.0)

    def anti_hermiticity_residual(self) -> float:
        return max((abs(c.real) for c in self.terms.values()), default=0.0)

    def commutator(self, other: PauliSum) -> PauliSum:
        return self * other - other * self

    def to_sparse(self) -> sp.csr_matrix:
        """Matrix in the computational basis, basis index bit ``k`` = qubit ``k``."""
        dim = 1 << self.n_qubits
        cols = np.arange(dim, dtype=np.int64)
        mat = sp.csr_matrix((dim, dim), dtype=complex)
        for (x, z), c in self.terms.items():
            signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
            phase = 1j ** (_popcount(x & z) % 4)
            mat = mat + sp.csr_matrix((c * phase * signs, (cols ^ x, cols)), shape=(dim, dim))
        return mat

    def apply(self, state: np.ndarray) -> np.ndarray:
        cols = np.arange(state.shape[0], dtype=np.int64)
        out = np.zeros_like(state, dtype=complex)
        for (x, z), c in self.terms.items():
            signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
            out[cols ^ x] += (c * 1j ** (_popcount(x & z) % 4)) * signs * state
        return out

    def __repr__(self):
        body = " + ".join(f"({c:.6g}) {self.label(s)}" for s, c in sorted(self.terms.items()))
        return f"PauliSum[{self.n_qubits}]({body or '0'})"


def _ladder_pauli(p: int, dagger: bool, n_qubits: int) -> PauliSum:
    lower = (1 << p) - 1
    x_str = (1 << p, lower)
    y_str = (1 << p, lower | (1 << p))
    sign = -0.5j if dagger else 0.5j
    return PauliSum(n_qubits, {x_str: 0.5, y_str: sign})


def jordan_wigner(op: FermionOperator, n_spin_orbitals: int) -> PauliSum:
    """Map a fermionic operator to qubits, ``a+_p = (X_p - i Y_p)/2 Z_{p-1}...Z_0``.

    Raises:
        IndexError: if any ladder index is ``>= n_spin_orbitals``.
    """
    if op.max_index() >= n_spin_orbitals:
        raise IndexError(f"spin-orbital index {op.max_index()} out of range for {n_spin_orbitals} orbitals")
    cache: dict[tuple[int, bool], PauliSum] = {}
    total = PauliSum(n_spin_orbitals)
    for term, coeff in op.terms.items():
        acc = PauliSum.identity(n_spin_orbitals, coeff)
        for ladder in term:
            if ladder not in cache:
                cache[ladder] = _ladder_pauli(ladder[0], ladder[1], n_spin_orbitals)
            acc = acc * cache[ladder]
        total = total + acc
    return total
