"""Sums of products of fermionic ladder operators."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

# a ladder is (spin-orbital index, dagger flag); a term is a tuple of ladders
# read left to right, so the rightmost ladder acts first
Ladder = tuple[int, bool]
Term = tuple[Ladder, ...]


class FermionOperator:
    """Linear combination of ladder-operator products.

    Terms are kept exactly as written; no normal ordering is attempted.

    >>> n0 = FermionOperator.product([(0, True), (0, False)])
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Term, complex] | None = None):
        self.terms: dict[Term, complex] = dict(terms or {})

    @classmethod
    def product(cls, ladders: Iterable[Ladder], coeff: complex = 1.0) -> FermionOperator:
        term = tuple((int(p), bool(d)) for p, d in ladders)
        return cls({term: complex(coeff)})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> FermionOperator:
        return cls({(): complex(coeff)})

    @classmethod
    def creation(cls, p: int) -> FermionOperator:
        return cls.product([(p, True)])

    @classmethod
    def annihilation(cls, p: int) -> FermionOperator:
        return cls.product([(p, False)])

    def max_index(self) -> int:
        return max((p for term in self.terms for p, _ in term), default=-1)

    def __add__(self, other: FermionOperator) -> FermionOperator:
        out = defaultdict(complex, self.terms)
        for t, c in other.terms.items():
            out[t] += c
        return FermionOperator(out)

    def __sub__(self, other: FermionOperator) -> FermionOperator:
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = defaultdict(complex)
            for t1, c1 in self.terms.items():
                for t2, c2 in other.terms.items():
                    out[t1 + t2] += c1 * c2
            return FermionOperator(out)
        return FermionOperator({t: c * other for t, c in self.terms.items()})

    def __rmul__(self, scalar):
        return FermionOperator({t: scalar * c for t, c in self.terms.items()})

    def adjoint(self) -> FermionOperator:
        return FermionOperator(
            {tuple((p, not d) for p, d in reversed(t)): c.conjugate() for t, c in self.terms.items()}
        )

    def __repr__(self):
        def fmt(term):
            return " ".join(f"a{p}^" if d else f"a{p}" for p, d in term) or "I"

        return " + ".join(f"({c:.6g}) [{fmt(t)}]" for t, c in self.terms.items()) or "0"


def anticommutator(a: FermionOperator, b: FermionOperator) -> FermionOperator:
    return a * b + b * a


def commutator(a: FermionOperator, b: FermionOperator) -> FermionOperator:
    return a * b - b * a
