"""Molpro-style FCIDUMP reader and writer.

Integrals in the file are chemists' ``(ij|kl)`` with 1-based indices. Only
the unique 8-fold permutational representatives are written; reading expands
them again. The orbitals are assumed orthonormal, so ``S`` is the identity.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .integrals import IntegralSet, chem_to_phys, phys_to_chem


class FcidumpParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z_][A-Za-z0-9_]*\s*=|$)")


def _parse_header(text: str, first_line: int) -> dict[str, str]:
    body = text.strip()
    body = re.sub(r"^&FCI", "", body, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body, flags=re.IGNORECASE).strip()
    fields = {}
    for key, value in _KEY_RE.findall(body):
        fields[key.upper()] = value.strip().rstrip(",").strip()
    for key in ("NORB", "NELEC", "MS2"):
        if key not in fields:
            raise FcidumpParseError(f"header is missing required key {key}", first_line)
    return fields


def _header_int(fields, key, line):
    try:
        return int(fields[key])
    except ValueError:
        raise FcidumpParseError(f"header value {key}={fields[key]!r} is not an integer", line) from None


def read_fcidump(path, atom_map_path=None) -> IntegralSet:
    """Parse an FCIDUMP file into an :class:`IntegralSet`.

    Args:
        path: FCIDUMP file.
        atom_map_path: Optional sidecar file with ``orbital_index atom_index``
            lines (0-based). Without it each orbital is its own "atom".

    Raises:
        FcidumpParseError: for a malformed header or record, with the
            offending line number.
    """
    lines = Path(path).read_text().splitlines()
    header_end = None
    for idx, line in enumerate(lines):
        stripped = line.strip().upper()
        if stripped.endswith("&END") or stripped == "/" or stripped.endswith("/"):
            header_end = idx
            break
    if not lines or not lines[0].strip().upper().startswith("&FCI"):
        raise FcidumpParseError("file does not start with an &FCI header", 1)
    if header_end is None:
        raise FcidumpParseError("header is not terminated by &END or /", len(lines))
    fields = _parse_header(" ".join(lines[: header_end + 1]), 1)
    norb = _header_int(fields, "NORB", 1)
    nelec = _header_int(fields, "NELEC", 1)
    _header_int(fields, "MS2", 1)
    if norb < 1:
        raise FcidumpParseError(f"NORB must be positive, got {norb}", 1)

    h1 = np.zeros((norb, norb))
    eri = np.zeros((norb, norb, norb, norb))
    e_core = 0.0
    for lineno, line in enumerate(lines[header_end + 1 :], start=header_end + 2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpParseError(f"expected 'value i j k l', got {line.strip()!r}", lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
        except ValueError:
            raise FcidumpParseError(f"non-numeric value {parts[0]!r}", lineno) from None
        try:
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FcidumpParseError(f"non-integer index in {line.strip()!r}", lineno) from None
        if any(x < 0 or x > norb for x in (i, j, k, l)):
            raise FcidumpParseError(f"index out of range 0..{norb} in {line.strip()!r}", lineno)
        if i == j == k == l == 0:
            e_core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpParseError(f"one-electron record with zero index: {line.strip()!r}", lineno)
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = value
        elif i == 0 or j == 0 or k == 0 or l == 0:
            # orbital energies (i 0 0 0) are informational only
            if j == k == l == 0:
                continue
            raise FcidumpParseError(f"malformed index pattern in {line.strip()!r}", lineno)
        else:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in (
                (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
            ):
                eri[a, b, c, d] = value

    atoms = read_atom_map(atom_map_path, norb) if atom_map_path is not None else tuple(range(norb))
    return IntegralSet(
        overlap=np.eye(norb),
        core=h1,
        eri=chem_to_phys(eri),
        e_nuc=e_core,
        orbital_atoms=atoms,
        n_electrons=nelec,
    )


def read_atom_map(path, norb: int) -> tuple[int, ...]:
    mapping = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            orb, atom = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise FcidumpParseError(f"atom map expects 'orbital atom', got {line.strip()!r}", lineno) from None
        if not 0 <= orb < norb or atom < 0:
            raise FcidumpParseError(f"atom map entry out of range: {line.strip()!r}", lineno)
        mapping[orb] = atom
    missing = [p for p in range(norb) if p not in mapping]
    if missing:
        raise FcidumpParseError(f"atom map has no entry for orbitals {missing}")
    return tuple(mapping[p] for p in range(norb))


def write_atom_map(atoms, path) -> None:
    Path(path).write_text("".join(f"{p} {a}\n" for p, a in enumerate(atoms)))


def write_fcidump(ints: IntegralSet, path, n_electrons: int | None = None, ms2: int = 0) -> None:
    """Write ``ints`` in FCIDUMP format (orbitals must be orthonormal)."""
    if not np.allclose(ints.overlap, np.eye(ints.n_orb), atol=1e-10):
        raise ValueError("FCIDUMP requires an orthonormal orbital basis; rotate the integrals first")
    if n_electrons is None:
        n_electrons = ints.n_electrons
    if n_electrons is None:
        raise ValueError("electron count unknown; pass n_electrons")
    n = ints.n_orb
    chem = phys_to_chem(ints.eri)
    out = [f"&FCI NORB={n},NELEC={n_electrons},MS2={ms2},", " ORBSYM=" + "1," * n, " ISYM=1,", "&END"]
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = chem[i, j, k, l]
                    if v != 0.0:
                        out.append(f"{float(v)!r:>24} {i + 1:4d} {j + 1:4d} {k + 1:4d} {l + 1:4d}")
    for i in range(n):
        for j in range(i + 1):
            v = ints.core[i, j]
            if v != 0.0:
                out.append(f"{float(v)!r:>24} {i + 1:4d} {j + 1:4d}    0    0")
    out.append(f"{float(ints.e_nuc)!r:>24}    0    0    0    0")
    Path(path).write_text("\n".join(out) + "\n")
