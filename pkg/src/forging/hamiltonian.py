"""Bipartite Pauli-sum Hamiltonians and their text format.

::

    qubits 4 partition 2
    # coefficient  Pauli string (qubit 0 leftmost)
    -1.25 IIII
    0.5 ZZII
    terms 2
    checksum -0.75

``partition`` defaults to half the qubit count. The optional ``terms`` and
``checksum`` lines (checksum = exact sum of coefficients) guard against
truncated or altered files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pauli import PauliString


class HamiltonianFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Hamiltonian:
    n_qubits: int
    partition: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((float(c), p) for c, p in self.terms))
        if not 0 <= self.partition <= self.n_qubits:
            raise ValueError(f"partition {self.partition} outside 0..{self.n_qubits}")
        for c, p in self.terms:
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient on {p}")
            if len(p) != self.n_qubits:
                raise ValueError(f"term {p} has {len(p)} letters, expected {self.n_qubits}")
            if p.sign != 1:
                raise ValueError("signs belong in the coefficient")

    @property
    def n(self) -> int:
        """Qubits per half."""
        return self.partition

    def split_terms(self) -> list[tuple[float, PauliString, PauliString]]:
        """``(coeff, O1, O2)`` with ``O1`` on the first ``partition`` qubits."""
        return [(c, *p.split(self.partition)) for c, p in self.terms]

    def checksum(self) -> float:
        return math.fsum(c for c, _ in self.terms)

    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for c, p in self.terms:
            out += c * p.matrix()
        return out

    def ground_energy(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix())[0])


def validate_realness(h: Hamiltonian) -> bool:
    """True iff both halves of every term are real matrices (even Y count in each)."""
    return all(o1.y_count % 2 == 0 and o2.y_count % 2 == 0 for _, o1, o2 in h.split_terms())


def format_hamiltonian(h: Hamiltonian, manifest: bool = True) -> str:
    lines = [f"qubits {h.n_qubits} partition {h.partition}"]
    lines += [f"{c!r} {p.letters}" for c, p in h.terms]
    if manifest:
        lines += [f"terms {len(h.terms)}", f"checksum {h.checksum()!r}"]
    return "".join(line + "\n" for line in lines)


def parse_hamiltonian(text: str) -> Hamiltonian:
    header = None
    terms: list[tuple[float, PauliString]] = []
    n_terms = checksum = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if header is None:
            if tok[0] != "qubits" or len(tok) not in (2, 4) or (len(tok) == 4 and tok[2] != "partition"):
                raise HamiltonianFormatError(f"line {lineno}: expected 'qubits <2n> [partition <n>]'")
            try:
                total = int(tok[1])
                part = int(tok[3]) if len(tok) == 4 else None
            except ValueError:
                raise HamiltonianFormatError(f"line {lineno}: bad qubit count") from None
            if part is None:
                if total % 2:
                    raise HamiltonianFormatError(
                        f"line {lineno}: odd qubit count {total} needs an explicit partition"
                    )
                part = total // 2
            header = (total, part)
            continue
        if len(tok) != 2:
            raise HamiltonianFormatError(f"line {lineno}: expected 'coeff pauli'")
        if tok[0] == "terms":
            try:
                n_terms = int(tok[1])
            except ValueError:
                raise HamiltonianFormatError(f"line {lineno}: bad term count") from None
            continue
        try:
            value = float(tok[1] if tok[0] == "checksum" else tok[0])
        except ValueError:
            raise HamiltonianFormatError(f"line {lineno}: bad coefficient {tok[0]!r}") from None
        if not math.isfinite(value):
            raise HamiltonianFormatError(f"line {lineno}: non-finite value")
        if tok[0] == "checksum":
            checksum = value
            continue
        try:
            p = PauliString.parse(tok[1])
        except ValueError as exc:
            raise HamiltonianFormatError(f"line {lineno}: {exc}") from None
        if len(p) != header[0]:
            raise HamiltonianFormatError(
                f"line {lineno}: Pauli string has {len(p)} letters, expected {header[0]}"
            )
        terms.append((value * p.sign, p.unsigned()))
    if header is None:
        raise HamiltonianFormatError("missing 'qubits' header")
    h = Hamiltonian(header[0], header[1], tuple(terms))
    if n_terms is not None and n_terms != len(terms):
        raise HamiltonianFormatError(f"manifest lists {n_terms} terms, file has {len(terms)}")
    if checksum is not None and abs(h.checksum() - checksum) > 1e-9 * max(1.0, abs(checksum)):
        raise HamiltonianFormatError(f"checksum mismatch: {h.checksum()!r} vs {checksum!r}")
    return h


def load_hamiltonian(path: str | Path) -> Hamiltonian:
    return parse_hamiltonian(Path(path).read_text())
