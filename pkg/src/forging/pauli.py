"""Signed Pauli strings.

A Pauli string is a word over ``{I, X, Y, Z}`` with a sign of ``+1`` or ``-1``.
Letter ``j`` (counting from the left, starting at 0) acts on qubit ``j``.
Qubit ``j`` is bit ``j`` of a computational-basis index, i.e. qubit 0 is the
least significant bit. The text form is the word with an optional sign
prefix, e.g. ``"-XXIZY"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

LETTERS = "IXYZ"

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}

# (a, b) -> (power of i, letter) such that a @ b = i**power * letter
_PRODUCT = {}
for _a in LETTERS:
    for _b in LETTERS:
        _m = PAULI_MATRICES[_a] @ PAULI_MATRICES[_b]
        for _c in LETTERS:
            for _k in range(4):
                if np.allclose(_m, (1j**_k) * PAULI_MATRICES[_c]):
                    _PRODUCT[_a, _b] = (_k, _c)


@dataclass(frozen=True)
class PauliString:
    letters: str
    sign: int = 1

    def __post_init__(self):
        if any(c not in LETTERS for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        if not text:
            raise ValueError("empty Pauli string")
        return cls(text.upper(), sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        letters = ["I"] * n
        letters[qubit] = letter
        return cls("".join(letters), sign)

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.sign)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def y_count(self) -> int:
        return self.letters.count("Y")

    @property
    def conj_sign(self) -> int:
        """Sign ``s`` with ``P.conj() == s * P`` as matrices."""
        return -1 if self.y_count % 2 else 1

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.letters) if c != "I")

    def is_identity(self) -> bool:
        return self.weight == 0

    def unsigned(self) -> "PauliString":
        return PauliString(self.letters)

    @property
    def x_mask(self) -> int:
        return sum(1 << j for j, c in enumerate(self.letters) if c in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << j for j, c in enumerate(self.letters) if c in "ZY")

    def split(self, n: int) -> tuple["PauliString", "PauliString"]:
        """Split into the first ``n`` letters and the rest; the sign stays on the first part."""
        return PauliString(self.letters[:n], self.sign), PauliString(self.letters[n:])

    def matrix(self) -> np.ndarray:
        # qubit 0 is the least significant bit, so it goes rightmost in the kron
        mats = [PAULI_MATRICES[c] for c in reversed(self.letters)]
        return self.sign * reduce(np.kron, mats, np.eye(1, dtype=complex))

    def __matmul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Operator product ``self @ other`` as ``(coefficient, unsigned Pauli)``."""
        if len(self) != len(other):
            raise ValueError("Pauli strings of different lengths")
        power = 0
        out = []
        for a, b in zip(self.letters, other.letters):
            k, c = _PRODUCT[a, b]
            power += k
            out.append(c)
        coeff = self.sign * other.sign * (1j ** (power % 4))
        return complex(coeff), PauliString("".join(out))


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff ``p`` and ``q`` commute."""
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} vs {len(q)}")
    clashes = sum(a != "I" and b != "I" and a != b for a, b in zip(p.letters, q.letters))
    return clashes % 2 == 0


def as_pauli(p: PauliString | str) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString.parse(p)
