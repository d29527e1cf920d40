"""Gate set and gate matrices.

Two-qubit matrices are written in the basis ``|q_a q_b>`` = ``|00>, |01>, |10>, |11>``
where ``q_a`` is the first listed qubit of the gate. For ``CNOT`` the first
qubit is the control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ONE_QUBIT = frozenset({"X", "Y", "Z", "H", "S", "SDG", "RY", "RZ"})
TWO_QUBIT = frozenset({"CNOT", "CZ", "SWAP", "HOP", "MODHOP"})
PARAMETRIC = frozenset({"RY", "RZ", "HOP", "MODHOP"})
CLIFFORD = frozenset({"X", "Y", "Z", "H", "S", "SDG", "CNOT", "CZ", "SWAP"})
KINDS = ONE_QUBIT | TWO_QUBIT

_SQ2 = 1 / np.sqrt(2)

FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}

_SELF_INVERSE = frozenset({"X", "Y", "Z", "H", "CNOT", "CZ", "SWAP"})


def hop_matrix(phi: float) -> np.ndarray:
    """Hop gate: rotation by ``phi`` on ``{|01>, |10>}`` and a -1 phase on ``|11>``."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array(
        [[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, -1]], dtype=complex
    )


def modhop_matrix(phi: float) -> np.ndarray:
    """Hop gate that leaves ``|11>`` unchanged."""
    m = hop_matrix(phi)
    m[3, 3] = 1
    return m


def hop_core_matrix(phi: float) -> np.ndarray:
    """Native part of a hop gate compiled as a swap followed by this gate.

    ``hop_core_matrix(phi) @ SWAP == hop_matrix(phi)``.
    """
    return hop_matrix(phi) @ FIXED["SWAP"]


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


_PARAM_MATRIX = {"RY": ry_matrix, "RZ": rz_matrix, "HOP": hop_matrix, "MODHOP": modhop_matrix}


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``angle`` is a float for bound parametric gates, a parameter name for
    unbound ones, and ``None`` for fixed gates.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | str | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind in ("S†", "SDAG"):
            kind = "SDG"
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 1 if kind in ONE_QUBIT else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity:
            raise ValueError(f"{kind} targets must be distinct, got {self.qubits}")
        if kind in PARAMETRIC:
            if self.angle is None:
                raise ValueError(f"{kind} needs an angle")
        elif self.angle is not None:
            raise ValueError(f"{kind} takes no angle")

    @property
    def is_bound(self) -> bool:
        return not isinstance(self.angle, str)

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def matrix(self) -> np.ndarray:
        if self.kind in FIXED:
            return FIXED[self.kind]
        if not self.is_bound:
            raise ValueError(f"unbound parameter {self.angle!r} in {self.kind}")
        return _PARAM_MATRIX[self.kind](float(self.angle))

    def inverse(self) -> "Gate":
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind == "S":
            return Gate("SDG", self.qubits)
        if self.kind == "SDG":
            return Gate("S", self.qubits)
        if not self.is_bound:
            raise ValueError(f"cannot invert unbound {self.kind}({self.angle})")
        # hop and modified hop: the |11> phase (-1 or +1) is its own inverse
        return Gate(self.kind, self.qubits, -float(self.angle))

    def bind(self, values: dict[str, float]) -> "Gate":
        if self.is_bound:
            return self
        if self.angle not in values:
            raise ValueError(f"unbound parameter {self.angle!r}")
        value = float(values[self.angle])
        if not np.isfinite(value):
            raise ValueError(f"parameter {self.angle!r} is not finite")
        return Gate(self.kind, self.qubits, value)

    def shifted(self, offset: int) -> "Gate":
        return Gate(self.kind, tuple(q + offset for q in self.qubits), self.angle)

    def to_text(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(self.angle if isinstance(self.angle, str) else repr(float(self.angle)))
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "Gate":
        tokens = line.split()
        kind = tokens[0].upper()
        if kind in ("S†", "SDAG"):
            kind = "SDG"
        arity = 1 if kind in ONE_QUBIT else 2
        qubits = tuple(int(t) for t in tokens[1 : 1 + arity])
        rest = tokens[1 + arity :]
        angle: float | str | None = None
        if rest:
            if len(rest) > 1:
                raise ValueError(f"trailing tokens in gate line {line!r}")
            try:
                angle = float(rest[0])
            except ValueError:
                if not rest[0].isidentifier():
                    raise ValueError(f"bad angle {rest[0]!r} in gate line {line!r}") from None
                angle = rest[0]
        return cls(kind, qubits, angle)
