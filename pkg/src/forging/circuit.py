"""Gate-list circuits with named parameter slots, and their text format.

Text format: one gate per line, ``KIND q1 [q2] [angle]``. The angle is either
a float literal or a parameter name. ``#`` starts a comment.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .gates import Gate


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g.to_text()!r} out of range for {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def parameters(self) -> tuple[str, ...]:
        """Unbound parameter names in order of first appearance."""
        seen: dict[str, None] = {}
        for g in self.gates:
            if not g.is_bound:
                seen.setdefault(g.angle, None)
        return tuple(seen)

    @property
    def is_bound(self) -> bool:
        return all(g.is_bound for g in self.gates)

    @property
    def two_qubit_count(self) -> int:
        return sum(g.arity == 2 for g in self.gates)

    def bind(self, values: Mapping[str, float] | Sequence[float]) -> "Circuit":
        if not isinstance(values, Mapping):
            names = self.parameters
            values = list(values)
            if len(values) != len(names):
                raise ValueError(f"expected {len(names)} parameter values, got {len(values)}")
            values = dict(zip(names, values))
        return Circuit(self.n_qubits, tuple(g.bind(values) for g in self.gates))

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def then(self, other: "Circuit | Iterable[Gate]") -> "Circuit":
        more = other.gates if isinstance(other, Circuit) else tuple(other)
        return Circuit(self.n_qubits, self.gates + tuple(more))

    def embedded(self, n_total: int, offset: int) -> "Circuit":
        return Circuit(n_total, tuple(g.shifted(offset) for g in self.gates))

    def is_real(self, atol: float = 1e-12) -> bool:
        return all(np.max(np.abs(g.matrix().imag)) <= atol for g in self.gates)

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str | Iterable[str], n_qubits: int) -> "Circuit":
        lines = text.splitlines() if isinstance(text, str) else text
        gates = []
        for lineno, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                gates.append(Gate.from_text(line))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(n_qubits, tuple(gates))
