"""Clifford circuits that map single-qubit Paulis onto pairs of Pauli strings,
and the Clifford decomposition of symmetrized two-register Pauli observables.

Circuits are lists of gates in time order. ``conjugate(P)`` returns
``U P U^dagger`` for the circuit unitary ``U``; ``conjugate_inverse(P)``
returns ``U^dagger P U``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .gates import CLIFFORD, FIXED, Gate
from .pauli import PAULI_MATRICES, PauliString, commutes
from .statevector import circuit_unitary

_LETTERS = "IXYZ"


def _match(m: np.ndarray, arity: int) -> tuple[int, str]:
    for letters in itertools.product(_LETTERS, repeat=arity):
        ref = PAULI_MATRICES[letters[0]]
        for c in letters[1:]:
            ref = np.kron(ref, PAULI_MATRICES[c])
        for sign in (1, -1):
            if np.allclose(m, sign * ref):
                return sign, "".join(letters)
    raise AssertionError("not a signed Pauli")


def _build_table() -> dict[str, dict[str, tuple[int, str]]]:
    table: dict[str, dict[str, tuple[int, str]]] = {}
    for kind in CLIFFORD:
        g = FIXED[kind]
        arity = 1 if g.shape == (2, 2) else 2
        entry = {}
        for letters in itertools.product(_LETTERS, repeat=arity):
            p = PAULI_MATRICES[letters[0]]
            for c in letters[1:]:
                p = np.kron(p, PAULI_MATRICES[c])
            entry["".join(letters)] = _match(g @ p @ g.conj().T, arity)
        table[kind] = entry
    return table


# kind -> letters on the gate's qubits -> (sign, letters) of G P G^dagger
_CONJ = _build_table()


def conjugate_by_gate(p: PauliString, gate: Gate) -> PauliString:
    """``G P G^dagger`` for a Clifford gate ``G``."""
    letters = list(p.letters)
    key = "".join(letters[q] for q in gate.qubits)
    sign, new = _CONJ[gate.kind][key]
    for q, c in zip(gate.qubits, new):
        letters[q] = c
    return PauliString("".join(letters), p.sign * sign)


@dataclass(frozen=True)
class CliffordCircuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if g.kind not in CLIFFORD:
                raise ValueError(f"{g.kind} is not a Clifford gate")
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g.to_text()!r} out of range")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def cnot_count(self) -> int:
        """Number of two-qubit gates (CNOT and CZ both count)."""
        return sum(g.arity == 2 for g in self.gates)

    def conjugate(self, p: PauliString) -> PauliString:
        for g in self.gates:
            p = conjugate_by_gate(p, g)
        return p

    def conjugate_inverse(self, p: PauliString) -> PauliString:
        for g in reversed(self.gates):
            p = conjugate_by_gate(p, g.inverse())
        return p

    def inverse(self) -> "CliffordCircuit":
        return CliffordCircuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)))

    def then(self, other: "CliffordCircuit") -> "CliffordCircuit":
        return CliffordCircuit(self.n_qubits, self.gates + other.gates)

    def to_circuit(self) -> Circuit:
        return Circuit(self.n_qubits, self.gates)

    def unitary(self) -> np.ndarray:
        return circuit_unitary(self.to_circuit())


@dataclass(frozen=True)
class PauliPartition:
    """Qubit classes of a standardized pair ``(O1, O2)``:
    A=(X,Z), B=(Z,I), C=(I,Z), D=(Z,Z), E=(I,I)."""

    A: tuple[int, ...]
    B: tuple[int, ...]
    C: tuple[int, ...]
    D: tuple[int, ...]
    E: tuple[int, ...]


_TARGET = {"A": ("X", "Z"), "B": ("Z", "I"), "C": ("I", "Z"), "D": ("Z", "Z"), "E": ("I", "I")}


def _case(a: str, b: str) -> str:
    if a == "I" and b == "I":
        return "E"
    if b == "I":
        return "B"
    if a == "I":
        return "C"
    return "D" if a == b else "A"


# single-qubit Clifford words, shortest first
_WORDS = [()] + [w for k in (1, 2, 3) for w in itertools.product(("H", "S"), repeat=k)]


def _local_word(a: str, b: str) -> tuple[str, ...]:
    target = _TARGET[_case(a, b)]
    for word in _WORDS:
        w = CliffordCircuit(1, tuple(Gate(k, (0,)) for k in word))
        got = (w.conjugate_inverse(PauliString(a)).letters, w.conjugate_inverse(PauliString(b)).letters)
        if got == target:
            return word
    raise AssertionError(f"no local Clifford for {(a, b)}")


def _partition(o1: PauliString, o2: PauliString) -> PauliPartition:
    sets: dict[str, list[int]] = {k: [] for k in "ABCDE"}
    for q, (a, b) in enumerate(zip(o1.letters, o2.letters)):
        sets[_case(a, b)].append(q)
    return PauliPartition(**{k: tuple(v) for k, v in sets.items()})


def standard_form(o1: PauliString, o2: PauliString) -> tuple[CliffordCircuit, PauliPartition]:
    """Single-qubit Clifford circuit ``W`` bringing ``W^dag O1 W, W^dag O2 W`` to
    standard form, together with the resulting qubit partition."""
    if len(o1) != len(o2):
        raise ValueError(f"length mismatch: {len(o1)} vs {len(o2)}")
    gates = []
    for q, (a, b) in enumerate(zip(o1.letters, o2.letters)):
        gates.extend(Gate(k, (q,)) for k in _local_word(a, b))
    w = CliffordCircuit(len(o1), tuple(gates))
    return w, _partition(w.conjugate_inverse(o1), w.conjugate_inverse(o2))


class _Reducer:
    """Accumulates reduction steps ``O <- W^dag O W``; ``V`` is the product of
    all steps, so ``O_original = V O_final V^dag``."""

    def __init__(self, o1: PauliString, o2: PauliString):
        self.n = len(o1)
        self.o1, self.o2 = o1, o2
        self.steps: list[CliffordCircuit] = []

    def apply(self, gates) -> None:
        w = CliffordCircuit(self.n, tuple(gates))
        if not len(w):
            return
        self.o1 = w.conjugate_inverse(self.o1)
        self.o2 = w.conjugate_inverse(self.o2)
        self.steps.append(w)

    def standardize(self) -> PauliPartition:
        w, part = standard_form(self.o1, self.o2)
        self.apply(w.gates)
        return part

    def circuit(self) -> CliffordCircuit:
        gates: tuple[Gate, ...] = ()
        for w in reversed(self.steps):
            gates += w.gates
        return CliffordCircuit(self.n, gates)


def _sign_fix(q1: int, s1: int, q2: int, s2: int, first: str) -> list[Gate]:
    # a Pauli that flips the sign of the offending single-qubit target
    flip_first = {"X": "Z", "Z": "X"}[first]
    if q1 == q2:
        if s1 < 0 and s2 < 0:
            return [Gate("Y", (q1,))]
        if s1 < 0:
            return [Gate(flip_first, (q1,))]
        if s2 < 0:
            return [Gate("X", (q2,))]
        return []
    out = []
    if s1 < 0:
        out.append(Gate(flip_first, (q1,)))
    if s2 < 0:
        out.append(Gate("X", (q2,)))
    return out


def lemma1_synthesize(o1: PauliString, o2: PauliString) -> tuple[CliffordCircuit, int]:
    """Clifford ``V`` and qubit ``q`` with ``V X_q V^dag = O1`` and ``V Z_q V^dag = O2``.

    ``O1`` and ``O2`` must anticommute. ``V`` has at most ``|O1| + |O2| - 2``
    two-qubit gates.
    """
    if len(o1) != len(o2):
        raise ValueError(f"length mismatch: {len(o1)} vs {len(o2)}")
    if commutes(o1, o2):
        raise ValueError(f"{o1} and {o2} commute; expected an anticommuting pair")
    r = _Reducer(o1, o2)
    while True:
        part = r.standardize()
        a = part.A[0]
        if part.B:
            r.apply([Gate("CZ", (a, part.B[0]))])
        elif part.C or part.D:
            b = min(part.C + part.D)
            r.apply([Gate("CNOT", (b, a))])
        else:
            A = part.A
            q = A[0]
            gates = []
            for i in range(1, (len(A) - 1) // 2 + 1):
                gates += [
                    Gate("CNOT", (q, A[2 * i])),
                    Gate("CNOT", (A[2 * i - 1], q)),
                    Gate("CNOT", (A[2 * i], A[2 * i - 1])),
                ]
            r.apply(gates)
            break
    if r.o1.letters != PauliString.single(r.n, q, "X").letters or r.o2.letters != PauliString.single(r.n, q, "Z").letters:
        raise AssertionError(f"reduction ended at ({r.o1}, {r.o2})")
    r.apply(_sign_fix(q, r.o1.sign, q, r.o2.sign, "X"))
    return r.circuit(), q


def lemma2_synthesize(o1: PauliString, o2: PauliString) -> tuple[CliffordCircuit, int, int]:
    """Clifford ``V`` and qubits ``p != q`` with ``V Z_p V^dag = O1`` and ``V Z_q V^dag = O2``.

    ``O1`` and ``O2`` must commute, be distinct and be non-identity. ``V`` has
    at most ``|O1| + |O2| - 2`` two-qubit gates.
    """
    if len(o1) != len(o2):
        raise ValueError(f"length mismatch: {len(o1)} vs {len(o2)}")
    if o1.is_identity() or o2.is_identity():
        raise ValueError("both observables must be non-identity")
    if o1.letters == o2.letters:
        raise ValueError(f"{o1} and {o2} are equal up to sign")
    if not commutes(o1, o2):
        raise ValueError(f"{o1} and {o2} anticommute; expected a commuting pair")
    r = _Reducer(o1, o2)
    while True:
        part = r.standardize()
        if part.A:
            gates = []
            for i in range(0, len(part.A), 2):
                x, y = part.A[i], part.A[i + 1]
                gates += [Gate("H", (x,)), Gate("CNOT", (y, x)), Gate("CNOT", (x, y))]
            r.apply(gates)
        elif part.B and part.D:
            r.apply([Gate("CNOT", (part.D[0], part.B[0]))])
        elif part.C and part.D:
            r.apply([Gate("CNOT", (part.D[0], part.C[0]))])
        elif len(part.B) >= 2:
            r.apply([Gate("CNOT", (part.B[0], part.B[1]))])
        elif len(part.C) >= 2:
            r.apply([Gate("CNOT", (part.C[0], part.C[1]))])
        else:
            p, q = part.B[0], part.C[0]
            break
    r.apply(_sign_fix(p, r.o1.sign, q, r.o2.sign, "Z"))
    return r.circuit(), p, q


@dataclass(frozen=True)
class HeisenbergTerm:
    """One ``a * C^* (x) C`` term; ``paulis`` is ``C`` as a Pauli combination."""

    coeff: float
    circuit: CliffordCircuit
    paulis: tuple[tuple[float, PauliString], ...]

    def pauli_matrix(self) -> np.ndarray:
        return sum(c * p.matrix() for c, p in self.paulis)


@dataclass(frozen=True)
class HeisenbergDecomposition:
    """``O1 (x) O2 + O2 (x) O1 = a0/2 ({O1,O2} (x) I + I (x) {O1,O2}) + sum_j a_j C_j^* (x) C_j``.

    ``product`` is ``O1 O2`` when the pair commutes (the ``a0`` term measures
    it), else ``None``. ``zero`` marks pairs whose expectation on any real
    swap-symmetric state vanishes identically; those carry no terms.
    """

    o1: PauliString
    o2: PauliString
    a0: float
    terms: tuple[HeisenbergTerm, ...]
    sigma: int
    product: PauliString | None = None
    zero: bool = False

    def anticommutator_matrix(self) -> np.ndarray:
        if self.product is None:
            return np.zeros((1 << len(self.o1),) * 2, dtype=complex)
        return 2 * self.product.matrix()

    def reconstruct(self, symbolic: bool = False) -> np.ndarray:
        """Dense right-hand side; register 1 is the low half of the basis index."""
        dim = 1 << len(self.o1)
        eye = np.eye(dim)
        anti = self.anticommutator_matrix()
        out = 0.5 * self.a0 * (np.kron(eye, anti) + np.kron(anti, eye))
        for t in self.terms:
            c = t.pauli_matrix() if symbolic else t.circuit.unitary()
            out = out + t.coeff * np.kron(c, c.conj())
        return out


def _sandwich(v: CliffordCircuit, middle: list[Gate]) -> CliffordCircuit:
    # operator V M V^dagger: V^dagger acts first
    return CliffordCircuit(v.n_qubits, v.inverse().gates + tuple(middle) + v.gates)


def _pauli_gates(p: PauliString) -> list[Gate]:
    return [Gate(c, (q,)) for q, c in enumerate(p.letters) if c != "I"]


def heisenberg_decompose(o1: PauliString, o2: PauliString) -> HeisenbergDecomposition:
    if len(o1) != len(o2):
        raise ValueError(f"length mismatch: {len(o1)} vs {len(o2)}")
    if o1.is_identity() or o2.is_identity():
        raise ValueError("heisenberg_decompose needs non-identity observables")
    n = len(o1)
    if o1.y_count % 2 != o2.y_count % 2:
        return HeisenbergDecomposition(o1, o2, 0.0, (), o1.conj_sign, None, zero=True)
    sigma = o1.conj_sign
    s = o1.sign * o2.sign
    p1, p2 = o1.unsigned(), o2.unsigned()

    if p1 == p2:
        c = CliffordCircuit(n, tuple(_pauli_gates(p1)))
        term = HeisenbergTerm(float(sigma * s), c, ((1.0, p1),))
        return HeisenbergDecomposition(o1, o2, 0.0, (term, term), sigma, PauliString.identity(n) if s > 0 else -PauliString.identity(n))

    if not commutes(p1, p2):
        v, q = lemma1_synthesize(p1, p2)
        r = 1 / np.sqrt(2)
        c1 = _sandwich(v, [Gate("H", (q,))])
        c2 = _sandwich(v, [Gate("X", (q,)), Gate("H", (q,)), Gate("X", (q,))])
        terms = (
            HeisenbergTerm(float(sigma * s), c1, ((r, p1), (r, p2))),
            HeisenbergTerm(float(-sigma * s), c2, ((r, p1), (-r, p2))),
        )
        return HeisenbergDecomposition(o1, o2, 0.0, terms, sigma)

    v, p, q = lemma2_synthesize(p1, p2)
    coeff, prod = p1 @ p2
    prod12 = PauliString(prod.letters, int(round(coeff.real)))
    terms = []
    for alpha, beta in ((0, 0), (0, 1), (1, 0), (1, 1)):
        flips = [Gate("X", (p,))] * alpha + [Gate("X", (q,))] * beta
        circ = _sandwich(v, flips + [Gate("CZ", (p, q))] + flips)
        sa, sb = (-1) ** alpha, (-1) ** beta
        paulis = (
            (0.5, PauliString.identity(n)),
            (0.5 * sa, p1),
            (0.5 * sb, p2),
            (-0.5 * sa * sb, prod12),
        )
        terms.append(HeisenbergTerm(float(sigma * s * sa * sb), circ, paulis))
    product = PauliString(prod12.letters, prod12.sign * s)
    return HeisenbergDecomposition(o1, o2, float(sigma), tuple(terms), sigma, product)
