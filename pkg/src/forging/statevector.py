"""Dense statevector simulation.

Basis index bit ``q`` holds qubit ``q`` (qubit 0 is the least significant
bit). Bitstrings are written with qubit 0 leftmost, so ``"100"`` on three
qubits is basis index 1.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .gates import Gate
from .pauli import PauliString

SeedLike = int | np.random.Generator | np.random.SeedSequence | None


def bits_to_index(bits: str) -> int:
    return sum(1 << q for q, b in enumerate(bits) if b == "1")


def index_to_bits(index: int, n: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n: int) -> "Statevector":
        return cls.basis(n, 0)

    @classmethod
    def basis(cls, n: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1
        return cls(n, amps)

    @classmethod
    def from_bits(cls, bits: str) -> "Statevector":
        return cls.basis(len(bits), bits_to_index(bits))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def apply_gate_array(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to ``psi`` of shape ``(..., 2**n)``."""
    lead = psi.shape[:-1]
    t = psi.reshape(lead + (2,) * n)
    off = len(lead)
    axes = [off + n - 1 - q for q in gate.qubits]
    m = gate.matrix()
    if gate.arity == 1:
        t = np.tensordot(m, t, axes=([1], axes))
        t = np.moveaxis(t, 0, axes[0])
    else:
        t = np.tensordot(m.reshape(2, 2, 2, 2), t, axes=([2, 3], axes))
        t = np.moveaxis(t, [0, 1], axes)
    return t.reshape(psi.shape)


def apply_gates_array(psi: np.ndarray, gates: Iterable[Gate], n: int) -> np.ndarray:
    for g in gates:
        psi = apply_gate_array(psi, g, n)
    return psi


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {state.n_qubits} qubits, circuit {circuit.n_qubits}")
    if not circuit.is_bound:
        raise ValueError(f"unbound parameters {circuit.parameters}")
    return Statevector(state.n_qubits, apply_gates_array(state.amplitudes, circuit.gates, circuit.n_qubits))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    dim = 1 << circuit.n_qubits
    rows = apply_gates_array(np.eye(dim, dtype=complex), circuit.gates, circuit.n_qubits)
    return rows.T


def _pauli_phases(p: PauliString, dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(p.z_mask)) & 1
    return p.sign * (1j ** (p.y_count % 4)) * (1 - 2 * parity.astype(float))


def apply_pauli_array(psi: np.ndarray, p: PauliString) -> np.ndarray:
    """``P @ psi`` for ``psi`` of shape ``(..., 2**n)``."""
    dim = psi.shape[-1]
    out = np.empty_like(psi, dtype=complex)
    idx = np.arange(dim)
    out[..., idx ^ p.x_mask] = psi * _pauli_phases(p, dim)
    return out


def pauli_expectation_array(psi: np.ndarray, p: PauliString) -> np.ndarray:
    """Real part of ``<psi|P|psi>`` along the last axis."""
    return np.einsum("...i,...i->...", psi.conj(), apply_pauli_array(psi, p)).real


def pauli_expectation(state: Statevector, p: PauliString) -> float:
    if len(p) != state.n_qubits:
        raise ValueError(f"Pauli of length {len(p)} on a {state.n_qubits}-qubit state")
    return float(pauli_expectation_array(state.amplitudes, p))


def counts_from_indices(indices: np.ndarray, n: int) -> dict[str, int]:
    values, counts = np.unique(indices, return_counts=True)
    return {index_to_bits(int(v), n): int(c) for v, c in zip(values, counts)}


def _sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    probs = np.clip(probs, 0, None)
    return rng.multinomial(shots, probs / probs.sum())


def measure_samples(state: Statevector, shots: int, seed: SeedLike = None) -> dict[str, int]:
    """Sample ``shots`` computational-basis measurements; returns bitstring counts."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    counts = _sample_counts(state.probabilities(), shots, rng)
    return {index_to_bits(i, state.n_qubits): int(counts[i]) for i in np.flatnonzero(counts)}


def fold_circuit(circuit: Circuit, factor: int = 3) -> Circuit:
    """Replace every gate ``G`` by ``G (G^-1 G)^((factor-1)/2)``."""
    if factor < 1 or factor % 2 == 0:
        raise ValueError(f"fold factor must be a positive odd integer, got {factor}")
    gates: list[Gate] = []
    for g in circuit.gates:
        gates.append(g)
        inv = g.inverse()
        for _ in range((factor - 1) // 2):
            gates.extend((inv, g))
    return Circuit(circuit.n_qubits, tuple(gates))


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic depolarizing noise: after a gate, a uniformly random non-identity
    Pauli hits its targets with probability ``p1`` (one-qubit gates) or ``p2``
    (two-qubit gates)."""

    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def probability(self, gate: Gate) -> float:
        return self.p1 if gate.arity == 1 else self.p2


_LETTER = "IXYZ"


def _error_gates(gate: Gate, code: int) -> list[Gate]:
    """Pauli gates for error ``code`` in ``1 .. 4**arity - 1`` on ``gate``'s targets."""
    out = []
    for pos, q in enumerate(reversed(gate.qubits)):
        letter = _LETTER[(code >> (2 * pos)) & 3]
        if letter != "I":
            out.append(Gate(letter, (q,)))
    return out


def sample_noisy(
    prep: Circuit,
    noise: NoiseModel,
    shots: int,
    seed: SeedLike = None,
    initial: Statevector | None = None,
) -> dict[str, int]:
    """Shot-sample ``prep`` under stochastic Pauli noise.

    Each shot draws its own error pattern. Shots with identical patterns share
    one statevector trajectory, so the cost scales with the number of distinct
    patterns rather than with ``shots``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not prep.is_bound:
        raise ValueError(f"unbound parameters {prep.parameters}")
    rng = np.random.default_rng(seed)
    n = prep.n_qubits
    psi0 = (initial.amplitudes if initial is not None else Statevector.zero(n).amplitudes).copy()
    gates = prep.gates
    probs = np.array([noise.probability(g) for g in gates])
    n_codes = np.array([4 ** g.arity for g in gates])

    if len(gates) == 0 or not probs.any():
        counts = _sample_counts(np.abs(apply_gates_array(psi0, gates, n)) ** 2, shots, rng)
        return {index_to_bits(i, n): int(counts[i]) for i in np.flatnonzero(counts)}

    hit = rng.random((shots, len(gates))) < probs
    which = rng.integers(1, n_codes, size=(shots, len(gates)))
    codes = np.where(hit, which, 0)
    patterns, multiplicity = np.unique(codes, axis=0, return_counts=True)

    # ideal states after each gate, for restarting at the first error
    prefix = [psi0]
    for g in gates:
        prefix.append(apply_gate_array(prefix[-1], g, n))

    total = np.zeros(1 << n, dtype=np.int64)
    for pattern, mult in zip(patterns, multiplicity):
        errs = np.flatnonzero(pattern)
        if len(errs) == 0:
            psi = prefix[-1]
        else:
            first = errs[0]
            psi = prefix[first + 1]
            for k in range(first, len(gates)):
                if k > first:
                    psi = apply_gate_array(psi, gates[k], n)
                if pattern[k]:
                    psi = apply_gates_array(psi, _error_gates(gates[k], int(pattern[k])), n)
        total += _sample_counts(np.abs(psi) ** 2, int(mult), rng)
    return {index_to_bits(i, n): int(total[i]) for i in np.flatnonzero(total)}


def check_line_layout(
    circuit: Circuit,
    adjacency: Iterable[tuple[int, int]],
    hop_swaps: bool = False,
) -> bool:
    """True iff every two-qubit gate acts on a pair listed in ``adjacency``.

    With ``hop_swaps`` each ``HOP`` is taken to be compiled as a swap followed
    by its native core, with the swap absorbed into a relabeling of the wires
    that follow. ``MODHOP`` has no swap and relabels nothing. ``adjacency`` is
    then read in terms of the initial wire positions.
    """
    edges = {frozenset(e) for e in adjacency}
    wire = list(range(circuit.n_qubits))
    for g in circuit.gates:
        if g.arity != 2:
            continue
        a, b = g.qubits
        if frozenset((wire[a], wire[b])) not in edges:
            return False
        if hop_swaps and g.kind == "HOP":
            wire[a], wire[b] = wire[b], wire[a]
    return True


def parity_table(p: PauliString, n: int) -> np.ndarray:
    """Eigenvalue (+1/-1, including the sign of ``p``) of the Z-rotated form of ``p``
    on each measured basis index."""
    idx = np.arange(1 << n, dtype=np.uint64)
    mask = np.uint64(sum(1 << q for q in p.support))
    parity = np.bitwise_count(idx & mask) & 1
    return p.sign * (1 - 2 * parity.astype(np.int64))


def basis_rotation(p: PauliString) -> list[Gate]:
    """Single-qubit gates mapping every X or Y letter of ``p`` to Z."""
    gates = []
    for q, c in enumerate(p.letters):
        if c == "X":
            gates.append(Gate("H", (q,)))
        elif c == "Y":
            gates.extend((Gate("SDG", (q,)), Gate("H", (q,))))
    return gates
