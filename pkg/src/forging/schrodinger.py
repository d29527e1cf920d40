"""Schrödinger-picture forging of ``(U (x) V) sum_n lambda_n |b_n>|b_n>``.

The two-register density operator is rewritten as a signed combination of
product states ``rho_a (x) rho_a`` where each ``rho_a`` is either a bitstring
state or a superposition of two bitstrings. Each factor then only needs one
``n``-qubit register to evaluate.

Register 1 (acted on by ``U`` and observed by ``O1``) is the low half of a
``2n``-qubit basis index, register 2 the high half.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .gates import Gate
from .pauli import PauliString
from .statevector import (
    SeedLike,
    Statevector,
    apply_gates_array,
    basis_rotation,
    bits_to_index,
    circuit_unitary,
    parity_table,
    pauli_expectation_array,
)

NORM_ATOL = 1e-10


def _check_pair(x: str, y: str) -> None:
    if len(x) != len(y):
        raise ValueError(f"bitstrings of different lengths: {x!r}, {y!r}")
    if x == y:
        raise ValueError(f"bitstrings must differ, got {x!r} twice")
    if set(x + y) - {"0", "1"}:
        raise ValueError(f"not a bitstring pair: {x!r}, {y!r}")


def hamming(x: str, y: str) -> int:
    return sum(a != b for a, b in zip(x, y))


@dataclass(frozen=True)
class BitstringPrep:
    bits: str

    def state(self) -> np.ndarray:
        return Statevector.from_bits(self.bits).amplitudes

    def circuit(self) -> Circuit:
        n = len(self.bits)
        return Circuit(n, tuple(Gate("X", (q,)) for q, b in enumerate(self.bits) if b == "1"))


@dataclass(frozen=True)
class SuperpositionPrep:
    """``(|x> + i^p |y>) / sqrt(2)``."""

    x: str
    y: str
    p: int

    def state(self) -> np.ndarray:
        n = len(self.x)
        psi = np.zeros(1 << n, dtype=complex)
        psi[bits_to_index(self.x)] += 1 / np.sqrt(2)
        psi[bits_to_index(self.y)] += (1j ** (self.p % 4)) / np.sqrt(2)
        return psi

    def circuit(self) -> Circuit:
        return superposition_prep_circuit(self.x, self.y, self.p)


@dataclass(frozen=True)
class ProductPrep:
    """Tensor product of single-qubit states, phase ``exp(i pi p / 2d)`` on differing bits."""

    x: str
    y: str
    p: int

    def state(self) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for v in product_prep_state(self.x, self.y, self.p):
            # qubit 0 is the least significant bit, so later qubits go on the left
            out = np.kron(v, out)
        return out

    def circuit(self) -> Circuit:
        return product_prep_circuit(self.x, self.y, self.p)


Prep = BitstringPrep | SuperpositionPrep | ProductPrep


@dataclass(frozen=True)
class ForgedTerm:
    mu: float
    prep: Prep


_G = {0: ("H",), 1: ("H", "S"), 2: ("H", "Z"), 3: ("H", "Z", "S")}


def superposition_prep_circuit(x: str, y: str, p: int) -> Circuit:
    """Circuit taking ``|0...0>`` to ``(|x> + i^p |y>)/sqrt(2)`` up to a global phase."""
    _check_pair(x, y)
    p %= 4
    k = next(j for j, (a, b) in enumerate(zip(x, y)) if a != b)
    if x[k] == "1":
        x, y, p = y, x, (-p) % 4
    n = len(x)
    gates = [Gate("X", (q,)) for q, b in enumerate(x) if b == "1"]
    gates += [Gate(kind, (k,)) for kind in _G[p]]
    gates += [Gate("CNOT", (k, q)) for q in range(n) if q != k and x[q] != y[q]]
    return Circuit(n, tuple(gates))


def product_prep_state(x: str, y: str, p: int) -> list[np.ndarray]:
    """Single-qubit factors of the product state used by the product-state decomposition."""
    _check_pair(x, y)
    d = hamming(x, y)
    if not 0 <= p < 4 * d:
        raise ValueError(f"p must lie in [0, {4 * d}), got {p}")
    phase = np.exp(1j * np.pi * p / (2 * d))
    out = []
    for a, b in zip(x, y):
        v = np.zeros(2, dtype=complex)
        if a == b:
            v[int(a)] = 1
        else:
            v[int(a)] = 1 / np.sqrt(2)
            v[int(b)] = phase / np.sqrt(2)
        out.append(v)
    return out


def product_prep_circuit(x: str, y: str, p: int) -> Circuit:
    """H, X and Z-rotations preparing the product state up to a global phase."""
    _check_pair(x, y)
    d = hamming(x, y)
    theta = np.pi * p / (2 * d)
    gates = []
    for q, (a, b) in enumerate(zip(x, y)):
        if a == b:
            if a == "1":
                gates.append(Gate("X", (q,)))
        else:
            gates.append(Gate("H", (q,)))
            if theta:
                gates.append(Gate("RZ", (q,), theta if a == "0" else -theta))
    return Circuit(len(x), tuple(gates))


@dataclass(frozen=True)
class SchmidtAnsatz:
    """``(U (x) V) sum_n lambda_n |b_n>|b_n>``; ``V=None`` means ``V`` is ``U``.

    ``options`` holds extra ``key value`` directives carried by ansatz files.
    """

    n: int
    bitstrings: tuple[str, ...]
    lambdas: tuple[float, ...]
    U: Circuit
    V: Circuit | None = None
    options: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "bitstrings", tuple(self.bitstrings))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if len(self.bitstrings) != len(self.lambdas) or not self.bitstrings:
            raise ValueError("need one lambda per bitstring and at least one bitstring")
        for b in self.bitstrings:
            if len(b) != self.n or set(b) - {"0", "1"}:
                raise ValueError(f"bad bitstring {b!r} for n={self.n}")
        if len(set(self.bitstrings)) != len(self.bitstrings):
            raise ValueError("bitstrings must be pairwise distinct")
        if abs(sum(v * v for v in self.lambdas) - 1) > NORM_ATOL:
            raise ValueError("sum of squared lambdas must be 1")
        for c in (self.U, self.V):
            if c is not None and c.n_qubits != self.n:
                raise ValueError(f"circuit acts on {c.n_qubits} qubits, expected {self.n}")

    @property
    def k(self) -> int:
        return len(self.bitstrings)

    @property
    def same_as_u(self) -> bool:
        return self.V is None

    def with_lambdas(self, lambdas: Sequence[float]) -> "SchmidtAnsatz":
        return SchmidtAnsatz(self.n, self.bitstrings, tuple(lambdas), self.U, self.V, self.options)

    def bind(self, values) -> "SchmidtAnsatz":
        v = None if self.V is None else self.V.bind(values)
        return SchmidtAnsatz(self.n, self.bitstrings, self.lambdas, self.U.bind(values), v, self.options)

    def option(self, key: str, default: str | None = None) -> str | None:
        return dict(self.options).get(key, default)

    def statevector(self) -> np.ndarray:
        """The full ``2n``-qubit state (a direct construction, no forging)."""
        dim = 1 << self.n
        amps = np.zeros((dim, dim), dtype=complex)  # [register 2, register 1]
        for b, lam in zip(self.bitstrings, self.lambdas):
            i = bits_to_index(b)
            amps[i, i] += lam
        u = circuit_unitary(self.U)
        v = u if self.V is None else circuit_unitary(self.V)
        return (v @ amps @ u.T).reshape(-1)


def enumerate_forged_terms(ansatz: SchmidtAnsatz) -> list[ForgedTerm]:
    """Diagonal bitstring terms then, for each pair ``n > m``, four superposition terms."""
    b, lam = ansatz.bitstrings, ansatz.lambdas
    terms = [ForgedTerm(lam[i] ** 2, BitstringPrep(b[i])) for i in range(ansatz.k) if lam[i] != 0]
    for i in range(ansatz.k):
        for j in range(i):
            w = lam[i] * lam[j]
            if w == 0:
                continue
            for p in range(4):
                terms.append(ForgedTerm((-1) ** p * w, SuperpositionPrep(b[i], b[j], p)))
    return terms


def rotated_states(circuit: Circuit, preps: Sequence[Prep]) -> np.ndarray:
    if not circuit.is_bound:
        raise ValueError(f"unbound parameters {circuit.parameters}")
    if not preps:
        return np.zeros((0, 1 << circuit.n_qubits), dtype=complex)
    states = np.array([pr.state() for pr in preps])
    return apply_gates_array(states, circuit.gates, circuit.n_qubits)


def _check_observables(ansatz: SchmidtAnsatz, o1: PauliString, o2: PauliString) -> None:
    if len(o1) != ansatz.n or len(o2) != ansatz.n:
        raise ValueError(f"observables must act on {ansatz.n} qubits, got {len(o1)} and {len(o2)}")


def is_real_setup(ansatz: SchmidtAnsatz, o1: PauliString, o2: PauliString) -> bool:
    """True when ``U``, ``V`` and both observables are real in the computational basis."""
    circuits = [ansatz.U] if ansatz.V is None else [ansatz.U, ansatz.V]
    return all(c.is_real() for c in circuits) and o1.y_count % 2 == 0 and o2.y_count % 2 == 0


@dataclass
class ExactEvaluation:
    value: float
    circuits_evaluated: int


def forged_expectation_detail(
    ansatz: SchmidtAnsatz,
    o1: PauliString,
    o2: PauliString,
    elide_odd: bool | None = None,
) -> ExactEvaluation:
    """Exact forged ``<psi|O1 (x) O2|psi>`` plus the number of distinct
    ``n``-qubit state preparations it needed.

    With ``elide_odd`` (default: on for real setups) odd-``p`` superposition
    states are never prepared. On real setups ``<phi^1|O|phi^1> = <phi^3|O|phi^3>``
    equals the mean of the ``p=0`` and ``p=2`` values for the same pair, so they
    are filled in from those. Their contribution does not vanish in general.
    Terms where one observable is the identity skip superposition states
    entirely, since their signed sum over ``p`` vanishes.
    """
    _check_observables(ansatz, o1, o2)
    if elide_odd is None:
        elide_odd = is_real_setup(ansatz, o1, o2)
    elif elide_odd and not is_real_setup(ansatz, o1, o2):
        raise ValueError("odd-p elision requires real U, V and real observables")
    terms = enumerate_forged_terms(ansatz)
    single_register = o1.is_identity() or o2.is_identity()

    diag = [t for t in terms if isinstance(t.prep, BitstringPrep)]
    off = [] if single_register else [t for t in terms if not isinstance(t.prep, BitstringPrep)]
    measured = diag + [t for t in off if not (elide_odd and t.prep.p % 2)]

    def expectations(circuit: Circuit, obs: PauliString) -> dict[Prep, float]:
        states = rotated_states(circuit, [t.prep for t in measured])
        return dict(zip((t.prep for t in measured), pauli_expectation_array(states, obs)))

    e1 = expectations(ansatz.U, o1)
    e2 = expectations(ansatz.U if ansatz.V is None else ansatz.V, o2)
    n_circuits = len(measured) * (1 if ansatz.V is None else 2)

    def lookup(e: dict[Prep, float], prep: Prep) -> float:
        if prep in e:
            return e[prep]
        return 0.5 * (e[SuperpositionPrep(prep.x, prep.y, 0)] + e[SuperpositionPrep(prep.x, prep.y, 2)])

    value = 0.0
    for t in diag + off:
        value += t.mu * lookup(e1, t.prep) * lookup(e2, t.prep)
    return ExactEvaluation(float(value), n_circuits)


def forged_expectation_exact(
    ansatz: SchmidtAnsatz,
    o1: PauliString,
    o2: PauliString,
    elide_odd: bool | None = None,
) -> float:
    return forged_expectation_detail(ansatz, o1, o2, elide_odd).value


def product_forged_terms(ansatz: SchmidtAnsatz) -> list[ForgedTerm]:
    b, lam = ansatz.bitstrings, ansatz.lambdas
    terms = [ForgedTerm(lam[i] ** 2, BitstringPrep(b[i])) for i in range(ansatz.k) if lam[i] != 0]
    for i in range(ansatz.k):
        for j in range(i + 1, ansatz.k):
            w = lam[i] * lam[j]
            if w == 0:
                continue
            d = hamming(b[i], b[j])
            scale = w * 4**d / (4 * d)
            for p in range(4 * d):
                terms.append(ForgedTerm((-1) ** p * scale, ProductPrep(b[i], b[j], p)))
    return terms


def amplification(ansatz: SchmidtAnsatz) -> float:
    """Error amplification ``1 + sum_{n<m} |lambda_n lambda_m| 4^d(n,m)`` of the product-state route."""
    b, lam = ansatz.bitstrings, ansatz.lambdas
    return 1.0 + sum(
        abs(lam[i] * lam[j]) * 4 ** hamming(b[i], b[j])
        for i in range(ansatz.k)
        for j in range(i + 1, ansatz.k)
    )


def forged_expectation_product_exact(
    ansatz: SchmidtAnsatz, o1: PauliString, o2: PauliString
) -> tuple[float, float]:
    """Forged expectation through single-qubit product states; returns ``(value, amplification)``."""
    _check_observables(ansatz, o1, o2)
    terms = product_forged_terms(ansatz)
    s1 = rotated_states(ansatz.U, [t.prep for t in terms])
    s2 = s1 if ansatz.V is None else rotated_states(ansatz.V, [t.prep for t in terms])
    mu = np.array([t.mu for t in terms])
    value = float(np.sum(mu * pauli_expectation_array(s1, o1) * pauli_expectation_array(s2, o2)))
    return value, amplification(ansatz)


def _ceil(x: float) -> int:
    # guard against products like 200 * 3**2 / 0.1**2 landing a hair above an integer
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


@dataclass(frozen=True)
class SampleBudget:
    one_norm: float
    one_norm_closed_form: float
    epsilon: float
    S: int
    S_closed_form: int
    pi: tuple[float, ...]
    terms: tuple[ForgedTerm, ...]

    @property
    def pairs(self) -> int:
        """Number of sampled term pairs (two experiments each)."""
        return max(1, _ceil(self.S / 2))


def experiments_needed(one_norm: float, epsilon: float) -> int:
    """Experiments for additive error ``epsilon`` at 99% confidence."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return _ceil(200 * one_norm**2 / epsilon**2)


def sampling_budget(ansatz: SchmidtAnsatz, epsilon: float) -> SampleBudget:
    """Budget from the enumerated coefficients; the closed form
    ``1 + 4 (sum |lambda|)^2`` is reported next to it."""
    terms = enumerate_forged_terms(ansatz)
    mu = np.array([t.mu for t in terms])
    one_norm = float(np.abs(mu).sum())
    closed = 1 + 4 * sum(abs(v) for v in ansatz.lambdas) ** 2
    pi = tuple(float(v) for v in np.abs(mu) / one_norm)
    return SampleBudget(
        one_norm=one_norm,
        one_norm_closed_form=closed,
        epsilon=epsilon,
        S=experiments_needed(one_norm, epsilon),
        S_closed_form=experiments_needed(closed, epsilon),
        pi=pi,
        terms=tuple(terms),
    )


def seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(2**63)))
    return np.random.SeedSequence(seed)


def chunked(total: int, chunk: int) -> list[int]:
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def run_chunks(fn, sizes: list[int], seed: SeedLike, workers: int = 1) -> list:
    """Run ``fn(size, rng)`` per chunk with spawned seeds; results keep chunk order."""
    rngs = [np.random.default_rng(s) for s in seed_sequence(seed).spawn(len(sizes))]
    if workers <= 1:
        return [fn(m, r) for m, r in zip(sizes, rngs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, sizes, rngs))


class ForgingSampler:
    """Monte Carlo estimator of ``<psi|O1 (x) O2|psi>``.

    Each draw picks a term ``a`` with probability ``|mu_a| / ||mu||_1``, then
    measures one shot of ``rho_a`` in the eigenbasis of ``O1`` (through ``U``)
    and one shot in the eigenbasis of ``O2`` (through ``V``), and scores
    ``||mu||_1 sgn(mu_a) O1(x) O2(y)``.
    """

    chunk = 1 << 15

    def __init__(self, ansatz: SchmidtAnsatz, o1: PauliString, o2: PauliString):
        _check_observables(ansatz, o1, o2)
        self.ansatz, self.o1, self.o2 = ansatz, o1, o2
        self.terms = enumerate_forged_terms(ansatz)
        mu = np.array([t.mu for t in self.terms])
        self.one_norm = float(np.abs(mu).sum())
        self.pi = np.abs(mu) / self.one_norm
        self.sgn = np.sign(mu)
        n = ansatz.n
        preps = [t.prep for t in self.terms]
        v = ansatz.U if ansatz.V is None else ansatz.V
        self.cdf1 = self._cdf(ansatz.U, o1, preps)
        self.cdf2 = self._cdf(v, o2, preps)
        self.eig1 = parity_table(o1, n)
        self.eig2 = parity_table(o2, n)

    @staticmethod
    def _cdf(circuit: Circuit, obs: PauliString, preps: list[Prep]) -> np.ndarray:
        states = rotated_states(circuit, preps)
        states = apply_gates_array(states, basis_rotation(obs), circuit.n_qubits)
        cdf = np.cumsum(np.abs(states) ** 2, axis=1)
        cdf[:, -1] = np.inf
        return cdf

    def _draw(self, m: int, rng: np.random.Generator) -> np.ndarray:
        a = rng.choice(len(self.terms), size=m, p=self.pi)
        x = (rng.random(m)[:, None] >= self.cdf1[a]).sum(axis=1)
        y = (rng.random(m)[:, None] >= self.cdf2[a]).sum(axis=1)
        return self.one_norm * self.sgn[a] * self.eig1[x] * self.eig2[y]

    def samples(self, m: int, seed: SeedLike = None, workers: int = 1) -> np.ndarray:
        parts = run_chunks(self._draw, chunked(m, self.chunk), seed, workers)
        return np.concatenate(parts)

    def estimate(self, m: int, seed: SeedLike = None, workers: int = 1) -> tuple[float, float]:
        if m < 1:
            raise ValueError("M must be >= 1")
        vals = self.samples(m, seed, workers)
        err = float(vals.std(ddof=1) / np.sqrt(m)) if m > 1 else float(self.one_norm)
        return float(vals.mean()), err


def estimate_sampled(
    ansatz: SchmidtAnsatz,
    o1: PauliString,
    o2: PauliString,
    M: int,
    seed: SeedLike = None,
    workers: int = 1,
) -> tuple[float, float]:
    """Sampled forged expectation from ``M`` term draws; returns ``(f, stderr)``."""
    return ForgingSampler(ansatz, o1, o2).estimate(M, seed, workers)


def schmidt_spectrum(state: Statevector | np.ndarray) -> np.ndarray:
    """Schmidt coefficients across the half-half cut, sorted descending."""
    amps = state.amplitudes if isinstance(state, Statevector) else np.asarray(state)
    total = int(round(np.log2(amps.size)))
    if 1 << total != amps.size or total % 2:
        raise ValueError(f"need an even number of qubits, got {amps.size} amplitudes")
    half = 1 << (total // 2)
    return np.linalg.svd(amps.reshape(half, half), compute_uv=False)


def truncation_residual(lambdas: Sequence[float], k: int) -> float:
    """Weight ``1 - sum_{n<=k} lambda_n^2`` dropped by keeping the leading ``k`` values."""
    if k < 0:
        raise ValueError("k must be >= 0")
    lam = np.asarray(lambdas, dtype=float)
    return float(max(0.0, 1 - np.sum(lam[:k] ** 2)))


def format_ansatz(ansatz: SchmidtAnsatz) -> str:
    lines = [f"n {ansatz.n} k {ansatz.k}"]
    lines += [f"{b} {lam!r}" for b, lam in zip(ansatz.bitstrings, ansatz.lambdas)]
    lines += [f"{key} {value}" for key, value in ansatz.options]
    lines.append("U")
    text = "\n".join(lines) + "\n" + ansatz.U.to_text()
    if ansatz.V is not None:
        text += "V\n" + ansatz.V.to_text()
    return text


def parse_ansatz(text: str) -> SchmidtAnsatz:
    """Read the ansatz file format written by :func:`format_ansatz`."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise ValueError("empty ansatz file")
    lineno, header = rows[0]
    tok = header.split()
    if len(tok) != 4 or tok[0] != "n" or tok[2] != "k":
        raise ValueError(f"line {lineno}: expected header 'n <int> k <int>'")
    n, k = int(tok[1]), int(tok[3])
    if len(rows) < 1 + k:
        raise ValueError(f"expected {k} bitstring lines")
    bits, lams = [], []
    for lineno, line in rows[1 : 1 + k]:
        tok = line.split()
        if len(tok) != 2:
            raise ValueError(f"line {lineno}: expected 'bitstring lambda'")
        bits.append(tok[0])
        try:
            lams.append(float(tok[1]))
        except ValueError:
            raise ValueError(f"line {lineno}: bad lambda {tok[1]!r}") from None
    options = []
    blocks: dict[str, list[str]] = {}
    current = None
    for lineno, line in rows[1 + k :]:
        if line in ("U", "V"):
            if line in blocks:
                raise ValueError(f"line {lineno}: duplicate {line} block")
            current = line
            blocks[current] = []
        elif current is None:
            key, _, value = line.partition(" ")
            options.append((key, value.strip()))
        else:
            blocks[current].append(line)
    if "U" not in blocks:
        raise ValueError("missing U block")
    u = Circuit.from_text(blocks["U"], n)
    v = Circuit.from_text(blocks["V"], n) if "V" in blocks else None
    return SchmidtAnsatz(n, tuple(bits), tuple(lams), u, v, tuple(options))
