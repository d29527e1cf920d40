"""Variational search over forged ansätze.

Energies are quadratic in the Schmidt coefficients, ``E = lambda^T h lambda``,
so each optimizer step only moves the hop-gate angles; ``lambda`` is set to
the lowest eigenvector of ``h`` at every evaluation.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .gates import Gate
from .hamiltonian import Hamiltonian, validate_realness
from .orchestration import ZneSchedule, expectation_from_counts, tpb_group, zne_extrapolate, zne_weights
from .pauli import PauliString
from .schrodinger import (
    BitstringPrep,
    Prep,
    SchmidtAnsatz,
    SuperpositionPrep,
    rotated_states,
    seed_sequence,
)
from .statevector import (
    NoiseModel,
    SeedLike,
    basis_rotation,
    fold_circuit,
    pauli_expectation_array,
    sample_noisy,
)


class IncompleteEvaluationError(ValueError):
    """An h-matrix entry needs an expectation value that was not evaluated."""


@dataclass(frozen=True)
class HopEntry:
    """One hop gate on ``pair``: angle from parameter ``param`` or the fixed ``angle``."""

    pair: tuple[int, int]
    param: int | None = None
    angle: float | None = None
    kind: str = "HOP"

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(int(q) for q in self.pair))
        if (self.param is None) == (self.angle is None):
            raise ValueError("give exactly one of param and angle")
        if self.kind not in ("HOP", "MODHOP"):
            raise ValueError(f"hop entries are HOP or MODHOP, got {self.kind}")


@dataclass(frozen=True)
class AnsatzConfig:
    n: int
    bitstrings: tuple[str, ...]
    gates: tuple[HopEntry, ...] = ()
    hf_freeze: bool = False
    hf_energy: float | None = None
    theta0: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "bitstrings", tuple(self.bitstrings))
        object.__setattr__(self, "gates", tuple(self.gates))
        for b in self.bitstrings:
            if len(b) != self.n or set(b) - {"0", "1"}:
                raise ValueError(f"bad bitstring {b!r} for n={self.n}")
        if len(set(self.bitstrings)) != len(self.bitstrings) or not self.bitstrings:
            raise ValueError("bitstrings must be distinct and non-empty")
        for g in self.gates:
            a, b = g.pair
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise ValueError(f"orbital pair {g.pair} out of range for n={self.n}")
        ids = sorted({g.param for g in self.gates if g.param is not None})
        if ids != list(range(len(ids))):
            raise ValueError(f"parameter ids must be 0..m-1, got {ids}")
        if self.hf_freeze and self.hf_energy is None:
            raise ValueError("hf_freeze needs hf_energy")
        if self.theta0 is not None and len(self.theta0) != len(ids):
            raise ValueError(f"theta0 has {len(self.theta0)} values for {len(ids)} parameters")

    @property
    def n_params(self) -> int:
        return len({g.param for g in self.gates if g.param is not None})

    @property
    def k(self) -> int:
        return len(self.bitstrings)

    def initial_theta(self) -> np.ndarray:
        return np.zeros(self.n_params) if self.theta0 is None else np.array(self.theta0, dtype=float)

    @classmethod
    def from_orbital_table(
        cls,
        bitstrings: Sequence[str],
        table: Sequence[tuple[tuple[int, int], float]],
        frozen: Sequence[int] = (),
        shared_zero_angles: bool = False,
        **kwargs,
    ) -> "AnsatzConfig":
        """Build from full-orbital bitstrings and an ordered ``((i, j), angle)`` table.

        Frozen orbitals are removed and the rest renumbered in order. Each table
        row becomes its own parameter, initialized at the listed angle; with
        ``shared_zero_angles`` rows listed at exactly zero stay fixed instead.
        """
        total = len(bitstrings[0])
        frozen = sorted(set(frozen))
        active = [q for q in range(total) if q not in frozen]
        remap = {q: i for i, q in enumerate(active)}
        bits = tuple("".join(b[q] for q in active) for b in bitstrings)
        entries, theta0 = [], []
        for (i, j), angle in table:
            if i not in remap or j not in remap:
                raise ValueError(f"orbital pair {(i, j)} touches a frozen or missing orbital")
            if shared_zero_angles and angle == 0:
                entries.append(HopEntry((remap[i], remap[j]), angle=0.0))
            else:
                entries.append(HopEntry((remap[i], remap[j]), param=len(theta0)))
                theta0.append(float(angle))
        return cls(len(active), bits, tuple(entries), theta0=tuple(theta0), **kwargs)

    @classmethod
    def from_schmidt_ansatz(cls, ansatz: SchmidtAnsatz) -> "AnsatzConfig":
        """Hop gates of ``U`` with named angles as parameters (first appearance order).

        Options read: ``theta0`` (comma-separated) and ``hf_energy`` (turns on
        the frozen Hartree-Fock diagonal).
        """
        names = {name: i for i, name in enumerate(ansatz.U.parameters)}
        entries = []
        for g in ansatz.U.gates:
            if g.kind not in ("HOP", "MODHOP"):
                raise ValueError(f"ansatz U may only contain hop gates, found {g.kind}")
            if g.is_bound:
                entries.append(HopEntry(g.qubits, angle=float(g.angle), kind=g.kind))
            else:
                entries.append(HopEntry(g.qubits, param=names[g.angle], kind=g.kind))
        if ansatz.V is not None:
            raise ValueError("variational runs use V = U")
        theta0 = ansatz.option("theta0")
        hf = ansatz.option("hf_energy")
        return cls(
            ansatz.n,
            ansatz.bitstrings,
            tuple(entries),
            hf_freeze=hf is not None,
            hf_energy=None if hf is None else float(hf),
            theta0=None if theta0 is None else tuple(float(v) for v in theta0.split(",")),
        )


def build_U(config: AnsatzConfig, params: Sequence[float]) -> Circuit:
    params = np.asarray(params, dtype=float)
    if params.shape != (config.n_params,):
        raise ValueError(f"expected {config.n_params} parameters, got {params.shape}")
    gates = []
    for g in config.gates:
        angle = g.angle if g.param is None else float(params[g.param])
        gates.append(Gate(g.kind, g.pair, angle))
    return Circuit(config.n, tuple(gates))


# ordered orbital pairs and angles of a ten-bitstring water ansatz
# over 7 orbitals (orbitals 0 and 4 frozen)
WATER_K10_BITSTRINGS = (
    "1111100", "1011101", "1011110", "1101110", "1101101",
    "1110110", "1110101", "1001111", "1010111", "1100111",
)
WATER_K10_FROZEN = (0, 4)
WATER_K10_TABLE = (
    ((1, 2), 1.57107008e00), ((5, 6), 7.85631357e-01), ((2, 6), 0.0),
    ((1, 3), -1.64124047e-01), ((5, 6), 6.94946136e-01), ((2, 3), 0.0),
    ((3, 5), -1.32698309e-03), ((3, 5), 0.0), ((1, 3), 7.47539070e-02),
    ((2, 6), 2.73733721e-04), ((2, 6), 0.0), ((1, 2), 8.04994286e-01),
    ((5, 6), 8.85249894e-01), ((2, 6), 0.0), ((1, 3), -1.01079874e00),
    ((5, 6), 7.98610796e-01), ((2, 3), 0.0), ((3, 5), 1.79900833e-03),
    ((3, 5), 0.0), ((1, 3), -6.89839195e-02), ((2, 6), 2.45242043e-03),
    ((2, 6), 0.0), ((1, 2), 1.20565841e-03), ((5, 6), -1.23329417e-02),
    ((2, 6), 0.0), ((1, 3), 1.68445871e-02), ((5, 6), -9.59290116e-03),
    ((2, 3), 0.0), ((3, 5), -1.11378980e-02), ((3, 5), 0.0),
    ((1, 3), 7.22490009e-03), ((2, 6), -8.25656996e-04), ((2, 6), 0.0),
)


def water_k10_config(**kwargs) -> AnsatzConfig:
    return AnsatzConfig.from_orbital_table(WATER_K10_BITSTRINGS, WATER_K10_TABLE, WATER_K10_FROZEN, **kwargs)


@dataclass
class ForgingPieces:
    """Single-register expectation values feeding the h-matrix.

    ``diag[r][(n, letters)]`` is ``<b_n|O~|b_n>`` on register ``r`` (0 or 1) and
    ``off[r][(n, m, p, letters)]`` the value on ``phi^p_{b_n b_m}``.
    """

    k: int
    diag: tuple[dict, dict] = field(default_factory=lambda: ({}, {}))
    off: tuple[dict, dict] = field(default_factory=lambda: ({}, {}))
    stderr2: float = 0.0
    shots: int = 0


@dataclass(frozen=True)
class HMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("h must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("h has non-finite entries")
        if np.max(np.abs(m - m.T), initial=0.0) > 1e-10:
            raise ValueError("h must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    def energy(self, lambdas: Sequence[float]) -> float:
        lam = np.asarray(lambdas, dtype=float)
        return float(lam @ self.matrix @ lam)


def _lookup(table: dict, key, what: str) -> float:
    try:
        return table[key]
    except KeyError:
        raise IncompleteEvaluationError(f"missing {what} {key}") from None


def assemble_h_matrix(h: Hamiltonian, pieces: ForgingPieces, hf_energy: float | None = None) -> HMatrix:
    """``h_nn = sum_c c D_n(O1) D_n(O2)`` and
    ``h_nm = 1/2 sum_c c sum_p (-1)^p E^p_nm(O1) E^p_nm(O2)``.

    With ``hf_energy`` the first diagonal entry is that constant and its
    pieces are not consulted.
    """
    k = pieces.k
    out = np.zeros((k, k))
    terms = h.split_terms()
    for n in range(k):
        if n == 0 and hf_energy is not None:
            out[0, 0] = hf_energy
            continue
        for c, o1, o2 in terms:
            d1 = 1.0 if o1.is_identity() else _lookup(pieces.diag[0], (n, o1.letters), "diagonal piece")
            d2 = 1.0 if o2.is_identity() else _lookup(pieces.diag[1], (n, o2.letters), "diagonal piece")
            out[n, n] += c * d1 * d2
    for n in range(k):
        for m in range(n):
            acc = 0.0
            for c, o1, o2 in terms:
                # the signed sum over p vanishes when either factor is the identity
                if o1.is_identity() or o2.is_identity():
                    continue
                for p in range(4):
                    e1 = _lookup(pieces.off[0], (n, m, p, o1.letters), "superposition piece")
                    e2 = _lookup(pieces.off[1], (n, m, p, o2.letters), "superposition piece")
                    acc += (-1) ** p * c * e1 * e2
            out[n, m] = out[m, n] = 0.5 * acc
    return HMatrix(out)


def update_lambda(h: HMatrix, atol: float = 1e-10) -> np.ndarray:
    """Unit eigenvector of the lowest eigenvalue, first nonzero component positive.

    A degenerate lowest eigenvalue is resolved by projecting ``e_0, e_1, ...``
    onto the eigenspace and keeping the first nonzero projection.
    """
    w, v = np.linalg.eigh(h.matrix)
    block = v[:, np.abs(w - w[0]) <= atol * max(1.0, abs(w[0]))]
    if block.shape[1] == 1:
        vec = block[:, 0]
    else:
        for i in range(h.k):
            vec = block @ block[i]
            if np.linalg.norm(vec) > 1e-8:
                break
        vec = vec / np.linalg.norm(vec)
    first = vec[np.flatnonzero(np.abs(vec) > 1e-12)[0]]
    return vec if first > 0 else -vec


@dataclass(frozen=True)
class Evaluation:
    energy: float
    stderr: float = 0.0
    lambdas: tuple[float, ...] = ()
    shots: int = 0


@dataclass
class IterationRecord:
    iteration: int
    theta: np.ndarray
    lambdas: np.ndarray
    energy: float
    stderr: float
    shots: int


@dataclass
class VqeTrajectory:
    records: list[IterationRecord] = field(default_factory=list)
    best_theta: np.ndarray | None = None
    best_energy: float = math.inf
    aborted: bool = False

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def final_energy(self) -> float:
        return self.records[-1].energy

    def to_csv(self) -> str:
        k = max((len(r.lambdas) for r in self.records), default=0)
        m = max((len(r.theta) for r in self.records), default=0)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["iteration", "energy", "stderr"]
            + [f"lambda_{i + 1}" for i in range(k)]
            + [f"theta_{i + 1}" for i in range(m)]
            + ["shots"]
        )
        for r in self.records:
            w.writerow(
                [r.iteration, repr(r.energy), repr(r.stderr)]
                + [repr(float(v)) for v in r.lambdas]
                + [repr(float(v)) for v in r.theta]
                + [r.shots]
            )
        return buf.getvalue()


@dataclass(frozen=True)
class SpsaSettings:
    alpha: float = 0.602
    gamma: float = 0.101
    c: float = 0.1
    a: float | None = None
    A: float | None = None
    target_step: float = 0.2
    calibration_probes: int = 5


def _as_eval(value) -> Evaluation:
    return value if isinstance(value, Evaluation) else Evaluation(float(value))


def spsa_optimize(
    objective: Callable[[np.ndarray], float | Evaluation],
    theta0: Sequence[float],
    iterations: int,
    seed: SeedLike = None,
    settings: SpsaSettings = SpsaSettings(),
) -> VqeTrajectory:
    """SPSA with gains ``a/(k+1+A)^alpha`` and ``c/(k+1)^gamma``.

    Iteration ``k`` records the objective at the current point, then steps
    along a two-sided simultaneous-perturbation gradient. When ``a`` is not
    given it is chosen so the first step has size about ``target_step``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    theta = np.array(theta0, dtype=float)
    rng = np.random.default_rng(seed_sequence(seed))
    s = settings
    A = 0.1 * iterations if s.A is None else s.A
    traj = VqeTrajectory()

    def grad(point: np.ndarray, ck: float) -> tuple[np.ndarray, int, bool]:
        delta = rng.choice([-1.0, 1.0], size=point.size)
        plus = _as_eval(objective(point + ck * delta))
        minus = _as_eval(objective(point - ck * delta))
        ok = math.isfinite(plus.energy) and math.isfinite(minus.energy)
        return (plus.energy - minus.energy) / (2 * ck) * delta, plus.shots + minus.shots, ok

    a = s.a
    if a is None:
        if theta.size == 0:
            a = 0.0
        else:
            mags = []
            for _ in range(s.calibration_probes):
                g, _, ok = grad(theta, s.c)
                if ok:
                    mags.append(np.mean(np.abs(g)))
            mag = float(np.mean(mags)) if mags else 0.0
            a = s.target_step * (A + 1) ** s.alpha / mag if mag > 0 else s.target_step

    for k in range(iterations):
        ev = _as_eval(objective(theta))
        if not math.isfinite(ev.energy):
            traj.aborted = True
            break
        traj.records.append(IterationRecord(k, theta.copy(), np.array(ev.lambdas), ev.energy, ev.stderr, ev.shots))
        if ev.energy < traj.best_energy:
            traj.best_energy, traj.best_theta = ev.energy, theta.copy()
        if theta.size == 0:
            continue
        ak = a / (k + 1 + A) ** s.alpha
        ck = s.c / (k + 1) ** s.gamma
        g, shots, ok = grad(theta, ck)
        traj.records[-1].shots += shots
        if not ok:
            traj.aborted = True
            break
        theta = theta - ak * g
    return traj


class PieceEvaluator:
    """Evaluates every single-register piece needed by :func:`assemble_h_matrix`.

    ``mode="exact"`` uses statevectors. ``mode="sampled"`` measures each
    preparation once per tensor-product-basis group with ``shots`` shots,
    optionally under ``noise`` and with zero-noise extrapolation.
    ``evaluations`` counts how often each preparation was run.
    """

    def __init__(
        self,
        h: Hamiltonian,
        bitstrings: Sequence[str],
        mode: str = "exact",
        shots: int | None = None,
        noise: NoiseModel | None = None,
        zne: ZneSchedule | None = None,
        elide_odd: bool | None = None,
        skip_first_diagonal: bool = False,
        workers: int = 1,
    ):
        if mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be exact or sampled, got {mode!r}")
        if mode == "sampled" and not shots:
            raise ValueError("sampled mode needs a shot budget")
        if mode == "exact" and (noise is not None or zne is not None):
            raise ValueError("noise and ZNE apply to sampled mode only")
        n = len(bitstrings[0])
        if h.n_qubits != 2 * n or h.partition != n:
            raise ValueError(
                f"Hamiltonian on {h.n_qubits} qubits split at {h.partition} does not match {n}+{n}"
            )
        self.h, self.bitstrings, self.n = h, tuple(bitstrings), n
        self.mode, self.shots, self.noise, self.zne = mode, shots, noise, zne
        self.workers = workers
        self.elide_odd = validate_realness(h) if elide_odd is None else elide_odd
        self.skip_first_diagonal = skip_first_diagonal
        self.evaluations: Counter = Counter()
        terms = h.split_terms()
        self.single = [sorted({t[r].letters for t in terms if not t[r].is_identity()}) for r in (1, 2)]
        self.pair = [
            sorted({t[r].letters for t in terms if not (t[1].is_identity() or t[2].is_identity())})
            for r in (1, 2)
        ]

    def _preps(self) -> tuple[list[Prep], list[Prep]]:
        k = len(self.bitstrings)
        diag = [BitstringPrep(b) for i, b in enumerate(self.bitstrings) if not (i == 0 and self.skip_first_diagonal)]
        ps = (0, 2) if self.elide_odd else (0, 1, 2, 3)
        off = []
        if self.pair[0]:
            for i in range(k):
                for j in range(i):
                    off += [SuperpositionPrep(self.bitstrings[i], self.bitstrings[j], p) for p in ps]
        return diag, off

    def evaluate(self, u: Circuit, v: Circuit | None = None, seed: SeedLike = None) -> ForgingPieces:
        if self.elide_odd:
            for c in (u, v):
                if c is not None and not c.is_real():
                    raise ValueError("odd-p elision requires real U and V")
        diag_preps, off_preps = self._preps()
        index = {b: i for i, b in enumerate(self.bitstrings)}
        pieces = ForgingPieces(len(self.bitstrings))
        circuits = [u] if v is None else [u, v]
        ss = seed_sequence(seed).spawn(len(circuits))
        for r, circ in enumerate(circuits):
            regs = (0, 1) if v is None else (r,)
            obs_diag = sorted(set().union(*(self.single[x] for x in regs)))
            obs_off = sorted(set().union(*(self.pair[x] for x in regs)))
            values = self._values(circ, diag_preps, obs_diag, off_preps, obs_off, ss[r], pieces)
            for prep, table in values.items():
                for letters, val in table.items():
                    for x in regs:
                        if isinstance(prep, BitstringPrep):
                            pieces.diag[x][(index[prep.bits], letters)] = val
                        else:
                            key = (index[prep.x], index[prep.y], prep.p, letters)
                            pieces.off[x][key] = val
        if self.elide_odd:
            for x in (0, 1):
                # real setups: phi^1 and phi^3 give the mean of the p=0 and p=2 values
                for (n, m, p, letters), val in list(pieces.off[x].items()):
                    if p == 0:
                        other = pieces.off[x][(n, m, 2, letters)]
                        pieces.off[x][(n, m, 1, letters)] = pieces.off[x][(n, m, 3, letters)] = 0.5 * (val + other)
        return pieces

    def _values(self, circ, diag_preps, obs_diag, off_preps, obs_off, seed, pieces) -> dict:
        jobs = [(pr, obs_diag) for pr in diag_preps if obs_diag] + [(pr, obs_off) for pr in off_preps if obs_off]
        for pr, _ in jobs:
            self.evaluations[pr] += 1
        if self.mode == "exact":
            out = {}
            if jobs:
                states = rotated_states(circ, [pr for pr, _ in jobs])
                for (pr, obs), psi in zip(jobs, states):
                    out[pr] = {o: float(pauli_expectation_array(psi, PauliString(o))) for o in obs}
            return out
        seeds = seed.spawn(len(jobs))
        run = lambda job, s: self._sample_prep(circ, job[0], job[1], s)  # noqa: E731
        if self.workers > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                results = list(pool.map(run, jobs, seeds))
        else:
            results = [run(j, s) for j, s in zip(jobs, seeds)]
        out = {}
        for (pr, _), (table, var, shots) in zip(jobs, results):
            out[pr] = table
            pieces.stderr2 += var
            pieces.shots += shots
        return out

    def _sample_prep(self, circ: Circuit, prep: Prep, obs: list[str], seed) -> tuple[dict, float, int]:
        base = prep.circuit().then(circ)
        table, var, used = {}, 0.0, 0
        groups = tpb_group([PauliString(o) for o in obs])
        for group, gseed in zip(groups, seed.spawn(len(groups))):
            basis = ["I"] * self.n
            for p in group:
                for q, c in enumerate(p.letters):
                    if c != "I":
                        basis[q] = c
            meas = base.then(basis_rotation(PauliString("".join(basis))))
            noise = self.noise or NoiseModel()
            if self.zne is None:
                counts = sample_noisy(meas, noise, self.shots, gseed)
                used += self.shots
                for p in group:
                    val = expectation_from_counts(counts, p)
                    table[p.letters] = val
                    var += (1 - val * val) / self.shots
            else:
                per_factor = []
                fseeds = gseed.spawn(len(self.zne.factors))
                for factor, m, fs in zip(self.zne.factors, self.zne.allocate(self.shots), fseeds):
                    counts = sample_noisy(fold_circuit(meas, factor), noise, m, fs)
                    used += m
                    per_factor.append((factor, m, counts))
                wts = zne_weights(self.zne.factors)
                for p in group:
                    pts = [(f, expectation_from_counts(cn, p)) for f, _, cn in per_factor]
                    table[p.letters] = zne_extrapolate(pts)
                    var += sum(w * w * (1 - e * e) / m for w, (_, e), (_, m, _) in zip(wts, pts, per_factor))
        return table, var, used


def forged_energy(h: Hamiltonian, ansatz: SchmidtAnsatz) -> float:
    """Exact forged energy of ``ansatz`` at its own coefficients."""
    ev = PieceEvaluator(h, ansatz.bitstrings, elide_odd=False)
    pieces = ev.evaluate(ansatz.U, ansatz.V)
    return assemble_h_matrix(h, pieces).energy(ansatz.lambdas)


def make_objective(
    h: Hamiltonian,
    config: AnsatzConfig,
    evaluator: PieceEvaluator,
    seed: SeedLike = None,
) -> Callable[[np.ndarray], Evaluation]:
    streams = seed_sequence(seed)

    def objective(theta: np.ndarray) -> Evaluation:
        u = build_U(config, theta)
        pieces = evaluator.evaluate(u, None, streams.spawn(1)[0])
        hm = assemble_h_matrix(h, pieces, config.hf_energy if config.hf_freeze else None)
        lam = update_lambda(hm)
        return Evaluation(hm.energy(lam), math.sqrt(pieces.stderr2), tuple(lam), pieces.shots)

    return objective


def vqe_run(
    h: Hamiltonian,
    config: AnsatzConfig,
    mode: str = "exact",
    iterations: int = 100,
    seed: SeedLike = None,
    shots: int | None = None,
    noise: NoiseModel | None = None,
    zne: ZneSchedule | None = None,
    theta0: Sequence[float] | None = None,
    settings: SpsaSettings = SpsaSettings(),
    workers: int = 1,
) -> tuple[VqeTrajectory, PieceEvaluator]:
    """SPSA over the hop angles with ``lambda`` solved exactly at every evaluation."""
    if h.n_qubits != 2 * config.n or h.partition != config.n:
        raise ValueError(f"Hamiltonian on {h.n_qubits} qubits does not match {config.n}+{config.n}")
    evaluator = PieceEvaluator(
        h, config.bitstrings, mode, shots, noise, zne, skip_first_diagonal=config.hf_freeze, workers=workers
    )
    opt_seed, eval_seed = seed_sequence(seed).spawn(2)
    objective = make_objective(h, config, evaluator, eval_seed)
    start = config.initial_theta() if theta0 is None else np.asarray(theta0, dtype=float)
    traj = spsa_optimize(objective, start, iterations, opt_seed, settings)
    return traj, evaluator
