"""Shot allocation, measurement grouping, zero-noise extrapolation and job multiplexing."""

from __future__ import annotations

import hashlib
import threading
from collections.abc import Sequence
from concurrent.futures import Future
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .pauli import PauliString
from .schrodinger import seed_sequence
from .statevector import (
    NoiseModel,
    SeedLike,
    basis_rotation,
    bits_to_index,
    fold_circuit,
    parity_table,
    sample_noisy,
)


class LayoutError(ValueError):
    """Registers placed on a device overlap, lack a buffer, or do not fit."""


def copysample(weights: Sequence[float], J: int, seed: SeedLike = None) -> np.ndarray:
    """Number of copies of each circuit in a job of ``J`` slots.

    Each circuit gets one copy plus ``max(0, floor(w J - 1))``; leftover slots
    go to circuits drawn without replacement with probability proportional to
    their positive residual ``w J - count``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("need a non-empty weight vector")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    if J < w.size:
        raise ValueError(f"job size {J} is smaller than the number of circuits {w.size}")
    target = w * J
    # the 1e-9 keeps exact products such as 0.3 * 10 from flooring one short
    counts = 1 + np.maximum(0, np.floor(target - 1 + 1e-9)).astype(np.int64)
    # the one-copy floor can overshoot when many weights are tiny
    while counts.sum() > J:
        spare = np.flatnonzero(counts > 1)
        counts[spare[np.argmin(target[spare] - counts[spare])]] -= 1
    left = int(J - counts.sum())
    if left:
        resid = np.maximum(target - counts, 0)
        pos = np.flatnonzero(resid > 0)
        if pos.size <= left:
            counts[pos] += 1
            left -= pos.size
            order = np.argsort(-(target - counts), kind="stable")
            counts[order[:left]] += 1
        else:
            rng = np.random.default_rng(seed)
            pick = rng.choice(pos, size=left, replace=False, p=resid[pos] / resid[pos].sum())
            counts[pick] += 1
    return counts


def qubitwise_compatible(p: PauliString, q: PauliString) -> bool:
    return all(a == "I" or b == "I" or a == b for a, b in zip(p.letters, q.letters))


def tpb_group(paulis: Sequence[PauliString]) -> list[list[PauliString]]:
    """Greedy first-fit grouping into sets measurable in one tensor-product basis."""
    if len({len(p) for p in paulis}) > 1:
        raise ValueError("Pauli strings must have equal lengths")
    groups: list[list[PauliString]] = []
    bases: list[list[str]] = []
    for p in paulis:
        for g, basis in zip(groups, bases):
            if all(b == "I" or c == "I" or b == c for b, c in zip(basis, p.letters)):
                g.append(p)
                for j, c in enumerate(p.letters):
                    if c != "I":
                        basis[j] = c
                break
        else:
            groups.append([p])
            bases.append(list(p.letters))
    return groups


def zne_extrapolate(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares line through ``(stretch, estimate)`` points, evaluated at zero stretch."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    x = np.array([float(p[0]) for p in points])
    y = np.array([float(p[1]) for p in points])
    if len(set(x)) != len(x):
        raise ValueError("duplicate stretch factors")
    if np.all(y == y[0]):
        return float(y[0])
    if len(x) == 2:
        return float((x[1] * y[0] - x[0] * y[1]) / (x[1] - x[0]))
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept)


def zne_weights(factors: Sequence[float]) -> np.ndarray:
    """Linear weights ``w`` with ``zne_extrapolate(points) == sum w_i y_i`` (up to rounding)."""
    x = np.asarray(factors, dtype=float)
    design = np.stack([np.ones_like(x), x], axis=1)
    return np.linalg.pinv(design)[0]


@dataclass(frozen=True)
class ZneSchedule:
    """Stretch factors with relative shot weights; the unstretched circuit gets more."""

    factors: tuple[int, ...] = (1, 3)
    weights: tuple[float, ...] = (2.0, 1.0)

    def __post_init__(self):
        if len(self.factors) != len(self.weights):
            raise ValueError("one weight per factor")
        if 1 not in self.factors:
            raise ValueError("factor 1 must be present")
        if any(f < 1 or f % 2 == 0 for f in self.factors):
            raise ValueError("factors must be positive odd integers")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    def allocate(self, shots: int) -> list[int]:
        w = np.array(self.weights) / sum(self.weights)
        return [max(1, int(round(v * shots))) for v in w]


def expectation_from_counts(counts: dict[str, int], p: PauliString) -> float:
    """Mean eigenvalue of ``p`` from counts taken after :func:`basis_rotation`."""
    table = parity_table(p, len(p))
    total = sum(counts.values())
    return float(sum(table[bits_to_index(b)] * c for b, c in counts.items()) / total)


def measure_pauli(
    circuit: Circuit, p: PauliString, shots: int, noise: NoiseModel | None = None, seed: SeedLike = None
) -> float:
    """Shot estimate of ``<P>`` on ``circuit|0>``, optionally under noise."""
    meas = circuit.then(basis_rotation(p))
    counts = sample_noisy(meas, noise or NoiseModel(), shots, seed)
    return expectation_from_counts(counts, p)


@dataclass
class ZneResult:
    value: float
    points: list[tuple[int, float]]


def zne_expectation(
    circuit: Circuit,
    p: PauliString,
    noise: NoiseModel,
    shots: int,
    seed: SeedLike = None,
    schedule: ZneSchedule = ZneSchedule(),
) -> ZneResult:
    """Measure ``<P>`` at each folded stretch and extrapolate to zero noise."""
    seeds = seed_sequence(seed).spawn(len(schedule.factors))
    points = []
    for factor, m, s in zip(schedule.factors, schedule.allocate(shots), seeds):
        points.append((factor, measure_pauli(fold_circuit(circuit, factor), p, m, noise, s)))
    return ZneResult(zne_extrapolate(points), points)


@dataclass(frozen=True)
class Job:
    """Circuits with shot counts submitted by one context; ``seed`` fixes its sampling."""

    tag: str
    entries: tuple[tuple[Circuit, int], ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((c, int(s)) for c, s in self.entries))
        if not self.entries:
            raise ValueError("a job needs at least one circuit")
        if any(s < 1 for _, s in self.entries):
            raise ValueError("shots must be >= 1 per entry")
        if len({c.n_qubits for c, _ in self.entries}) != 1:
            raise ValueError("all circuits of a job must share a register size")
        if not self.tag or any(ch.isspace() for ch in self.tag):
            raise ValueError(f"tag must be a non-empty word, got {self.tag!r}")

    @property
    def n_qubits(self) -> int:
        return self.entries[0][0].n_qubits


def execute_job(job: Job, noise: NoiseModel | None = None) -> list[dict[str, int]]:
    """Counts per entry; entry ``i`` samples with the ``i``-th child of the job seed."""
    noise = noise or NoiseModel()
    children = np.random.SeedSequence(job.seed).spawn(len(job.entries))
    return [sample_noisy(c, noise, s, child) for (c, s), child in zip(job.entries, children)]


@dataclass(frozen=True)
class Placement:
    tag: str
    offset: int
    n_qubits: int

    @property
    def qubits(self) -> range:
        return range(self.offset, self.offset + self.n_qubits)


@dataclass(frozen=True)
class MergedJob:
    """Jobs laid side by side on one device. Slot ``i`` runs the ``i``-th entry of
    every job that has one, as a single device-wide circuit."""

    device_qubits: int
    jobs: tuple[Job, ...]
    placements: tuple[Placement, ...]

    @property
    def n_slots(self) -> int:
        return max(len(j.entries) for j in self.jobs)

    def slot_circuit(self, i: int) -> Circuit:
        gates = []
        for job, pl in zip(self.jobs, self.placements):
            if i < len(job.entries):
                gates.extend(job.entries[i][0].embedded(self.device_qubits, pl.offset).gates)
        return Circuit(self.device_qubits, tuple(gates))

    def slot_shots(self, i: int) -> int:
        return max(j.entries[i][1] for j in self.jobs if i < len(j.entries))


def check_layout(placements: Sequence[Placement], device_qubits: int, buffer: int = 1) -> None:
    spans = sorted(placements, key=lambda pl: pl.offset)
    for pl in spans:
        if pl.offset < 0 or pl.offset + pl.n_qubits > device_qubits:
            raise LayoutError(f"job {pl.tag!r} does not fit on {device_qubits} qubits")
    for a, b in zip(spans, spans[1:]):
        if b.offset < a.offset + a.n_qubits + buffer:
            raise LayoutError(
                f"jobs {a.tag!r} and {b.tag!r} need {buffer} idle qubit(s) between them"
            )


def multiplex(
    jobs: Sequence[Job],
    device_qubits: int | None = None,
    offsets: Sequence[int] | None = None,
    buffer: int = 1,
) -> MergedJob:
    """Place jobs on disjoint qubit ranges separated by ``buffer`` idle qubits."""
    if not jobs:
        raise ValueError("nothing to multiplex")
    tags = [j.tag for j in jobs]
    if len(set(tags)) != len(tags):
        raise ValueError("job tags must be unique")
    if offsets is None:
        offsets, pos = [], 0
        for j in jobs:
            offsets.append(pos)
            pos += j.n_qubits + buffer
    placements = tuple(Placement(j.tag, int(o), j.n_qubits) for j, o in zip(jobs, offsets))
    if device_qubits is None:
        device_qubits = max(pl.offset + pl.n_qubits for pl in placements)
    check_layout(placements, device_qubits, buffer)
    return MergedJob(device_qubits, tuple(jobs), placements)


def execute(merged: MergedJob, noise: NoiseModel | None = None) -> list[list[dict[str, int]]]:
    """Run every slot; returns per-slot, per-job register counts.

    No gate crosses a register and noise acts gate-locally, so each register
    of a slot is simulated on its own, drawing from its job's seed stream and
    keeping only that job's shot count.
    """
    noise = noise or NoiseModel()
    streams = [iter(np.random.SeedSequence(j.seed).spawn(len(j.entries))) for j in merged.jobs]
    out = []
    for i in range(merged.n_slots):
        full = merged.slot_circuit(i)
        row = []
        for job, pl, stream in zip(merged.jobs, merged.placements, streams):
            if i >= len(job.entries):
                row.append(None)
                continue
            local = Circuit(
                pl.n_qubits,
                tuple(g.shifted(-pl.offset) for g in full.gates if g.qubits[0] in pl.qubits),
            )
            row.append(sample_noisy(local, noise, job.entries[i][1], next(stream)))
        out.append(row)
    return out


def demultiplex(merged: MergedJob, results: list[list[dict[str, int] | None]]) -> dict[str, list[dict[str, int]]]:
    out: dict[str, list[dict[str, int]]] = {}
    for k, job in enumerate(merged.jobs):
        out[job.tag] = [results[i][k] for i in range(len(job.entries))]
    return out


def circuit_digest(circuit: Circuit) -> str:
    return hashlib.sha256(f"{circuit.n_qubits}\n{circuit.to_text()}".encode()).hexdigest()[:16]


def format_manifest(jobs: Sequence[Job]) -> str:
    """One ``tag circuit-ref shots`` line per entry; the reference is ``index:digest``."""
    lines = []
    for job in jobs:
        for i, (c, s) in enumerate(job.entries):
            lines.append(f"{job.tag} {i}:{circuit_digest(c)} {s}")
    return "".join(line + "\n" for line in lines)


def parse_manifest(text: str) -> list[tuple[str, str, int]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) != 3:
            raise ValueError(f"line {lineno}: expected 'tag circuit-ref shots'")
        try:
            shots = int(tok[2])
        except ValueError:
            raise ValueError(f"line {lineno}: bad shot count {tok[2]!r}") from None
        rows.append((tok[0], tok[1], shots))
    return rows


@dataclass
class Multiplexer:
    """Collects jobs from concurrent submitters and runs them as merged batches."""

    device_qubits: int
    noise: NoiseModel = field(default_factory=NoiseModel)
    buffer: int = 1
    _queue: list[tuple[Job, Future]] = field(default_factory=list, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def submit(self, job: Job) -> Future:
        fut: Future = Future()
        with self._lock:
            self._queue.append((job, fut))
        return fut

    def flush(self) -> int:
        """Run everything queued; returns the number of merged batches executed."""
        with self._lock:
            pending, self._queue = self._queue, []
        batches = 0
        while pending:
            batch, used = [], 0
            while pending and used + pending[0][0].n_qubits <= self.device_qubits:
                job, fut = pending.pop(0)
                batch.append((job, fut))
                used += job.n_qubits + self.buffer
            if not batch:
                job, fut = pending.pop(0)
                fut.set_exception(LayoutError(f"job {job.tag!r} exceeds the device"))
                continue
            merged = multiplex([j for j, _ in batch], self.device_qubits, buffer=self.buffer)
            results = demultiplex(merged, execute(merged, self.noise))
            for job, fut in batch:
                fut.set_result(results[job.tag])
            batches += 1
        return batches
