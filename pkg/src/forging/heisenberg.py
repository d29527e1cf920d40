"""Heisenberg-picture forging for states ``(U (x) U) sum_x lambda_x |x>|x>``.

The observable pair is rewritten with :func:`heisenberg_decompose`, so every
piece becomes either a diagonal expectation on ``U|x>`` or an overlap
``mu_j = sum_xy lambda_x lambda_y |<y|U^T C_j U|x>|^2``. The overlaps are
sampled with the ratio estimator ``R = lambda_y / lambda_x``, which has
``E[R^2] = 1`` whatever the size of the register.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .circuit import Circuit
from .clifford import CliffordCircuit, heisenberg_decompose
from .gates import Gate
from .pauli import PauliString
from .schrodinger import chunked, seed_sequence
from .statevector import (
    SeedLike,
    apply_gates_array,
    basis_rotation,
    bits_to_index,
    circuit_unitary,
    parity_table,
)

REAL_ATOL = 1e-10
CHUNK = 1 << 15


class LambdaModel(Protocol):
    """Access to the coefficients ``lambda_x`` through sampling and ratios only."""

    n: int

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Basis indices drawn with probability ``lambda_x^2``."""
        ...

    def ratio(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """``lambda_y / lambda_x``; NaN where ``lambda_x`` is zero."""
        ...


@dataclass(frozen=True, eq=False)
class ExplicitLambda:
    """All ``2**n`` coefficients held in memory."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} coefficients, got shape {v.shape}")
        if abs(np.sum(v * v) - 1) > 1e-10:
            raise ValueError("sum of squared coefficients must be 1")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_bitstrings(cls, bitstrings, lambdas) -> "ExplicitLambda":
        n = len(bitstrings[0])
        v = np.zeros(1 << n)
        for b, lam in zip(bitstrings, lambdas):
            v[bits_to_index(b)] = lam
        return cls(n, v)

    @property
    def probabilities(self) -> np.ndarray:
        return self.values**2

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        p = self.probabilities
        return rng.choice(p.size, size=size, p=p / p.sum())

    def ratio(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        lx, ly = self.values[x], self.values[y]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(lx != 0, ly / np.where(lx != 0, lx, 1), np.nan)


def _check(u: Circuit, lm: LambdaModel, o1: PauliString, o2: PauliString) -> None:
    if not (u.n_qubits == lm.n == len(o1) == len(o2)):
        raise ValueError(
            f"size mismatch: U on {u.n_qubits}, lambdas on {lm.n}, observables {len(o1)}/{len(o2)}"
        )


def _real_unitary(u: Circuit) -> np.ndarray:
    m = circuit_unitary(u)
    if np.max(np.abs(m.imag), initial=0.0) > REAL_ATOL:
        raise ValueError("U must have real matrix elements in the computational basis")
    return m.real


def conditional_prep_circuit(u: Circuit, cj: CliffordCircuit | Circuit, x: str) -> Circuit:
    """X gates for ``x``, then ``U``, then ``C_j``, then ``U`` undone gate by gate."""
    n = u.n_qubits
    if cj.n_qubits != n or len(x) != n:
        raise ValueError("U, C_j and x must share a qubit count")
    gates = [Gate("X", (q,)) for q, b in enumerate(x) if b == "1"]
    middle = cj.gates if isinstance(cj, Circuit) else cj.to_circuit().gates
    return Circuit(n, tuple(gates) + u.gates + tuple(middle) + u.inverse().gates)


def _diagonal(umat: np.ndarray, p: PauliString) -> np.ndarray:
    """``<x|U^dagger P U|x>`` for every ``x``."""
    return np.real(np.einsum("yx,yz,zx->x", umat.conj(), p.matrix(), umat))


def heisenberg_expectation_exact(
    u: Circuit, lm: ExplicitLambda, o1: PauliString, o2: PauliString
) -> float:
    """``<psi|O1 (x) O2|psi>`` from the decomposed form, by dense enumeration."""
    _check(u, lm, o1, o2)
    umat = _real_unitary(u)
    w = lm.probabilities
    if o1.is_identity() or o2.is_identity():
        other = o2 if o1.is_identity() else o1
        return float(o1.sign * o2.sign * np.dot(w, _diagonal(umat, other.unsigned())))
    dec = heisenberg_decompose(o1, o2)
    if dec.zero:
        return 0.0
    value = 0.0
    if dec.a0:
        value += dec.a0 * float(np.dot(w, _diagonal(umat, dec.product)))
    lam = lm.values
    for t in dec.terms:
        inner = umat.T @ t.circuit.unitary() @ umat
        value += 0.5 * t.coeff * float(lam @ (np.abs(inner) ** 2) @ lam)
    return float(value)


def _cdf(states: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(np.abs(states) ** 2, axis=1)
    cdf[:, -1] = np.inf
    return cdf


def _batched(fn, m: int, seed: np.random.SeedSequence) -> np.ndarray:
    sizes = chunked(m, CHUNK)
    rngs = [np.random.default_rng(s) for s in seed.spawn(len(sizes))]
    return np.concatenate([fn(size, r) for size, r in zip(sizes, rngs)])


def ratio_samples(
    u: Circuit, lm: LambdaModel, cj: CliffordCircuit, m: int, seed: SeedLike = None
) -> np.ndarray:
    """``m`` draws of ``R(x, y)`` with ``x ~ lambda^2`` and ``y`` measured on ``U^T C_j U|x>``.

    Draws with ``lambda_x = 0`` come back as NaN.
    """
    n = u.n_qubits
    prep = u.gates + cj.to_circuit().gates + u.inverse().gates
    # row x is the state prepared by conditional_prep_circuit(u, cj, x)
    cdf = _cdf(apply_gates_array(np.eye(1 << n, dtype=complex), prep, n))

    def draw(size: int, rng: np.random.Generator) -> np.ndarray:
        x = lm.sample(size, rng)
        y = (rng.random(size)[:, None] >= cdf[x]).sum(axis=1)
        return lm.ratio(x, y)

    return _batched(draw, m, seed_sequence(seed))


def diagonal_samples(
    u: Circuit, lm: LambdaModel, p: PauliString, m: int, seed: SeedLike = None
) -> np.ndarray:
    """``m`` single-shot eigenvalues of ``P`` on ``U|x>`` with ``x ~ lambda^2``."""
    n = u.n_qubits
    states = apply_gates_array(np.eye(1 << n, dtype=complex), u.gates + tuple(basis_rotation(p)), n)
    cdf = _cdf(states)
    eig = parity_table(p, n)

    def draw(size: int, rng: np.random.Generator) -> np.ndarray:
        x = lm.sample(size, rng)
        y = (rng.random(size)[:, None] >= cdf[x]).sum(axis=1)
        return eig[y].astype(float)

    return _batched(draw, m, seed_sequence(seed))


def samples_for_precision(epsilon: float) -> tuple[int, int]:
    """``(M per overlap term, M for the diagonal term)`` at ~99% confidence.

    Overlap terms get precision ``epsilon/4`` and the diagonal term ``epsilon/2``;
    each sampled variable has variance at most one, so a Chebyshev bound gives
    ``M = 100 / precision^2``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return math.ceil(100 / (epsilon / 4) ** 2 - 1e-9), math.ceil(100 / (epsilon / 2) ** 2 - 1e-9)


def _mean_err(values: np.ndarray, label: str) -> tuple[float, float, int]:
    bad = ~np.isfinite(values)
    if bad.any():
        warnings.warn(f"{label}: skipped {int(bad.sum())} draws with zero lambda_x", RuntimeWarning)
        values = values[~bad]
    if values.size == 0:
        return 0.0, 0.0, 0
    err = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 1.0
    return float(values.mean()), err, int(values.size)


@dataclass
class HeisenbergEstimate:
    value: float
    stderr: float
    samples: int
    skipped: int = 0


def heisenberg_estimate_detail(
    u: Circuit,
    lm: LambdaModel,
    o1: PauliString,
    o2: PauliString,
    M: int | None = None,
    seed: SeedLike = None,
    epsilon: float | None = None,
    M0: int | None = None,
) -> HeisenbergEstimate:
    _check(u, lm, o1, o2)
    if M is None:
        if epsilon is None:
            raise ValueError("give either M or epsilon")
        M, m0_default = samples_for_precision(epsilon)
        M0 = M0 or m0_default
    if M < 1:
        raise ValueError("M must be >= 1")
    M0 = M0 or M
    ss = seed_sequence(seed)

    if o1.is_identity() and o2.is_identity():
        return HeisenbergEstimate(float(o1.sign * o2.sign), 0.0, 0)
    if o1.is_identity() or o2.is_identity():
        other = o2 if o1.is_identity() else o1
        vals = diagonal_samples(u, lm, other.unsigned(), M0, ss)
        mean, err, used = _mean_err(vals, "diagonal term")
        s = o1.sign * o2.sign
        return HeisenbergEstimate(s * mean, err, used, M0 - used)

    dec = heisenberg_decompose(o1, o2)
    if dec.zero:
        return HeisenbergEstimate(0.0, 0.0, 0)
    children = iter(ss.spawn(len(dec.terms) + 1))
    value, var, total, skipped = 0.0, 0.0, 0, 0
    child = next(children)
    if dec.a0:
        mean, err, used = _mean_err(diagonal_samples(u, lm, dec.product, M0, child), "diagonal term")
        value += dec.a0 * mean
        var += (dec.a0 * err) ** 2
        total += used
        skipped += M0 - used
    for j, t in enumerate(dec.terms):
        child = next(children)
        if t.coeff == 0:
            continue
        mean, err, used = _mean_err(ratio_samples(u, lm, t.circuit, M, child), f"term {j}")
        value += 0.5 * t.coeff * mean
        var += (0.5 * t.coeff * err) ** 2
        total += used
        skipped += M - used
    return HeisenbergEstimate(float(value), float(np.sqrt(var)), total, skipped)


def heisenberg_estimate_sampled(
    u: Circuit,
    lm: LambdaModel,
    o1: PauliString,
    o2: PauliString,
    M: int | None = None,
    seed: SeedLike = None,
    epsilon: float | None = None,
) -> tuple[float, float]:
    """Sampled ``<psi|O1 (x) O2|psi>``; ``M`` draws per overlap term, or derived from ``epsilon``."""
    est = heisenberg_estimate_detail(u, lm, o1, o2, M, seed, epsilon)
    return est.value, est.stderr
