import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from forging.circuit import Circuit  # noqa: E402
from forging.gates import ONE_QUBIT, PARAMETRIC, Gate  # noqa: E402


def random_circuit(rng: np.random.Generator, n: int, depth: int = 6, kinds=("HOP", "CZ", "RY")) -> Circuit:
    gates = []
    for _ in range(depth):
        kind = str(rng.choice(kinds))
        angle = float(rng.uniform(-np.pi, np.pi)) if kind in PARAMETRIC else None
        if kind in ONE_QUBIT:
            gates.append(Gate(kind, (int(rng.integers(n)),), angle))
        elif n >= 2:
            a, b = (int(v) for v in rng.choice(n, 2, replace=False))
            gates.append(Gate(kind, (a, b), angle))
    return Circuit(n, tuple(gates))


def random_pauli_letters(rng: np.random.Generator, n: int) -> str:
    return "".join(rng.choice(list("IXYZ"), n))


def random_bitstrings(rng: np.random.Generator, n: int, k: int) -> list[str]:
    idx = rng.choice(1 << n, size=k, replace=False)
    return ["".join("1" if (int(i) >> q) & 1 else "0" for q in range(n)) for i in idx]


def random_lambdas(rng: np.random.Generator, k: int) -> np.ndarray:
    lam = rng.normal(size=k)
    return lam / np.linalg.norm(lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
