"""Regenerate the text fixtures shipped in ``src/forging/data``.

Each fixture is checked numerically before it is written.
"""

from pathlib import Path

import numpy as np

from forging.circuit import Circuit
from forging.gates import Gate
from forging.hamiltonian import Hamiltonian, format_hamiltonian
from forging.pauli import PauliString
from forging.schrodinger import SchmidtAnsatz, format_ansatz, schmidt_spectrum
from forging.vqe import build_U, water_k10_config

DATA = Path(__file__).resolve().parents[1] / "src" / "forging" / "data"


def hamiltonian(n_qubits: int, partition: int, terms: dict[str, float]) -> Hamiltonian:
    return Hamiltonian(n_qubits, partition, tuple((c, PauliString(p)) for p, c in terms.items()))


def bell() -> tuple[Hamiltonian, SchmidtAnsatz]:
    h = hamiltonian(2, 1, {"ZZ": 0.5, "XX": 0.3, "YY": 0.2, "ZI": 0.1, "IX": -0.05})
    s = 1 / np.sqrt(2)
    return h, SchmidtAnsatz(1, ("0", "1"), (s, s), Circuit(1))


def toy22() -> tuple[Hamiltonian, SchmidtAnsatz]:
    """Two qubits per register; hopping, fields and a pair-hopping coupling.

    The ``(1 + ZZ)/2`` penalty on each register pins the ground state to one
    particle per register, where the two bitstrings 10 and 01 and a single
    hop gate reach it exactly.
    """
    terms: dict[str, float] = {}

    def add(c: float, p: str) -> None:
        terms[p] = terms.get(p, 0.0) + c

    add(-0.4, "IIII")
    for reg in ("{}II", "II{}"):
        add(-0.3, reg.format("XX"))
        add(-0.3, reg.format("YY"))
        add(0.35, reg.format("ZI"))
        add(-0.15, reg.format("IZ"))
        add(1.0, reg.format("ZZ"))
        add(1.0, "IIII")
    add(0.25, "ZIZI")
    add(0.25, "IZIZ")
    add(0.1, "ZIIZ")
    add(0.1, "IZZI")
    for a in ("XX", "YY"):
        for b in ("XX", "YY"):
            add(0.075, a + b)
    h = hamiltonian(4, 2, terms)

    w, v = np.linalg.eigh(h.matrix())
    assert w[1] - w[0] > 0.1
    amps = v[:, 0].reshape(4, 4)
    assert np.max(np.abs(amps - amps.T)) < 1e-12
    support = {i for i in range(16) if abs(v[i, 0]) > 1e-12}
    assert support <= {0b0101, 0b0110, 0b1001, 0b1010}
    assert schmidt_spectrum(v[:, 0])[1] > 0.05

    u = Circuit.from_text("HOP 0 1 theta", 2)
    s = 1 / np.sqrt(2)
    ansatz = SchmidtAnsatz(
        2, ("10", "01"), (s, s), u, options=(("theta0", "0.0"), ("reference_energy", repr(float(w[0]))))
    )
    return h, ansatz


def water_k10() -> SchmidtAnsatz:
    cfg = water_k10_config()
    u = build_U(cfg, cfg.initial_theta())
    lam = np.full(cfg.k, 1 / np.sqrt(cfg.k))
    lam[0] = np.sqrt(1 - np.sum(lam[1:] ** 2))
    return SchmidtAnsatz(cfg.n, cfg.bitstrings, tuple(lam), u)


def main() -> None:
    DATA.mkdir(exist_ok=True)
    h, a = bell()
    (DATA / "bell.hamiltonian").write_text(format_hamiltonian(h))
    (DATA / "bell.ansatz").write_text(format_ansatz(a))
    h, a = toy22()
    (DATA / "toy22.hamiltonian").write_text(format_hamiltonian(h))
    (DATA / "toy22.ansatz").write_text(format_ansatz(a))
    (DATA / "water_k10.ansatz").write_text(format_ansatz(water_k10()))
    print(f"wrote fixtures to {DATA}")


if __name__ == "__main__":
    main()
