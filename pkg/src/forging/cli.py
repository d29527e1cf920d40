"""Command-line front end.

Output is CSV (to ``--out`` or stdout). Failures print one line
``error <CODE> <message>`` to stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .hamiltonian import Hamiltonian, HamiltonianFormatError, load_hamiltonian, validate_realness
from .heisenberg import ExplicitLambda, heisenberg_estimate_sampled, heisenberg_expectation_exact
from .orchestration import ZneSchedule
from .schrodinger import (
    ForgingSampler,
    SchmidtAnsatz,
    forged_expectation_exact,
    forged_expectation_product_exact,
    parse_ansatz,
    sampling_budget,
)
from .statevector import NoiseModel
from .vqe import AnsatzConfig, vqe_run

FIXTURE_ENV = "FORGING_FIXTURES"
MODES = ("expect", "vqe", "heisenberg", "budget", "compare")


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    mode: str
    hamiltonian: str | None = None
    ansatz: str | None = None
    epsilon: float | None = None
    shots: int | None = None
    seed: int = 0
    noise_p1: float = 0.0
    noise_p2: float = 0.0
    zne: bool = False
    iters: int = 100
    workers: int = 1
    out: str | None = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise CliError("CONFIG", f"unknown mode {self.mode!r}")
        if self.epsilon is not None and self.epsilon <= 0:
            raise CliError("CONFIG", "--epsilon must be positive")
        if self.shots is not None and self.shots < 1:
            raise CliError("CONFIG", "--shots must be >= 1")
        if self.iters < 1:
            raise CliError("CONFIG", "--iters must be >= 1")
        if self.workers < 1:
            raise CliError("CONFIG", "--workers must be >= 1")
        noisy = self.noise_p1 > 0 or self.noise_p2 > 0 or self.zne
        if noisy and not (self.mode == "vqe" and self.shots):
            raise CliError("CONFIG", "noise and --zne need --mode vqe with --shots")
        if self.mode == "budget" and self.epsilon is None:
            raise CliError("CONFIG", "budget mode needs --epsilon")
        if self.mode in ("vqe", "expect", "heisenberg", "compare") and not self.hamiltonian:
            raise CliError("CONFIG", f"{self.mode} mode needs --hamiltonian")
        if not self.ansatz:
            raise CliError("CONFIG", f"{self.mode} mode needs --ansatz")


def fixture_dirs() -> list[Path]:
    dirs = []
    if os.environ.get(FIXTURE_ENV):
        dirs.append(Path(os.environ[FIXTURE_ENV]))
    dirs.append(Path(str(resources.files("forging") / "data")))
    return dirs


def resolve(name: str, suffix: str) -> Path:
    """A path as given, else ``name`` or ``name + suffix`` in the fixture directories."""
    p = Path(name)
    if p.is_file():
        return p
    for d in fixture_dirs():
        for cand in (d / name, d / (name + suffix)):
            if cand.is_file():
                return cand
    raise CliError("IO", f"cannot find {name!r}")


def load_inputs(cfg: RunConfig) -> tuple[Hamiltonian | None, SchmidtAnsatz]:
    try:
        ansatz = parse_ansatz(resolve(cfg.ansatz, ".ansatz").read_text())
    except ValueError as exc:
        raise CliError("FORMAT", f"ansatz: {exc}") from None
    h = None
    if cfg.hamiltonian:
        try:
            h = load_hamiltonian(resolve(cfg.hamiltonian, ".hamiltonian"))
        except HamiltonianFormatError as exc:
            raise CliError("FORMAT", f"hamiltonian: {exc}") from None
        if h.n_qubits != 2 * ansatz.n or h.partition != ansatz.n:
            raise CliError(
                "SIZE", f"hamiltonian has {h.n_qubits} qubits split at {h.partition}, ansatz is {ansatz.n}+{ansatz.n}"
            )
    return h, ansatz


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _f(x: float) -> str:
    return repr(float(x))


def _bound(ansatz: SchmidtAnsatz) -> SchmidtAnsatz:
    if ansatz.U.is_bound and (ansatz.V is None or ansatz.V.is_bound):
        return ansatz
    theta0 = ansatz.option("theta0")
    if theta0 is None:
        raise CliError("CONFIG", "ansatz has free parameters and no theta0 option")
    return ansatz.bind([float(v) for v in theta0.split(",")])


def run_budget(cfg: RunConfig, ansatz: SchmidtAnsatz) -> str:
    b = sampling_budget(ansatz, cfg.epsilon)
    head = _csv(
        ["one_norm_exact", "one_norm_closed_form", "epsilon", "S_exact", "S_closed_form", "pairs"],
        [[_f(b.one_norm), _f(b.one_norm_closed_form), _f(b.epsilon), b.S, b.S_closed_form, b.pairs]],
    )
    rows = []
    for i, (t, pi) in enumerate(zip(b.terms, b.pi)):
        pr = t.prep
        label = pr.bits if hasattr(pr, "bits") else f"{pr.x}|{pr.y}|{pr.p}"
        rows.append([i, label, _f(t.mu), _f(pi)])
    return head + "\n" + _csv(["term", "prep", "mu", "pi"], rows)


def _direct(h_ansatz: SchmidtAnsatz):
    psi = h_ansatz.statevector()

    def value(o1, o2) -> float:
        return float(np.real(psi.conj() @ (np.kron(o2.matrix(), o1.matrix()) @ psi)))

    return value


def run_compare(cfg: RunConfig, h: Hamiltonian, ansatz: SchmidtAnsatz) -> str:
    ansatz = _bound(ansatz)
    direct = _direct(ansatz)
    rows, total_f, total_d = [], 0.0, 0.0
    for c, o1, o2 in h.split_terms():
        f = forged_expectation_exact(ansatz, o1, o2)
        d = direct(o1, o2)
        total_f += c * f
        total_d += c * d
        rows.append([o1.letters, o2.letters, _f(c), _f(f), _f(d), _f(abs(f - d))])
    rows.append(["total", "", "", _f(total_f), _f(total_d), _f(abs(total_f - total_d))])
    return _csv(["O1", "O2", "coeff", "forged_exact", "direct", "abs_diff"], rows)


def run_expect(cfg: RunConfig, h: Hamiltonian, ansatz: SchmidtAnsatz) -> str:
    ansatz = _bound(ansatz)
    sampled = cfg.shots is not None or cfg.epsilon is not None
    if cfg.shots is not None:
        pairs = cfg.shots
    elif cfg.epsilon is not None:
        pairs = sampling_budget(ansatz, cfg.epsilon).pairs
    rows, total, total_p, total_s, var = [], 0.0, 0.0, 0.0, 0.0
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(h.terms))
    for (c, o1, o2), s in zip(h.split_terms(), seeds):
        e = forged_expectation_exact(ansatz, o1, o2)
        prod, _ = forged_expectation_product_exact(ansatz, o1, o2)
        total += c * e
        total_p += c * prod
        row = [o1.letters, o2.letters, _f(c), _f(e), _f(prod)]
        if sampled:
            if o1.is_identity() and o2.is_identity():
                f, err = 1.0, 0.0
            else:
                f, err = ForgingSampler(ansatz, o1, o2).estimate(pairs, s, cfg.workers)
            total_s += c * f
            var += (c * err) ** 2
            row += [_f(f), _f(err)]
        rows.append(row)
    header = ["O1", "O2", "coeff", "exact", "product"] + (["sampled", "stderr"] if sampled else [])
    rows.append(["total", "", "", _f(total), _f(total_p)] + ([_f(total_s), _f(var**0.5)] if sampled else []))
    return _csv(header, rows)


def run_heisenberg(cfg: RunConfig, h: Hamiltonian, ansatz: SchmidtAnsatz) -> str:
    ansatz = _bound(ansatz)
    if ansatz.V is not None:
        raise CliError("CONFIG", "heisenberg mode needs V = U")
    lm = ExplicitLambda.from_bitstrings(ansatz.bitstrings, ansatz.lambdas)
    sampled = cfg.shots is not None or cfg.epsilon is not None
    rows, total, total_s, var = [], 0.0, 0.0, 0.0
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(h.terms))
    for (c, o1, o2), s in zip(h.split_terms(), seeds):
        try:
            e = heisenberg_expectation_exact(ansatz.U, lm, o1, o2)
        except ValueError as exc:
            raise CliError("CONFIG", str(exc)) from None
        total += c * e
        row = [o1.letters, o2.letters, _f(c), _f(e)]
        if sampled:
            f, err = heisenberg_estimate_sampled(ansatz.U, lm, o1, o2, M=cfg.shots, seed=s, epsilon=cfg.epsilon)
            total_s += c * f
            var += (c * err) ** 2
            row += [_f(f), _f(err)]
        rows.append(row)
    header = ["O1", "O2", "coeff", "exact"] + (["sampled", "stderr"] if sampled else [])
    rows.append(["total", "", "", _f(total)] + ([_f(total_s), _f(var**0.5)] if sampled else []))
    return _csv(header, rows)


def run_vqe(cfg: RunConfig, h: Hamiltonian, ansatz: SchmidtAnsatz) -> str:
    try:
        config = AnsatzConfig.from_schmidt_ansatz(ansatz)
    except ValueError as exc:
        raise CliError("CONFIG", str(exc)) from None
    if config.hf_freeze and not validate_realness(h):
        raise CliError("CONFIG", "hf_energy needs a real Hamiltonian")
    mode = "sampled" if cfg.shots else "exact"
    noise = NoiseModel(cfg.noise_p1, cfg.noise_p2) if (cfg.noise_p1 or cfg.noise_p2) else None
    traj, _ = vqe_run(
        h,
        config,
        mode,
        cfg.iters,
        cfg.seed,
        shots=cfg.shots,
        noise=noise,
        zne=ZneSchedule() if cfg.zne else None,
        workers=cfg.workers,
    )
    return traj.to_csv()


def run(cfg: RunConfig) -> str:
    cfg.validate()
    h, ansatz = load_inputs(cfg)
    if cfg.mode == "budget":
        return run_budget(cfg, ansatz)
    if cfg.mode == "compare":
        return run_compare(cfg, h, ansatz)
    if cfg.mode == "expect":
        return run_expect(cfg, h, ansatz)
    if cfg.mode == "heisenberg":
        return run_heisenberg(cfg, h, ansatz)
    return run_vqe(cfg, h, ansatz)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise CliError("USAGE", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="forging", description="Entanglement forging on a statevector simulator.")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--hamiltonian", help=f"Hamiltonian file or fixture name (fixtures: ${FIXTURE_ENV}, then bundled)")
    p.add_argument("--ansatz", help="ansatz file or fixture name")
    p.add_argument("--epsilon", type=float, help="target precision for sampled estimates and budgets")
    p.add_argument("--shots", type=int, help="sample count (pairs, per-term draws, or shots per circuit in vqe)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-p1", type=float, default=0.0)
    p.add_argument("--noise-p2", type=float, default=0.0)
    p.add_argument("--zne", action="store_true")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", help="output CSV path (default stdout)")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliError as exc:
        print(f"error {exc.code} {_one_line(str(exc))}", file=sys.stderr)
        return 2
    cfg = RunConfig(
        mode=args.mode,
        hamiltonian=args.hamiltonian,
        ansatz=args.ansatz,
        epsilon=args.epsilon,
        shots=args.shots,
        seed=args.seed,
        noise_p1=args.noise_p1,
        noise_p2=args.noise_p2,
        zne=args.zne,
        iters=args.iters,
        workers=args.workers,
        out=args.out,
    )
    try:
        text = run(cfg)
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
    except CliError as exc:
        print(f"error {exc.code} {_one_line(str(exc))}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        code = "IO" if isinstance(exc, OSError) else "INPUT"
        print(f"error {code} {_one_line(str(exc))}", file=sys.stderr)
        return 2
    return 0


def _one_line(text: str) -> str:
    return " ".join(text.split())


if __name__ == "__main__":
    sys.exit(main())
