"""Entanglement forging on a dense statevector simulator.

A ``2n``-qubit state ``(U (x) V) sum_n lambda_n |b_n>|b_n>`` is evaluated
through ``n``-qubit circuits only, either by forging states (Schrödinger
picture) or observables (Heisenberg picture).
"""

from .circuit import Circuit
from .clifford import CliffordCircuit, heisenberg_decompose, lemma1_synthesize, lemma2_synthesize
from .gates import Gate
from .hamiltonian import Hamiltonian, format_hamiltonian, load_hamiltonian, parse_hamiltonian, validate_realness
from .heisenberg import (
    ExplicitLambda,
    conditional_prep_circuit,
    heisenberg_estimate_sampled,
    heisenberg_expectation_exact,
)
from .orchestration import (
    Job,
    LayoutError,
    Multiplexer,
    ZneSchedule,
    copysample,
    demultiplex,
    execute,
    multiplex,
    tpb_group,
    zne_extrapolate,
)
from .pauli import PauliString, commutes
from .schrodinger import (
    SchmidtAnsatz,
    enumerate_forged_terms,
    estimate_sampled,
    forged_expectation_exact,
    forged_expectation_product_exact,
    format_ansatz,
    parse_ansatz,
    product_prep_state,
    sampling_budget,
    schmidt_spectrum,
    superposition_prep_circuit,
    truncation_residual,
)
from .statevector import NoiseModel, Statevector, apply_circuit, measure_samples, pauli_expectation
from .vqe import AnsatzConfig, HMatrix, HopEntry, assemble_h_matrix, build_U, spsa_optimize, update_lambda, vqe_run

__all__ = [name for name in dir() if not name.startswith("_")]
