from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import forging
from forging.hamiltonian import (
    Hamiltonian,
    HamiltonianFormatError,
    format_hamiltonian,
    load_hamiltonian,
    parse_hamiltonian,
    validate_realness,
)
from forging.pauli import PauliString
from forging.schrodinger import format_ansatz, parse_ansatz

import oracles

DATA = Path(forging.__file__).parent / "data"


def test_single_term():
    h = parse_hamiltonian("qubits 2 partition 1\n1.0 ZZ\n")
    assert h.n == 1 and len(h.terms) == 1
    ((c, o1, o2),) = h.split_terms()
    assert c == 1.0 and o1.letters == "Z" and o2.letters == "Z"


def test_one_sided_term():
    h = parse_hamiltonian("qubits 2\n0.5 XI\n")
    ((c, o1, o2),) = h.split_terms()
    assert (o1.letters, o2.letters) == ("X", "I")
    assert o2.is_identity()


def test_split_puts_first_letters_in_register_one():
    h = parse_hamiltonian("qubits 6 partition 3\n0.1 XYZIIX\n")
    ((_, o1, o2),) = h.split_terms()
    assert o1.letters == "XYZ" and o2.letters == "IIX"


def test_signed_pauli_folds_into_coefficient():
    h = parse_hamiltonian("qubits 2\n0.5 -ZZ\n")
    assert h.terms[0][0] == -0.5 and h.terms[0][1].sign == 1


def test_comments_and_blank_lines():
    text = "# header comment\nqubits 2 partition 1  # trailing\n\n0.25 XX # term\n"
    assert len(parse_hamiltonian(text).terms) == 1


@pytest.mark.parametrize(
    "text, match",
    [
        ("", "missing"),
        ("qbits 2\n", "line 1"),
        ("qubits 3\n1.0 ZZZ\n", "odd qubit count"),
        ("qubits 2\nabc ZZ\n", "line 2: bad coefficient"),
        ("qubits 2\n1.0 ZZ\n1.0 ZZZ\n", "line 3"),
        ("qubits 2\n1.0 ZQ\n", "line 2"),
        ("qubits 2\n1.0 ZZ extra\n", "line 2"),
        ("qubits 2\nnan ZZ\n", "line 2"),
        ("qubits 2\n1.0 ZZ\nterms 2\n", "manifest"),
        ("qubits 2\n1.0 ZZ\nchecksum 2.0\n", "checksum"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(HamiltonianFormatError, match=match):
        parse_hamiltonian(text)


def test_odd_total_with_explicit_partition():
    h = parse_hamiltonian("qubits 3 partition 1\n1.0 ZZZ\n")
    assert h.n == 1


@pytest.mark.parametrize("name", ["bell.hamiltonian", "toy22.hamiltonian"])
def test_fixture_round_trip(name):
    text = (DATA / name).read_text()
    h = parse_hamiltonian(text)
    assert format_hamiltonian(h) == text
    assert parse_hamiltonian(format_hamiltonian(h)) == h


@pytest.mark.parametrize("name", ["bell.ansatz", "toy22.ansatz", "water_k10.ansatz"])
def test_ansatz_fixture_round_trip(name):
    text = (DATA / name).read_text()
    assert format_ansatz(parse_ansatz(text)) == text


def test_toy_fixture_manifest():
    h = load_hamiltonian(DATA / "toy22.hamiltonian")
    assert h.n_qubits == 4 and h.n == 2
    assert len(h.terms) == 19
    assert validate_realness(h)


def test_realness_examples():
    assert validate_realness(parse_hamiltonian("qubits 2\n1.0 ZZ\n"))
    assert not validate_realness(parse_hamiltonian("qubits 2\n1.0 YI\n"))
    # YY is real as a product but each half has one Y
    assert not validate_realness(parse_hamiltonian("qubits 2\n1.0 YY\n"))
    assert validate_realness(parse_hamiltonian("qubits 4\n1.0 YYYY\n"))


def test_matrix_matches_oracle():
    h = load_hamiltonian(DATA / "toy22.hamiltonian")
    want = sum(c * oracles.pauli(p.letters) for c, p in h.terms)
    assert np.allclose(h.matrix(), want)
    assert h.ground_energy() == pytest.approx(np.linalg.eigvalsh(want)[0])


word8 = st.text(alphabet="IXYZ", min_size=8, max_size=8)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5, allow_nan=False), word8), min_size=1, max_size=8))
def test_random_hamiltonian_hermitian_and_round_trips(rows):
    h = Hamiltonian(8, 4, tuple((c, PauliString(w)) for c, w in rows))
    m = h.matrix()
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    assert parse_hamiltonian(format_hamiltonian(h)) == h


def test_constructor_validation():
    with pytest.raises(ValueError):
        Hamiltonian(2, 1, ((float("inf"), PauliString("ZZ")),))
    with pytest.raises(ValueError):
        Hamiltonian(2, 1, ((1.0, PauliString("ZZZ")),))
    with pytest.raises(ValueError):
        Hamiltonian(2, 3, ())
    with pytest.raises(ValueError):
        Hamiltonian(2, 1, ((1.0, PauliString("ZZ", -1)),))
