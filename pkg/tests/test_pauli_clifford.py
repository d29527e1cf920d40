import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forging.clifford import (
    CliffordCircuit,
    heisenberg_decompose,
    lemma1_synthesize,
    lemma2_synthesize,
    standard_form,
)
from forging.gates import Gate
from forging.pauli import PauliString, commutes

import oracles

letters = st.text(alphabet="IXYZ", min_size=1, max_size=4)


def signed_paulis(n):
    for word in itertools.product("IXYZ", repeat=n):
        for s in (1, -1):
            yield PauliString("".join(word), s)


def test_parse_and_print():
    p = PauliString.parse("-XXIZY")
    assert p.letters == "XXIZY" and p.sign == -1
    assert str(p) == "-XXIZY"
    assert PauliString.parse(str(p)) == p
    assert p.weight == 4 and p.y_count == 1


def test_bad_letters_rejected():
    with pytest.raises(ValueError):
        PauliString("XQ")


@given(letters)
def test_matrix_matches_oracle(word):
    assert np.allclose(PauliString(word).matrix(), oracles.pauli(word))


@given(letters)
def test_conjugation_sign(word):
    p = PauliString(word)
    assert np.allclose(p.matrix().conj(), p.conj_sign * p.matrix())
    assert p.conj_sign == (-1) ** p.y_count


@given(letters, st.data())
def test_commutes_matches_commutator(a, data):
    b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
    pa, pb = oracles.pauli(a), oracles.pauli(b)
    dense = np.allclose(pa @ pb, pb @ pa)
    assert commutes(PauliString(a), PauliString(b)) == dense


def test_commutes_examples():
    assert not commutes(PauliString("X"), PauliString("Z"))
    assert commutes(PauliString("XX"), PauliString("ZZ"))
    with pytest.raises(ValueError):
        commutes(PauliString("X"), PauliString("XX"))


@given(letters, st.data())
def test_product_matches_matrices(a, data):
    b = data.draw(st.text(alphabet="IXYZ", min_size=len(a), max_size=len(a)))
    coeff, p = PauliString(a) @ PauliString(b)
    assert np.allclose(coeff * oracles.pauli(p.letters), oracles.pauli(a) @ oracles.pauli(b))


def test_clifford_conjugation_matches_dense(rng):
    kinds = ["H", "S", "SDG", "X", "Y", "Z", "CNOT", "CZ", "SWAP"]
    for _ in range(50):
        gates = []
        for _ in range(6):
            k = kinds[rng.integers(len(kinds))]
            if k in ("CNOT", "CZ", "SWAP"):
                a, b = rng.choice(3, 2, replace=False)
                gates.append(Gate(k, (int(a), int(b))))
            else:
                gates.append(Gate(k, (int(rng.integers(3)),)))
        c = CliffordCircuit(3, tuple(gates))
        u = oracles.unitary(c.to_circuit())
        p = PauliString("".join(rng.choice(list("IXYZ"), 3)), int(rng.choice([1, -1])))
        q = c.conjugate(p)
        assert np.allclose(u @ oracles.pauli(p.letters, p.sign) @ u.conj().T, oracles.pauli(q.letters, q.sign))
        r = c.conjugate_inverse(p)
        assert np.allclose(u.conj().T @ oracles.pauli(p.letters, p.sign) @ u, oracles.pauli(r.letters, r.sign))


def test_standard_form_examples():
    w, part = standard_form(PauliString("X"), PauliString("Z"))
    assert len(w) == 0 and part.A == (0,)
    w, part = standard_form(PauliString("Y"), PauliString("X"))
    assert part.A == (0,) and w.cnot_count == 0
    assert w.conjugate_inverse(PauliString("Y")).letters == "X"
    assert w.conjugate_inverse(PauliString("X")).letters == "Z"
    w, part = standard_form(PauliString("ZI"), PauliString("IZ"))
    assert len(w) == 0 and part.B == (0,) and part.C == (1,)


@pytest.mark.parametrize("n", [2, 3])
def test_standard_form_partitions(n):
    for a, b in itertools.product(itertools.product("IXYZ", repeat=n), repeat=2):
        o1, o2 = PauliString("".join(a)), PauliString("".join(b))
        w, part = standard_form(o1, o2)
        assert all(g.arity == 1 for g in w.gates)
        cover = sorted(part.A + part.B + part.C + part.D + part.E)
        assert cover == list(range(n))
        s1, s2 = w.conjugate_inverse(o1), w.conjugate_inverse(o2)
        want = {"A": ("X", "Z"), "B": ("Z", "I"), "C": ("I", "Z"), "D": ("Z", "Z"), "E": ("I", "I")}
        for name, (x, z) in want.items():
            for q in getattr(part, name):
                assert (s1.letters[q], s2.letters[q]) == (x, z)


def _check_lemma1(o1, o2):
    v, q = lemma1_synthesize(o1, o2)
    n = len(o1)
    assert v.conjugate(PauliString.single(n, q, "X")) == o1
    assert v.conjugate(PauliString.single(n, q, "Z")) == o2
    assert v.cnot_count <= o1.weight + o2.weight - 2
    return v, q


def _check_lemma2(o1, o2):
    v, p, q = lemma2_synthesize(o1, o2)
    n = len(o1)
    assert p != q
    assert v.conjugate(PauliString.single(n, p, "Z")) == o1
    assert v.conjugate(PauliString.single(n, q, "Z")) == o2
    assert v.cnot_count <= o1.weight + o2.weight - 2
    return v, p, q


def test_lemma1_examples():
    v, q = _check_lemma1(PauliString("X"), PauliString("Z"))
    assert len(v) == 0 and q == 0
    v, q = _check_lemma1(PauliString("XXX"), PauliString("ZZZ"))
    assert q == 0
    assert [g.to_text() for g in v.gates] == ["CNOT 0 2", "CNOT 1 0", "CNOT 2 1"]


def test_lemma2_examples():
    v, p, q = _check_lemma2(PauliString("ZI"), PauliString("IZ"))
    assert len(v) == 0 and (p, q) == (0, 1)
    v, p, q = _check_lemma2(PauliString("XX"), PauliString("ZZ"))
    kinds = [g.kind for g in v.gates]
    assert "H" in kinds and kinds.count("CNOT") == 2


def test_lemma_contract_violations():
    with pytest.raises(ValueError):
        lemma1_synthesize(PauliString("XX"), PauliString("ZZ"))
    with pytest.raises(ValueError):
        lemma2_synthesize(PauliString("X"), PauliString("Z"))
    with pytest.raises(ValueError):
        lemma2_synthesize(PauliString("ZZ"), PauliString("ZZ"))
    with pytest.raises(ValueError):
        lemma2_synthesize(PauliString("II"), PauliString("ZZ"))


def test_lemmas_exhaustive_three_qubits():
    for o1, o2 in itertools.product(signed_paulis(3), repeat=2):
        if o1.is_identity() or o2.is_identity():
            continue
        if not commutes(o1, o2):
            v, q = _check_lemma1(o1, o2)
            u = oracles.unitary(v.to_circuit())
            assert np.allclose(u @ oracles.pauli(PauliString.single(3, q, "X").letters) @ u.conj().T,
                               oracles.pauli(o1.letters, o1.sign))
        elif o1.unsigned() != o2.unsigned():
            _check_lemma2(o1, o2)


def test_lemmas_random_six_qubits(rng):
    done = 0
    while done < 500:
        o1 = PauliString("".join(rng.choice(list("IXYZ"), 6)), int(rng.choice([1, -1])))
        o2 = PauliString("".join(rng.choice(list("IXYZ"), 6)), int(rng.choice([1, -1])))
        if o1.is_identity() or o2.is_identity() or o1.unsigned() == o2.unsigned():
            continue
        if commutes(o1, o2):
            _check_lemma2(o1, o2)
        else:
            _check_lemma1(o1, o2)
        done += 1


def _direct_sym(o1, o2):
    a, b = oracles.pauli(o1.letters, o1.sign), oracles.pauli(o2.letters, o2.sign)
    return np.kron(b, a) + np.kron(a, b)


def test_decompose_equal_pair():
    d = heisenberg_decompose(PauliString("Z"), PauliString("Z"))
    assert d.a0 == 0 and [t.coeff for t in d.terms] == [1.0, 1.0]
    assert all(np.allclose(t.pauli_matrix(), oracles.pauli("Z")) for t in d.terms)


def test_decompose_anticommuting_pair():
    d = heisenberg_decompose(PauliString("X"), PauliString("Z"))
    assert d.sigma == 1 and [t.coeff for t in d.terms] == [1.0, -1.0]
    x, z = oracles.pauli("X"), oracles.pauli("Z")
    c1, c2 = (x + z) / np.sqrt(2), (x - z) / np.sqrt(2)
    assert np.allclose(d.terms[0].circuit.unitary(), c1)
    assert np.allclose(d.terms[1].circuit.unitary(), c2)
    assert np.allclose(np.kron(x, z) + np.kron(z, x), np.kron(c1, c1) - np.kron(c2, c2))


def test_decompose_commuting_pair():
    d = heisenberg_decompose(PauliString("ZI"), PauliString("IZ"))
    assert d.a0 == 1 and len(d.terms) == 4
    z1, z2 = oracles.pauli("ZI"), oracles.pauli("IZ")
    eye = np.eye(4)
    for t, (alpha, beta) in zip(d.terms, [(0, 0), (0, 1), (1, 0), (1, 1)]):
        sa, sb = (-1) ** alpha, (-1) ** beta
        want = 0.5 * (eye + sa * z1 + sb * z2 - sa * sb * z1 @ z2)
        assert np.allclose(t.circuit.unitary(), want)
        assert t.coeff == sa * sb
    assert np.allclose(d.reconstruct(), _direct_sym(PauliString("ZI"), PauliString("IZ")))


def test_decompose_parity_mismatch_is_zero():
    d = heisenberg_decompose(PauliString("YI"), PauliString("ZI"))
    assert d.zero and not d.terms


@pytest.mark.parametrize("n", [1, 2])
def test_decompose_reconstructs_exhaustively(n):
    for o1, o2 in itertools.product(signed_paulis(n), repeat=2):
        if o1.is_identity() or o2.is_identity():
            continue
        d = heisenberg_decompose(o1, o2)
        if d.zero:
            continue
        direct = _direct_sym(o1, o2)
        assert np.max(np.abs(d.reconstruct() - direct)) <= 1e-10
        assert np.max(np.abs(d.reconstruct(symbolic=True) - direct)) <= 1e-10
        for t in d.terms:
            assert abs(t.coeff) <= 1
            assert t.circuit.cnot_count <= 2 * (o1.weight + o2.weight)
            u = t.circuit.unitary()
            assert np.allclose(u, u.conj().T)


def test_decompose_random_three_qubits(rng):
    for _ in range(60):
        o1 = PauliString("".join(rng.choice(list("IXYZ"), 3)), int(rng.choice([1, -1])))
        o2 = PauliString("".join(rng.choice(list("IXYZ"), 3)), int(rng.choice([1, -1])))
        if o1.is_identity() or o2.is_identity():
            continue
        d = heisenberg_decompose(o1, o2)
        if not d.zero:
            assert np.max(np.abs(d.reconstruct() - _direct_sym(o1, o2))) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="IXYZ", min_size=3, max_size=3), st.text(alphabet="IXYZ", min_size=3, max_size=3))
def test_mismatched_parity_has_zero_expectation_on_real_symmetric_states(a, b):
    o1, o2 = PauliString(a), PauliString(b)
    if o1.y_count % 2 == o2.y_count % 2:
        return
    rng = np.random.default_rng(0)
    c = rng.normal(size=(8, 8))
    c = c + c.T
    psi = (c / np.linalg.norm(c)).reshape(-1)
    assert abs(oracles.expectation(psi, _direct_sym(o1, o2))) < 1e-12
