import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_circuit
from forging.circuit import Circuit
from forging.gates import Gate
from forging.orchestration import (
    Job,
    LayoutError,
    Multiplexer,
    ZneSchedule,
    circuit_digest,
    copysample,
    demultiplex,
    execute,
    execute_job,
    expectation_from_counts,
    format_manifest,
    measure_pauli,
    multiplex,
    parse_manifest,
    qubitwise_compatible,
    tpb_group,
    zne_expectation,
    zne_extrapolate,
    zne_weights,
)
from forging.pauli import PauliString
from forging.statevector import NoiseModel, Statevector, apply_circuit, pauli_expectation

# copysampling


def test_copysample_examples():
    assert list(copysample([0.5, 0.3, 0.2], 10, seed=0)) == [5, 3, 2]
    assert list(copysample([0.25] * 4, 8, seed=0)) == [2, 2, 2, 2]
    assert list(copysample([0.9, 0.1], 2, seed=0)) == [1, 1]


def test_copysample_errors():
    with pytest.raises(ValueError):
        copysample([0.5, 0.5], 1)
    with pytest.raises(ValueError):
        copysample([0.5, 0.6], 10)
    with pytest.raises(ValueError):
        copysample([], 3)


weights = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=12).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(weights, st.integers(0, 50), st.integers(0, 2**32 - 1))
def test_copysample_properties(raw, extra, seed):
    w = np.array(raw) / sum(raw)
    J = len(w) + extra
    counts = copysample(w, J, seed)
    assert counts.sum() == J
    assert counts.min() >= 1
    assert np.array_equal(counts, copysample(w, J, seed))
    if np.all(w * J >= 1):
        assert np.all(np.abs(counts - w * J) <= 2)


def test_copysample_bound_needs_every_weight_to_earn_a_slot():
    # the one-copy floor alone forces a deviation of 3 here
    counts = copysample([0.0, 0.0, 0.0, 1.0], 4, seed=0)
    assert list(counts) == [1, 1, 1, 1]


def test_copysample_many_tiny_weights():
    w = np.array([0.98] + [0.002] * 10)
    counts = copysample(w, 11, seed=1)
    assert list(counts) == [1] * 11


# measurement grouping


def test_tpb_examples():
    groups = tpb_group([PauliString("ZI"), PauliString("IZ"), PauliString("ZZ")])
    assert len(groups) == 1
    assert len(tpb_group([PauliString("X"), PauliString("Z")])) == 2
    assert qubitwise_compatible(PauliString("XI"), PauliString("IZ"))
    assert not qubitwise_compatible(PauliString("XI"), PauliString("ZI"))


def test_tpb_groups_are_compatible(rng):
    paulis = list({"".join(rng.choice(list("IXYZ"), 4)) for _ in range(40)})
    groups = tpb_group([PauliString(p) for p in paulis])
    assert sorted(p.letters for g in groups for p in g) == sorted(paulis)
    for g in groups:
        for a in g:
            for b in g:
                assert all(x == "I" or y == "I" or x == y for x, y in zip(a.letters, b.letters))


# zero-noise extrapolation


def test_zne_examples():
    assert zne_extrapolate([(1, -1.0), (3, -1.0)]) == -1.0
    assert zne_extrapolate([(1, -1.0), (3, -0.8)]) == pytest.approx(-1.1)
    line = lambda x: 0.3 - 0.07 * x  # noqa: E731
    two = zne_extrapolate([(1, line(1)), (3, line(3))])
    three = zne_extrapolate([(1, line(1)), (3, line(3)), (5, line(5))])
    assert two == pytest.approx(0.3) and three == pytest.approx(0.3)
    with pytest.raises(ValueError):
        zne_extrapolate([(1, 0.0)])
    with pytest.raises(ValueError):
        zne_extrapolate([(1, 0.0), (1, 0.2)])


@given(st.floats(-1, 1, allow_nan=False), st.integers(2, 5))
def test_zne_noiseless_returns_value(v, n):
    assert zne_extrapolate([(2 * i + 1, v) for i in range(n)]) == v


def test_zne_schedule():
    s = ZneSchedule()
    assert s.factors == (1, 3) and s.allocate(3000) == [2000, 1000]
    with pytest.raises(ValueError):
        ZneSchedule((3, 5), (1, 1))
    with pytest.raises(ValueError):
        ZneSchedule((1, 2), (1, 1))
    with pytest.raises(ValueError):
        ZneSchedule((1, 3), (1, 0))


def test_measure_pauli_noiseless(rng):
    c = random_circuit(rng, 3, depth=6, kinds=("HOP", "RY", "H"))
    p = PauliString("XZY")
    exact = pauli_expectation(apply_circuit(Statevector.zero(3), c), p)
    assert measure_pauli(c, p, 200_000, seed=1) == pytest.approx(exact, abs=0.01)
    assert expectation_from_counts({"00": 3, "11": 1}, PauliString.parse("-ZZ")) == -1.0


def test_zne_reduces_bias():
    c = Circuit(3, (Gate("X", (0,)),) + tuple(Gate("HOP", (q % 2, q % 2 + 1), 0.4 + 0.1 * q) for q in range(8)))
    p = PauliString("ZZZ")
    ideal = pauli_expectation(apply_circuit(Statevector.zero(3), c), p)
    noise = NoiseModel(0.001, 0.02)
    raw = measure_pauli(c, p, 60_000, noise, seed=3)
    res = zne_expectation(c, p, noise, 60_000, seed=3)
    assert [f for f, _ in res.points] == [1, 3]
    assert abs(res.value - ideal) < abs(raw - ideal)


# multiplexer


def two_jobs(rng):
    a = Job("a", tuple((random_circuit(rng, 5, depth=8, kinds=("HOP", "RY", "H")), 500 + 100 * i) for i in range(3)), seed=1)
    b = Job("b", tuple((random_circuit(rng, 5, depth=8, kinds=("HOP", "RY", "CNOT")), 800) for _ in range(2)), seed=2)
    return a, b


@pytest.mark.parametrize("noise", [None, NoiseModel(0.01, 0.03)])
def test_multiplex_round_trip(rng, noise):
    a, b = two_jobs(rng)
    merged = multiplex([a, b], device_qubits=11)
    assert [pl.offset for pl in merged.placements] == [0, 6]
    out = demultiplex(merged, execute(merged, noise))
    assert out["a"] == execute_job(a, noise)
    assert out["b"] == execute_job(b, noise)
    assert [sum(c.values()) for c in out["a"]] == [500, 600, 700]


def test_multiplex_single_job_passthrough(rng):
    a, _ = two_jobs(rng)
    merged = multiplex([a])
    assert merged.device_qubits == 5
    assert merged.slot_circuit(0) == a.entries[0][0]
    assert demultiplex(merged, execute(merged))["a"] == execute_job(a)


def test_multiplex_layout_errors(rng):
    a, b = two_jobs(rng)
    with pytest.raises(LayoutError):
        multiplex([a, b], device_qubits=11, offsets=[0, 3])
    with pytest.raises(LayoutError):
        multiplex([a, b], device_qubits=11, offsets=[0, 5])  # no buffer qubit
    with pytest.raises(LayoutError):
        multiplex([a, b], device_qubits=10)
    with pytest.raises(ValueError):
        multiplex([a, Job("a", b.entries)])


def test_job_validation():
    c = Circuit(2, ())
    with pytest.raises(ValueError):
        Job("x", ((c, 0),))
    with pytest.raises(ValueError):
        Job("x", ())
    with pytest.raises(ValueError):
        Job("two words", ((c, 1),))
    with pytest.raises(ValueError):
        Job("x", ((c, 1), (Circuit(3, ()), 1)))


def test_manifest_round_trip(rng):
    a, b = two_jobs(rng)
    text = format_manifest([a, b])
    rows = parse_manifest(text)
    assert len(rows) == 5
    assert rows[0] == ("a", f"0:{circuit_digest(a.entries[0][0])}", 500)
    assert rows[-1][0] == "b" and rows[-1][2] == 800
    with pytest.raises(ValueError, match="line 1"):
        parse_manifest("a 0:abc\n")


def test_multiplexer_concurrent_submitters(rng):
    a, b = two_jobs(rng)
    c = Job("c", ((random_circuit(rng, 4, depth=5), 300),), seed=3)
    mux = Multiplexer(device_qubits=11)
    futures = {}

    def submit(job):
        futures[job.tag] = mux.submit(job)

    threads = [threading.Thread(target=submit, args=(j,)) for j in (a, b, c)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert mux.flush() >= 2
    for job in (a, b, c):
        assert futures[job.tag].result() == execute_job(job)


def test_multiplexer_rejects_oversized_job(rng):
    mux = Multiplexer(device_qubits=3)
    fut = mux.submit(Job("big", ((Circuit(5, ()), 10),)))
    mux.flush()
    with pytest.raises(LayoutError):
        fut.result()


def test_zne_weights_reproduce_extrapolation(rng):
    for factors in [(1, 3), (1, 3, 5), (1, 5, 7, 9)]:
        y = rng.normal(size=len(factors))
        assert np.dot(zne_weights(factors), y) == pytest.approx(zne_extrapolate(list(zip(factors, y))))
    assert np.allclose(zne_weights((1, 3)), [1.5, -0.5])
