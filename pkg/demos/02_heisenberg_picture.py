# %% [markdown]
# # Moving the entanglement into the observable
#
# Instead of splitting the state, the symmetrized observable O1 (x) O2 + O2 (x) O1
# is rewritten as a short sum of products C* (x) C of Clifford circuits. Each
# piece becomes a one-register overlap that we estimate with a ratio of
# Schmidt coefficients.

# %%
import numpy as np

from forging.circuit import Circuit
from forging.clifford import heisenberg_decompose, lemma1_synthesize
from forging.gates import Gate
from forging.heisenberg import (
    ExplicitLambda,
    heisenberg_estimate_sampled,
    heisenberg_expectation_exact,
    samples_for_precision,
)
from forging.pauli import PauliString

# %%
o1, o2 = PauliString("XZY"), PauliString("ZXY")
d = heisenberg_decompose(o1, o2)
print(f"a0={d.a0}, {len(d.terms)} Clifford terms")
for t in d.terms:
    print(f"  {t.coeff:+.3f}  {t.circuit.cnot_count} CNOTs  {len(t.circuit)} gates")
v, q = lemma1_synthesize(PauliString("XXX"), PauliString("ZZZ"))
print("XXX/ZZZ pair from X,Z on qubit", q, "via", [g.to_text() for g in v.gates])

# %%
rng = np.random.default_rng(3)
U = Circuit(3, tuple(Gate("HOP", (a, b), float(rng.uniform(-1, 1))) for a, b in [(0, 1), (1, 2), (0, 2)]))
w = rng.normal(size=8)
lm = ExplicitLambda(3, w / np.linalg.norm(w))

exact = heisenberg_expectation_exact(U, lm, o1, o2)
m, m0 = samples_for_precision(0.05)
value, err = heisenberg_estimate_sampled(U, lm, o1, o2, M=m, seed=0)
print(f"exact {exact:+.5f}  sampled {value:+.5f} +/- {err:.5f} from {m} ratio draws")
