# %% [markdown]
# # States with one T gate
#
# A Clifford circuit with a single T gate produces a state stabilized by a
# 3-dimensional group of Pauli strings on 4 qubits. The learner returns a
# Clifford C and a small block state sigma0 so that
# C^dagger (|00><00| (x) sigma0) C approximates the input.

# %%
from __future__ import annotations

import numpy as np

from stabboot import CopyOracle, HighDimConfig, InstanceSpec, agnostic_highdim, generate_instance
from stabboot.dense import exact_fidelity
from stabboot.instances import stabilizer_dimension

rng = np.random.default_rng(7)
inst = generate_instance(InstanceSpec("doped", 4, {"t_count": 1}, seed=11))
print("stabilizer dimension of the target:", stabilizer_dimension(inst.rho))

# %%
oracle = CopyOracle(inst.rho, rng, budget_cap=10 ** 12)
cfg = HighDimConfig(t=2, tau=1.0, eps=0.1, delta=0.2, p_floor=0.05, outer_reps=3, step2_reps=3, exp_reps=3)
out = agnostic_highdim(oracle, cfg)
print(f"fidelity of the reconstruction {exact_fidelity(inst.rho, out.density()):.4f}")
print("Clifford gate count:", len(out.clifford.gates))
print("block state eigenvalues:", np.round(np.linalg.eigvalsh(out.sigma0.data), 4))
