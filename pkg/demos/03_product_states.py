# %% [markdown]
# # Two ways to learn a product state
#
# Both learners below look for the best product of single-qubit stabilizer
# states. The first one only knows the six states as a discrete packing set and
# works from local fidelity estimates. The second one uses Bell-difference
# samples and needs far fewer copies.

# %%
from __future__ import annotations

import numpy as np

from stabboot import CopyOracle, DensityMatrix, ProductState, agnostic_product, agnostic_stab_product, stabilizer_packing
from stabboot.dense import exact_fidelity

packing = stabilizer_packing()
n = 6
rng = np.random.default_rng(5)
labels = tuple(int(i) for i in rng.integers(len(packing), size=n))
target = ProductState(labels, packing)
rho = DensityMatrix.mix([(0.8, target.vector()), (0.2, np.eye(2 ** n) / 2 ** n)])

# %%
for name, run in [
    ("packing learner", lambda o: agnostic_product(o, packing, 0.8, 0.1, 0.1, p_floor=0.05)),
    ("Bell-difference learner", lambda o: agnostic_stab_product(o, 0.8, 0.1, 0.1, p_floor=0.05)),
]:
    oracle = CopyOracle(rho, np.random.default_rng(1))
    out = run(oracle)
    f = exact_fidelity(rho, out.vector())
    print(f"{name:24s} fidelity {f:.4f}  copies {oracle.ledger.base_copies:,}")
