"""
Classifying states by the smallest detected level
=================================================
"""

import numpy as np

from kseparability import states, probes, criteria
from kseparability.tensor import DensityOperator

dims = [2, 2, 2]
catalog = probes.catalog(dims, n_random=16, seed=1)

examples = {
    "GHZ": DensityOperator.from_ensemble([1.0], [states.ghz(3)], dims),
    "W": DensityOperator.from_ensemble([1.0], [states.w_state(3)], dims),
    "anti-W": DensityOperator.from_ensemble([1.0], [states.anti_w(3)], dims),
    "W + noise, beta=0.4": states.family_state(states.FamilyPoint("w-noise", 3, (0.4,))),
    "biseparable mixture": states.biseparable_triple(1 / 3, 1 / 3, 1 / 3),
    "I/8": DensityOperator.from_matrix(np.eye(8) / 8, dims),
}

for name, rho in examples.items():
    c = criteria.classify(rho, catalog)
    best = ", ".join(f"k={k}: {m:+.3f} ({c.best_probe[k]})" for k, m in c.best_margin.items())
    print(f"{name:>22}  min_k={c.min_k}  {best}")

# min_k = 2 certifies genuine tripartite entanglement; None means no probe fired
