"""
Evaluating the level-k inequality
=================================

W state with white noise, and a GHZ state seen through the phase-flip probe.
"""

import numpy as np

from kseparability import states, probes, criteria
from kseparability.tensor import DensityOperator

dims = [2, 2, 2]

# W + noise at beta = 0.6, computational probe
rho = states.family_state(states.FamilyPoint("w-noise", 3, (0.6,)))
comp = probes.probe_computational(dims)
for k in (2, 3):
    print(criteria.level_k_report(rho, comp, k))

# the same numbers from the literal two-copy computation
oracle = criteria.two_copy_oracle(rho, comp)
print("two-copy margin at k=2:", oracle.margin(2))

# pure GHZ: uniform probes miss it at k=2, the phase-flip probe does not
ghz = DensityOperator.from_ensemble([1.0], [states.ghz(3)], dims)
for probe in probes.catalog(dims):
    r = criteria.level_k_report(ghz, probe, 2)
    print(f"{probe.label:>18}  margin={r.margin:+.3f}  detected={r.detected}")

# pairwise full-separability tests
for p in criteria.pairwise_reports(ghz, probes.probe_phase_flip(dims)):
    print(p.pair, round(p.margin, 3), p.violated)

print(np.round(rho.to_dense().real[:4, :4], 3))
