"""
Noise thresholds for W states
=============================

Bisected detection thresholds against the closed form, n = 3..6.
"""

from kseparability.probes import probe_computational
from kseparability.scan import analytic_w_threshold, bisect_threshold, family_curve

print(" n  k   analytic        bisected")
for n in range(3, 7):
    probe = probe_computational([2] * n)
    curve = family_curve("w-noise", n)
    for k in range(2, n + 1):
        exact = analytic_w_threshold(n, k)
        got = bisect_threshold(curve, k, probe, tol=1e-9)
        print(f"{n:2d} {k:2d}   {str(exact):>8} = {float(exact):.6f}   {got:.9f}")

# larger k means weaker claims, so less signal is needed
