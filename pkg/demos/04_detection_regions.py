"""
Detection regions in a parameter plane
======================================

Mixtures a W + b anti-W + (1 - a - b) I/8, drawn as text.
"""

import io

from kseparability.probes import catalog
from kseparability.scan import emit_csv, grid_scan

res = grid_scan("w-antiw", 3, [2, 3], catalog([2, 2, 2]), resolution=21)

for k in (2, 3):
    region = res.region(k)
    print(f"k = {k}   (rows: a from 1 down to 0, columns: b from 0 to 1)")
    for i in reversed(range(region.shape[0])):
        line = ""
        for j in range(region.shape[1]):
            a, b = res.axes[0][i], res.axes[1][j]
            line += " " if a + b > 1 + 1e-12 else ("#" if region[i, j] else ".")
        print("   " + line)
    print()

# the same data as CSV
buf = io.StringIO()
emit_csv(res, buf)
print("\n".join(buf.getvalue().splitlines()[:5]))
