"""
Stability region of a two-gain feedback loop
============================================

Compare the loop-gain test gamma1 + gamma2 < 1 with the exact diagonal
stability condition on a grid of gain pairs, and write the grid to CSV.
"""

import sys

import numpy as np

from netgain import region_sweep, two_gain_feedback
from netgain.smallgain import region_csv

A = np.array([[-1.0, -1.0], [1.0, -1.0]])

## Single points
for g in [(0.3, 0.3), (0.6, 0.6), (0.8, 0.8)]:
    print(g, "standard:", sum(g) < 1, "dtds:", two_gain_feedback(A, *g))

## Full sweep
rows = region_sweep(A, 0.01)
n_std = sum(r.standard for r in rows)
n_dtds = sum(r.dtds for r in rows)
print(f"{len(rows)} grid points, standard holds on {n_std}, dtds on {n_dtds}")

# largest equal gain still certified; compare with 1/sqrt(2)
edge = max(r.gamma1 for r in rows if r.gamma1 == r.gamma2 and r.dtds)
print("equal-gain edge:", edge, "vs", 1 / np.sqrt(2))

## Optional CSV output
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(region_csv(rows))
    print("wrote", sys.argv[1])
