"""
Diagonal stability beyond nonnegative matrices
==============================================

Two small matrices that are diagonally stable although their entrywise
absolute values are not Schur stable.
"""

import numpy as np

from netgain import dtds_2x2, dtds_oracle, dtds_search, is_schur
from netgain.diagstab import dtds_margin
from netgain.linalg import perron_radius

## A 2x2 example
A = 0.5 * np.array([[-1.0, 1.0], [-1.0, -1.0]])
print("closed-form 2x2 test:", dtds_2x2(A))
cert = dtds_search(A)
print("search certificate d =", cert.d, "margin =", cert.margin)
print("Perron radius of |A|:", perron_radius(np.abs(A)))

## A 4x4 example with a hand-picked scaling
A4 = np.array([
    [0.0, 0.23, 0.56, 0.56],
    [0.51, 0.0, 0.56, 0.09],
    [-0.27, -0.12, 0.0, 0.4],
    [0.51, 0.15, 0.57, 0.0],
])
d_hand = [0.9994, 0.585, 1.8213, 0.9629]
print("margin at the hand-picked d:", dtds_margin(A4, d_hand))

cert4 = dtds_search(A4)
print("searched d =", np.round(cert4.d, 4), "margin =", cert4.margin)
print("|A4| Schur?", is_schur(np.abs(A4)), "Perron radius", perron_radius(np.abs(A4)))

## The brute-force grid oracle agrees on the small case
print("grid oracle on the 2x2:", dtds_oracle(A) is not None)
