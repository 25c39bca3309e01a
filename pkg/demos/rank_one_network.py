"""
Networks coupled through a weighted average
===========================================

Each node feeds back on itself with gain s_i and receives k_i times a
nonnegative weighted average g^T y of all outputs, so the interconnection
is diag(s) + k g^T. Stability reduces to a scalar inequality.
"""

import numpy as np

from netgain import NetworkSpec, RankOneInterconnection, SubsystemGain, analyze_rank_one, dtds_search
from netgain.smallgain import checklist, verify_network

gains = [SubsystemGain(1.0), SubsystemGain(1.0)]

## A coupling weak enough to certify
weak = RankOneInterconnection(s=[0.5, -0.5], k=[0.3, -0.3], g=[0.4, 0.4])
res = analyze_rank_one(gains, weak)
print("weak coupling: verdict", bool(res), "sum", res.total, "c", res.c)
print("cross-check by search:", dtds_search(res.A) is not None)

## Stronger broadcast gains break the condition
strong = RankOneInterconnection(s=[0.5, -0.5], k=[1.0, -1.0], g=[0.4, 0.4])
res = analyze_rank_one(gains, strong)
print("strong coupling: verdict", bool(res), "sum", res.total)

## The same network through the general machinery
net = NetworkSpec(gains, weak.matrix, rank_one=weak)
print("checklist items:", checklist(net).items)
bound = verify_network(net)
print(f"||y|| <= {bound.rho:.4f} ||v|| + {bound.beta:.3g}")

## A larger random instance
rng = np.random.default_rng(1)
n = 6
conn = RankOneInterconnection(rng.uniform(-0.8, 0.8, n), rng.normal(size=n) * 0.3, rng.uniform(0, 1, n))
gammas = rng.uniform(0.5, 1.0, n)
res = analyze_rank_one(gammas, conn)
print(f"n={n}: verdict {bool(res)}, sum {res.total:.4f}, search {dtds_search(res.A) is not None}")
