"""
Checking a certified gain bound in simulation
=============================================

Two first-order systems in a rotation-coupled loop. The certified bound
||y||_T <= rho ||v||_T + beta is checked at every horizon of many seeded
input sequences.
"""

import numpy as np

from netgain import LtiSystem, NetworkSpec, SubsystemGain, l2_gain, simulate, verify_network
from netgain.netsim import empirical_bound_check

## Realizations and their gains
a = b = 0.35
systems = [LtiSystem.one_pole(a, b), LtiSystem.one_pole(a, b)]
gamma = l2_gain(systems[0])[0]
print("frequency-grid gain:", gamma, "analytic:", b / (1 - a))

## Certify the network
A = np.array([[0.0, -1.0], [1.0, 0.0]])
net = NetworkSpec([SubsystemGain(gamma), SubsystemGain(gamma)], A)
bound = verify_network(net)
print(f"rho = {bound.rho:.6f}, beta = {bound.beta:.3g}, epsilon = {bound.epsilon:.3g}")

## One trajectory
rng = np.random.default_rng(0)
log = simulate(net, systems, rng.uniform(-1, 1, size=(500, 2)))
print("final ratio ||y||/||v||:", log.norm_y[-1] / log.norm_v[-1])

## The seeded trial suite
report = empirical_bound_check(net, systems, bound, trials=50, T=2000)
print(f"{report.trials} trials, {report.violations} violations, max ratio {report.max_ratio:.6f}")
