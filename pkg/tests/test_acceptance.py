"""Exit criteria, one test per criterion, each at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import numpy as np
import pytest

from conftest import A_FEEDBACK, A_FOUR, A_SMALL, D_FOUR
from netgain.diagstab import (
    RankOnePerturbation,
    _slacks_2x2,
    bilinear_transform,
    ctds_search,
    dtds_2x2,
    dtds_margin,
    dtds_oracle,
    dtds_search,
    is_schur,
    minimize_ctds_value,
    minimize_scaled_norm,
    rank_one_dtds,
    rank_one_perturbation_dtds,
)
from netgain.linalg import perron_radius
from netgain.netsim import LtiSystem, empirical_bound_check, l2_gain
from netgain.smallgain import NetworkSpec, SubsystemGain, region_sweep, two_gain_feedback, verify_network

ROTATION = [[0.0, -1.0], [1.0, 0.0]]


def spectral_radius(A):
    return float(max(abs(np.linalg.eigvals(A))))


def siso(gammas, A):
    return NetworkSpec([SubsystemGain(g) for g in gammas], A)


@pytest.mark.acceptance(1, "2x2 DTDS matrix whose |A| is not Schur")
def test_criterion_1():
    assert dtds_2x2(A_SMALL)
    cert = dtds_search(A_SMALL)
    assert cert is not None and cert.margin < 0
    assert not is_schur(np.abs(A_SMALL))
    assert perron_radius(np.abs(A_SMALL)) >= 1 - 1e-9


@pytest.mark.acceptance(2, "4x4 DTDS matrix whose |A| is not Schur")
def test_criterion_2():
    assert dtds_margin(A_FOUR, D_FOUR) < -1e-6
    cert = dtds_search(A_FOUR)
    assert cert is not None and cert.margin < -1e-6
    assert not is_schur(np.abs(A_FOUR))


@pytest.mark.acceptance(3, "2x2 closed form agrees with grid oracle")
def test_criterion_3():
    rng = np.random.default_rng(3)
    retained = 0
    for _ in range(1000):
        A = rng.uniform(-1.5, 1.5, (2, 2))
        if abs(min(_slacks_2x2(A))) < 1e-3:
            continue
        retained += 1
        assert dtds_2x2(A) == (dtds_oracle(A) is not None), A
    assert retained > 900


@pytest.mark.acceptance(4, "rank-one perturbation criterion agrees with search/oracle")
def test_criterion_4():
    rng = np.random.default_rng(4)
    retained = oracle_checked = 0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        p = RankOnePerturbation(rng.uniform(-0.9, 0.9, n), rng.uniform(-1, 1, n), rng.uniform(0, 1, n))
        A = p.matrix
        res = rank_one_perturbation_dtds(p)
        if abs(spectral_radius(A) - 1) < 1e-3:
            continue
        if res.schur and abs(res.total - 1) < 1e-3:
            continue
        retained += 1
        assert bool(res) == (dtds_search(A) is not None), A
        if n <= 3:
            oracle_checked += 1
            assert bool(res) == (dtds_oracle(A) is not None), A
    assert retained > 400 and oracle_checked > 50


@pytest.mark.acceptance(5, "DTDS(A) iff CTDS of the bilinear transform")
def test_criterion_5():
    rng = np.random.default_rng(5)
    drawn = retained = 0
    while drawn < 500:
        n = int(rng.integers(1, 6))
        A = rng.uniform(-1, 1, (n, n)) * rng.uniform(0.5, 2.0) / np.sqrt(n)
        if abs(np.linalg.det(A - np.eye(n))) <= 1e-3:
            continue
        drawn += 1
        B = bilinear_transform(A)
        if abs(minimize_scaled_norm(A).value - 1) < 1e-4:
            continue
        if abs(minimize_ctds_value(B).value) < 1e-4 * np.linalg.norm(B, 2):
            continue
        retained += 1
        assert (dtds_search(A) is not None) == (ctds_search(B) is not None), A
    assert retained > 450


@pytest.mark.acceptance(6, "outer product uv^T is DTDS iff |v|^T|u| < 1")
def test_criterion_6():
    rng = np.random.default_rng(6)
    retained = 0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        # spread |v|^T |u| evenly over (0.2, 1.8) so both verdicts occur
        u *= rng.uniform(0.2, 1.8) / (np.abs(v) @ np.abs(u))
        if abs(np.abs(v) @ np.abs(u) - 1) < 1e-3:
            continue
        retained += 1
        verdict = rank_one_dtds(u, v)
        assert verdict == (dtds_search(np.outer(u, v)) is not None), (u, v)
        assert verdict == bool(rank_one_perturbation_dtds(RankOnePerturbation(np.zeros(n), u * np.sign(v), np.abs(v))))
    assert retained > 490


@pytest.mark.acceptance(7, "two-gain stability region strictly larger than gamma1 + gamma2 < 1")
def test_criterion_7():
    rows = region_sweep(A_FEEDBACK, 0.01)
    standard = {(r.gamma1, r.gamma2) for r in rows if r.standard}
    dtds = {(r.gamma1, r.gamma2) for r in rows if r.dtds}
    assert standard < dtds
    point = next(r for r in rows if (r.gamma1, r.gamma2) == (0.6, 0.6))
    assert (point.standard, point.dtds) == (False, True)
    equal = {r.gamma1: r.dtds for r in rows if r.gamma1 == r.gamma2}
    assert equal[0.7] and not equal[0.71]
    for (g1, g2), ok in [(r[:2], r.dtds) for r in rows]:
        assert ok == (abs(g1 - g2) + 2 * g1 * g2 < 1) or abs(abs(g1 - g2) + 2 * g1 * g2 - 1) < 1e-9

    rng = np.random.default_rng(7)
    checked = 0
    for i in rng.permutation(len(rows)):
        g1, g2 = rows[i].gamma1, rows[i].gamma2
        value = abs(g1 - g2) + 2 * g1 * g2
        if abs(value - 1) < 1e-3:
            continue
        checked += 1
        assert (dtds_search(np.diag([g1, g2]) @ A_FEEDBACK) is not None) == (value < 1), (g1, g2)
        if checked == 100:
            break
    assert checked == 100


@pytest.mark.acceptance(8, "companion interconnection recovers the classic small-gain test")
def test_criterion_8():
    gammas = np.linspace(0.05, 2.0, 20)
    a12s = np.array([-2.0, -0.5, 0.3, 1.0, 1.7])
    checked = 0
    for g1 in gammas:
        for g2 in gammas:
            for a12 in a12s:
                if abs(abs(a12) * g1 * g2 - 1) < 1e-6:
                    continue
                checked += 1
                A = [[0.0, a12], [1.0, 0.0]]
                assert two_gain_feedback(A, g1, g2) == (abs(a12) * g1 * g2 < 1), (g1, g2, a12)
    assert checked >= 1990


@pytest.mark.acceptance(9, "certified (rho, beta) bound holds in simulation")
def test_criterion_9():
    net = siso([0.5, 0.5], ROTATION)
    bound = verify_network(net)
    assert bound is not None
    static = [LtiSystem.static([[0.5]]), LtiSystem.static([[0.5]])]
    rep = empirical_bound_check(net, static, bound, trials=10, T=50)
    assert rep.max_ratio == pytest.approx(0.4 * np.sqrt(1.25), abs=1e-9)
    assert rep.max_ratio <= bound.rho and rep.passed

    systems = [LtiSystem.one_pole(0.35, 0.35), LtiSystem.one_pole(0.35, 0.35)]
    gamma = max(l2_gain(s)[0] for s in systems)
    net = siso([gamma, gamma], ROTATION)
    bound = verify_network(net)
    assert bound is not None
    rep = empirical_bound_check(net, systems, bound, trials=50, T=2000, seed=9)
    assert rep.trials >= 50 and rep.horizon == 2000
    assert rep.violations == 0


@pytest.mark.acceptance(10, "frequency-grid L2 gain of a one-pole system")
def test_criterion_10():
    gamma, _ = l2_gain(LtiSystem([[0.5]], [[0.5]], [[1.0]], [[0.0]]))
    assert abs(gamma - 0.5 / (1 - 0.5)) <= 1e-3
