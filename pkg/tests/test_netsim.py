import numpy as np
import pytest
from scipy import signal

from netgain.errors import (
    ConfigurationError,
    DimensionError,
    NotWellPosedError,
    UnstableSubsystemError,
)
from netgain.netsim import (
    LtiSystem,
    SignalLog,
    empirical_bound_check,
    free_response_bias,
    l2_gain,
    simulate,
)
from netgain.smallgain import NetworkSpec, SubsystemGain, verify_network

ROTATION = [[0.0, -1.0], [1.0, 0.0]]


def net_of(gammas, A, betas=None):
    betas = betas if betas is not None else [0.0] * len(gammas)
    return NetworkSpec([SubsystemGain(g, b) for g, b in zip(gammas, betas)], A)


class TestLtiSystem:
    def test_shapes(self):
        with pytest.raises(DimensionError):
            LtiSystem([[0.5]], [[1.0, 1.0]], [[1.0]], [[0.0]])

    def test_static(self):
        s = LtiSystem.static([[0.3]])
        assert s.n_states == 0 and s.m == 1


class TestL2Gain:
    def test_one_pole(self):
        g, b = l2_gain(LtiSystem([[0.5]], [[0.5]], [[1.0]], [[0.0]]))
        assert g == pytest.approx(1.0, abs=1e-3) and b == 0.0

    def test_static(self):
        assert l2_gain(LtiSystem.static([[0.7]]))[0] == pytest.approx(0.7)

    def test_delay(self):
        assert l2_gain(LtiSystem([[0.0]], [[1.0]], [[1.0]], [[0.0]]))[0] == pytest.approx(1.0)

    def test_unstable(self):
        with pytest.raises(UnstableSubsystemError):
            l2_gain(LtiSystem([[1.1]], [[1.0]], [[1.0]], [[0.0]]))

    def test_small_grid(self):
        with pytest.raises(ValueError):
            l2_gain(LtiSystem.static([[1.0]]), grid_points=100)

    def test_resonant_peak_against_scipy(self):
        # lightly damped pair; the peak lies between grid points
        r, th = 0.98, 0.7
        F = np.array([[2 * r * np.cos(th), -r * r], [1.0, 0.0]])
        sys = LtiSystem(F, [[1.0], [0.0]], [[0.0, 1.0]], [[0.0]])
        w, h = signal.freqz([0.0, 0.0, 1.0], [1.0, -2 * r * np.cos(th), r * r], worN=2 ** 18)
        assert l2_gain(sys)[0] == pytest.approx(np.abs(h).max(), rel=1e-6)

    def test_mimo_static(self, rng):
        J = rng.normal(size=(3, 3))
        assert l2_gain(LtiSystem.static(J))[0] == pytest.approx(np.linalg.norm(J, 2))


class TestSimulate:
    def test_static_closed_form(self):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.static([[0.5]]), LtiSystem.static([[0.5]])]
        v = np.zeros((5, 2))
        v[0, 0] = 1.0
        log = simulate(net, systems, v)
        G = np.diag([0.5, 0.5])
        expected = np.linalg.solve(np.eye(2) - G @ np.array(ROTATION), G)
        np.testing.assert_allclose(log.y, v @ expected.T, atol=1e-10)
        assert log.norm_y[-1] / log.norm_v[-1] == pytest.approx(0.4 * np.sqrt(1.25))

    def test_static_random_inputs(self, rng):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.static([[0.5]]), LtiSystem.static([[-0.3]])]
        v = rng.normal(size=(50, 2))
        log = simulate(net, systems, v)
        J = np.diag([0.5, -0.3])
        M = np.linalg.solve(np.eye(2) - J @ np.array(ROTATION), J)
        np.testing.assert_allclose(log.y, v @ M.T, atol=1e-10)

    def test_decoupled(self, rng):
        systems = [LtiSystem.one_pole(0.5, 0.5), LtiSystem.one_pole(-0.3, 1.0)]
        v = rng.normal(size=(40, 2))
        log = simulate(net_of([1.0, 1.0], np.zeros((2, 2))), systems, v)
        for i, (a, b) in enumerate([(0.5, 0.5), (-0.3, 1.0)]):
            ref = signal.lfilter([0.0, b], [1.0, -a], v[:, i])
            np.testing.assert_allclose(log.y[:, i], ref, atol=1e-12)

    def test_not_well_posed(self):
        systems = [LtiSystem.static([[1.0]]), LtiSystem.static([[1.0]])]
        with pytest.raises(NotWellPosedError):
            simulate(net_of([1.0, 1.0], [[0.0, 1.0], [1.0, 0.0]]), systems, np.zeros((3, 2)))

    def test_linearity(self, rng):
        net = net_of([0.6, 0.6], ROTATION)
        systems = [LtiSystem.one_pole(0.35, 0.35), LtiSystem([[0.2]], [[0.5]], [[0.8]], [[0.1]])]
        v = rng.normal(size=(100, 2))
        a = simulate(net, systems, v)
        b = simulate(net, systems, 3.5 * v)
        np.testing.assert_allclose(b.y, 3.5 * a.y, rtol=1e-9, atol=1e-12)

    def test_static_linearity_exact(self, rng):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.static([[0.5]]), LtiSystem.static([[0.5]])]
        v = rng.normal(size=(20, 2))
        a, b = simulate(net, systems, v), simulate(net, systems, 2.0 * v)
        np.testing.assert_array_equal(b.y, 2.0 * a.y)

    def test_norms_monotone(self, rng):
        net = net_of([0.6, 0.6], ROTATION)
        systems = [LtiSystem.one_pole(0.35, 0.35)] * 2
        log = simulate(net, systems, rng.uniform(-1, 1, (200, 2)))
        assert (np.diff(log.norm_v) >= 0).all() and (np.diff(log.norm_y) >= 0).all()
        assert log.T == 200

    def test_scalar_input(self):
        log = simulate(net_of([0.5], [[0.0]]), [LtiSystem.static([[0.5]])], np.ones(4))
        np.testing.assert_allclose(log.y[:, 0], 0.5)

    def test_input_shape(self):
        with pytest.raises(DimensionError):
            simulate(net_of([0.5, 0.5], ROTATION), [LtiSystem.static([[0.5]])] * 2, np.ones((4, 3)))

    def test_realization_count(self):
        with pytest.raises(DimensionError):
            simulate(net_of([0.5, 0.5], ROTATION), [LtiSystem.static([[0.5]])], np.ones((4, 2)))

    def test_log_read_only(self):
        log = SignalLog(np.ones((3, 1)), np.ones((3, 1)))
        with pytest.raises(ValueError):
            log.y[0, 0] = 2.0

    def test_csv(self):
        log = simulate(net_of([0.5], [[0.0]]), [LtiSystem.static([[0.5]])], np.ones((3, 1)))
        lines = log.to_csv().splitlines()
        assert lines[0] == "k,v_1,y_1,norm_v,norm_y"
        assert lines[1] == "0,1.0,0.5,1.0,0.5"
        assert len(lines) == 4


class TestFreeResponse:
    def test_scalar(self):
        # sum_k a^{2k} = 1 / (1 - a^2)
        sys = LtiSystem.one_pole(0.6, 1.0)
        assert free_response_bias(sys, [2.0]) == pytest.approx(2.0 / np.sqrt(1 - 0.36))

    def test_bounds_free_response(self, rng):
        F = rng.normal(size=(3, 3))
        F *= 0.8 / max(abs(np.linalg.eigvals(F)))
        sys = LtiSystem(F, rng.normal(size=(3, 1)), rng.normal(size=(1, 3)), [[0.0]])
        for _ in range(10):
            x0 = rng.normal(size=3)
            log = simulate(net_of([10.0], [[0.0]]), [sys], np.zeros((400, 1)), x0=x0)
            assert log.norm_y[-1] <= free_response_bias(sys, x0) * (1 + 1e-9)

    def test_static(self):
        assert free_response_bias(LtiSystem.static([[1.0]]), []) == 0.0


class TestBoundCheck:
    def test_static_network(self):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.static([[0.5]]), LtiSystem.static([[0.5]])]
        bound = verify_network(net)
        rep = empirical_bound_check(net, systems, bound, trials=10, T=100)
        assert rep.passed and rep.violations == 0
        assert rep.max_ratio == pytest.approx(0.4472136, abs=1e-6)
        assert rep.max_ratio <= bound.rho

    def test_one_pole_network(self):
        gamma = 0.35 / 0.65
        net = net_of([gamma, gamma], ROTATION)
        systems = [LtiSystem.one_pole(0.35, 0.35)] * 2
        bound = verify_network(net)
        rep = empirical_bound_check(net, systems, bound, trials=10, T=500)
        assert rep.passed and rep.trials == 12
        np.testing.assert_allclose(rep.realized_gains, gamma, rtol=1e-6)

    def test_decoupled(self):
        net = net_of([0.5, 0.8], np.zeros((2, 2)))
        systems = [LtiSystem.one_pole(0.5, 0.25), LtiSystem.one_pole(-0.2, 0.64)]
        rep = empirical_bound_check(net, systems, verify_network(net), trials=10, T=300)
        assert rep.passed and rep.max_ratio <= 0.8 + 1e-9

    def test_understated_gain(self):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.static([[0.6]]), LtiSystem.static([[0.5]])]
        with pytest.raises(ConfigurationError):
            empirical_bound_check(net, systems, verify_network(net), trials=1, T=10)

    def test_deterministic(self):
        net = net_of([0.5, 0.5], ROTATION)
        systems = [LtiSystem.one_pole(0.3, 0.3)] * 2
        bound = verify_network(net)
        a = empirical_bound_check(net, systems, bound, trials=5, T=100, seed=7)
        b = empirical_bound_check(net, systems, bound, trials=5, T=100, seed=7)
        assert a == b
