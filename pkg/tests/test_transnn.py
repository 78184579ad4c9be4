import math

import numpy as np
import pytest

from conftest import binomial_tolerance, seeded_network
from sisnet.exact_chain.states import all_states
from sisnet.exact_chain.transitions import conditional_infection_probs, exact_marginals
from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import dpsi_ds, dpsi_dw, from_info, tlog_sigmoid, to_info
from sisnet.transnn.bounds import check_upper_bound
from sisnet.transnn.dynamics import (
    info_trajectory,
    linear_bound_trajectory,
    linear_upper_bound,
    prob_trajectory,
    step_info,
    step_prob,
)

W_GRID = np.linspace(0.0, 1.0, 11)
X_GRID = np.array([0.0, 1e-9, 0.01, 0.5, 1.0, 3.0, 20.0])


class TestTlogSigmoid:
    def test_zero_input(self):
        np.testing.assert_array_equal(tlog_sigmoid(W_GRID, 0.0), 0.0)

    def test_unit_weight_is_identity(self):
        np.testing.assert_allclose(tlog_sigmoid(1.0, X_GRID), X_GRID, rtol=1e-15)

    def test_hand_value(self):
        assert tlog_sigmoid(0.5, math.log(2.0)) == pytest.approx(-math.log(0.75), abs=1e-12)
        assert tlog_sigmoid(0.5, math.log(2.0)) == pytest.approx(0.287682, abs=1e-6)

    def test_infinite_input(self):
        assert tlog_sigmoid(1.0, np.inf) == np.inf
        assert tlog_sigmoid(0.4, np.inf) == pytest.approx(-math.log(0.6))
        assert tlog_sigmoid(0.0, np.inf) == 0.0

    def test_monotone_and_below_input(self):
        w, x = np.meshgrid(W_GRID, X_GRID, indexing="ij")
        psi = tlog_sigmoid(w, x)
        assert (np.diff(psi, axis=0) >= -1e-15).all()
        assert (np.diff(psi, axis=1) >= -1e-15).all()
        assert (psi <= x + 1e-15).all()

    def test_scalar_in_scalar_out(self):
        assert isinstance(tlog_sigmoid(0.3, 0.2), float)


class TestDerivatives:
    def test_dpsi_ds_values(self):
        np.testing.assert_allclose(dpsi_ds(1.0, X_GRID), 1.0)
        assert dpsi_ds(0.0, 2.0) == 0.0
        assert dpsi_ds(0.5, math.log(2.0)) == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert dpsi_ds(1.0, np.inf) == 0.0
        assert dpsi_ds(0.3, np.inf) == 0.0

    def test_dpsi_ds_finite_difference(self):
        h = 1e-6
        for w in (0.1, 0.5, 0.9):
            for x in (0.2, math.log(2.0), 2.5):
                fd = (tlog_sigmoid(w, x + h) - tlog_sigmoid(w, x - h)) / (2 * h)
                assert dpsi_ds(w, x) == pytest.approx(fd, abs=1e-8)

    def test_dpsi_dw_finite_difference(self):
        h = 1e-6
        for w in (0.1, 0.5, 0.9):
            for x in (0.2, 1.0, 4.0):
                fd = (tlog_sigmoid(w + h, x) - tlog_sigmoid(w - h, x)) / (2 * h)
                assert dpsi_dw(w, x) == pytest.approx(fd, rel=1e-6)

    def test_dpsi_dw_is_finite_at_pole(self):
        assert np.isfinite(dpsi_dw(1.0, np.inf))


class TestInfoTransform:
    def test_values(self):
        assert to_info(0.0) == 0.0
        assert to_info(1.0) == np.inf
        assert to_info(0.5) == pytest.approx(0.693147, abs=1e-6)
        assert from_info(0.0) == 0.0
        assert from_info(np.inf) == 1.0
        assert from_info(math.log(2.0)) == pytest.approx(0.5)

    def test_inverse(self):
        p = np.random.default_rng(0).random(50)
        np.testing.assert_allclose(from_info(to_info(p)), p, atol=1e-15)

    def test_domain(self):
        with pytest.raises(ValueError):
            to_info(1.2)
        with pytest.raises(ValueError):
            from_info(-0.1)


class TestDynamics:
    def test_disease_free_fixed_point(self, complete3):
        assert step_prob(np.zeros(3), complete3, 0).tolist() == [0.0, 0.0, 0.0]
        assert step_info(np.zeros(3), complete3, 0).tolist() == [0.0, 0.0, 0.0]

    def test_single_node(self):
        net = ContactNetwork.static([[0.4]], 2)
        np.testing.assert_allclose(step_prob([1.0], net, 0), [0.4])
        np.testing.assert_allclose(step_info([np.inf], net, 0), [-math.log(0.6)])
        assert step_info([np.inf], net, 0)[0] == pytest.approx(0.5108, abs=1e-4)

    def test_matches_conditional_probability(self):
        w = np.array([[0.6, 0.0, 0.0], [0.0, 0.6, 0.0], [0.5, 0.5, 0.2]])
        net = ContactNetwork.static(w, 1)
        p = step_prob([1.0, 1.0, 0.0], net, 0)
        assert p[2] == pytest.approx(0.75)
        np.testing.assert_allclose(p, conditional_infection_probs([1, 1, 0], net, 0))

    def test_coordinates_commute(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            net = seeded_network(5, 3, seed=seed)
            p = rng.random(5) * 0.95
            for k in range(3):
                np.testing.assert_allclose(
                    to_info(step_prob(p, net, k)), step_info(to_info(p), net, k), rtol=1e-12, atol=1e-12
                )

    def test_infinite_states_propagate(self, chain_network):
        s = info_trajectory(chain_network, [np.inf, 0.0, 0.0])
        p = prob_trajectory(chain_network, [1.0, 0.0, 0.0])
        finite = np.isfinite(s)
        np.testing.assert_allclose(from_info(s[finite]), p[finite], atol=1e-12)

    def test_wrong_length(self, complete3):
        with pytest.raises(ValueError, match="length n=3"):
            step_prob([0.1, 0.2], complete3, 0)


class TestLinearBound:
    def test_zero_start(self, complete3):
        assert not linear_bound_trajectory(complete3, np.zeros(3)).any()

    def test_single_node(self):
        net = ContactNetwork.static([[0.4]], 3)
        assert linear_upper_bound(net, [1.0], 2)[0] == pytest.approx(0.16)
        with pytest.raises(IndexError):
            linear_upper_bound(net, [1.0], 4)

    def test_ordering_on_random_instances(self):
        for seed in range(20):
            net = seeded_network(4, 5, seed=100 + seed)
            p0 = np.zeros(4)
            p0[seed % 4] = 1.0
            p = prob_trajectory(net, p0)
            assert (linear_bound_trajectory(net, p0) >= p - 1e-12).all()
            assert (p >= exact_marginals(net, p0) - 1e-12).all()


class TestCheckUpperBound:
    def test_healthy_start(self, complete3):
        report = check_upper_bound(complete3, [0, 0, 0], 1000, rng=1)
        assert not report.slack.any()
        assert report.ok
        assert report.warnings == []

    def test_one_step_slack_vanishes(self):
        net = seeded_network(3, 2, seed=4)
        trials = 50_000
        report = check_upper_bound(net, [1, 0, 0], trials, rng=4)
        np.testing.assert_allclose(report.p[1], report.exact[1], atol=1e-12)
        assert (np.abs(report.slack[1]) <= binomial_tolerance(report.p[1], trials, comparisons=3)).all()

    @pytest.mark.parametrize("seed", range(20))
    def test_monte_carlo_on_random_instances(self, seed):
        net = seeded_network(4, 6, seed=100 + seed)
        p0 = np.zeros(4)
        p0[seed % 4] = 1.0
        trials = 20_000
        report = check_upper_bound(net, p0, trials, rng=seed)
        # widened for every (k, node) entry across all 20 instances
        tol = binomial_tolerance(report.exact, trials, comparisons=20 * report.p.size)
        assert (report.p_hat <= report.p + tol).all()
        assert report.linear_ordering_ok
        assert report.exact_ok

    @pytest.mark.parametrize("seed", range(20))
    def test_first_step_is_exact_from_every_configuration(self, seed):
        net = seeded_network(4, 6, seed=100 + seed)
        for x in all_states(4).astype(float):
            np.testing.assert_allclose(prob_trajectory(net, x)[1], exact_marginals(net, x)[1], rtol=0, atol=1e-12)

    def test_information_coordinates(self):
        net = seeded_network(3, 4, seed=8)
        p0 = np.array([1.0, 0.0, 0.0])
        trials = 50_000
        report = check_upper_bound(net, p0, trials, rng=8)
        s = info_trajectory(net, to_info(p0))
        np.testing.assert_allclose(from_info(s), report.p, atol=1e-12)
        assert (to_info(report.exact) <= s * (1.0 + 1e-12) + 1e-12).all()

        finite = np.isfinite(s)
        # mean value bound carries the probability tolerance into information coordinates
        tol = binomial_tolerance(report.exact, trials, comparisons=report.p.size)
        tol_s = tol / (1.0 - np.minimum(np.maximum(report.p, report.p_hat) + tol, 1.0 - 1e-12))
        assert (report.info_slack[finite] >= -tol_s[finite]).all()

    def test_info_slack_where_infection_is_certain(self):
        net = ContactNetwork.static([[1.0, 0.0], [0.5, 0.3]], 3)
        report = check_upper_bound(net, [1, 0], 500, rng=3)
        assert np.isinf(to_info(report.p[:, 0])).all()
        assert np.isinf(to_info(report.p_hat[:, 0])).all()
        np.testing.assert_array_equal(report.info_slack[:, 0], 0.0)
        assert np.isfinite(report.to_document()["min_info_slack"])

    @pytest.mark.slow
    def test_seeded_four_node(self):
        net = seeded_network(4, 6, seed=2024)
        report = check_upper_bound(net, [1, 0, 0, 0], 100_000, rng=2024)
        assert report.violations == 0
        assert report.linear_ordering_ok
        assert report.exact_ok

    def test_report_frame(self, chain_network):
        report = check_upper_bound(chain_network, [1, 0, 0], 2000, rng=0)
        frame = report.to_frame()
        assert len(frame) == 4 * 3
        assert {"k", "node", "p", "p_hat", "linear_bound", "slack", "exact"} <= set(frame.columns)
        doc = report.to_document()
        assert doc["trials"] == 2000
        assert doc["exact_ok"] is True
