import numpy as np
import pytest

from conftest import binomial_tolerance, seeded_network
from sisnet import settings
from sisnet.errors import StateSpaceTooLarge
from sisnet.exact_chain.sampling import (
    block_size,
    empirical_transition_row,
    monte_carlo_marginals,
    plan_blocks,
    sample_trajectories,
    sample_transmissions,
    step_state,
)
from sisnet.exact_chain.states import (
    all_states,
    decode_state,
    encode_state,
    initial_distribution,
)
from sisnet.exact_chain.transitions import (
    conditional_infection_probs,
    exact_marginals,
    propagate_distribution,
    transition_matrix,
    transition_probability,
)
from sisnet.network.contact_network import ContactNetwork


@pytest.fixture
def two_node():
    # w_11 = 0.4, w_21 = 0.5, w_22 = 0.3
    return ContactNetwork.static([[0.4, 0.0], [0.5, 0.3]], 2)


@pytest.fixture
def two_infectors():
    w = np.array([[0.6, 0.0, 0.0], [0.0, 0.6, 0.0], [0.5, 0.5, 0.2]])
    return ContactNetwork.static(w, 1)


class TestStates:
    def test_bit_order(self):
        assert encode_state([1, 0, 0]) == 1
        assert encode_state([0, 0, 1]) == 4
        assert encode_state([1, 1, 1]) == 7
        assert decode_state(6, 3).tolist() == [0, 1, 1]

    def test_decode_inverts_encode(self):
        for idx in range(16):
            assert encode_state(decode_state(idx, 4)) == idx

    def test_all_states_rows(self):
        table = all_states(3)
        assert table.shape == (8, 3)
        for r in range(8):
            assert table[r].tolist() == decode_state(r, 3).tolist()

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            encode_state([0, 2])
        with pytest.raises(ValueError):
            decode_state(4, 2)

    def test_initial_distribution(self):
        dist = initial_distribution([0.5, 1.0])
        np.testing.assert_allclose(dist, [0.0, 0.0, 0.5, 0.5])
        assert dist.sum() == pytest.approx(1.0)


class TestSampling:
    def test_zero_weights_give_empty_draw(self):
        net = ContactNetwork.static(np.zeros((3, 3)), 1)
        draw = sample_transmissions(net, 0, np.random.default_rng(0))
        assert not draw.any()

    def test_certain_links_give_adjacency(self, chain_network):
        net = ContactNetwork.static(chain_network.adjacency[0].astype(float), 1)
        draw = sample_transmissions(net, 0, np.random.default_rng(0))
        np.testing.assert_array_equal(draw, net.adjacency[0].astype(np.uint8))

    def test_self_loop_draw_frequency(self):
        net = ContactNetwork.static([[0.5]], 1)
        rng = np.random.default_rng(42)
        draws = np.array([sample_transmissions(net, 0, rng)[0, 0] for _ in range(100_000)])
        assert abs(draws.mean() - 0.5) <= binomial_tolerance(0.5, draws.size)

    def test_healthy_state_is_absorbing(self, chain_network):
        draw = np.ones((3, 3), dtype=np.uint8)
        assert step_state([0, 0, 0], draw, chain_network, 0).tolist() == [0, 0, 0]

    def test_forced_transmission(self, two_node):
        draw = np.array([[0, 0], [1, 0]], dtype=np.uint8)
        assert step_state([1, 0], draw, two_node, 0).tolist() == [0, 1]

    def test_chain_step(self, chain_network):
        draw = np.zeros((3, 3), dtype=np.uint8)
        draw[1, 0] = 1
        assert step_state([1, 0, 0], draw, chain_network, 0).tolist() == [0, 1, 0]

    def test_block_plan_is_fixed(self, monkeypatch):
        monkeypatch.setattr(settings, "TRIAL_BLOCK", 300)
        blocks = plan_blocks(1000, 3, seed=5)
        assert [size for size, _ in blocks] == [300, 300, 300, 100]
        assert block_size(3) == 300

    def test_trials_must_be_positive(self, chain_network):
        with pytest.raises(ValueError):
            monte_carlo_marginals(chain_network, [1, 0, 0], 0)


class TestConditionalProbabilities:
    def test_healthy_state(self, two_node):
        assert conditional_infection_probs([0, 0], two_node, 0).tolist() == [0.0, 0.0]

    def test_single_factor(self, two_node):
        np.testing.assert_allclose(conditional_infection_probs([1, 0], two_node, 0), [0.4, 0.5])

    def test_two_factor_product(self, two_infectors):
        rho = conditional_infection_probs([1, 1, 0], two_infectors, 0)
        assert rho[2] == pytest.approx(0.75)

    def test_transition_probabilities(self, two_node):
        assert transition_probability([0, 0], [0, 0], two_node, 0) == 1.0
        assert transition_probability([0, 0], [1, 0], two_node, 0) == 0.0
        assert transition_probability([1, 0], [0, 0], two_node, 0) == pytest.approx(0.3)


class TestTransitionMatrix:
    def test_single_node(self):
        net = ContactNetwork.static([[0.4]], 1)
        np.testing.assert_allclose(transition_matrix(net, 0), [[1.0, 0.0], [0.6, 0.4]])

    def test_rows_are_distributions(self):
        net = seeded_network(4, 2, seed=3)
        for k in range(2):
            matrix = transition_matrix(net, k)
            assert (matrix >= 0.0).all()
            np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
            assert matrix[0, 0] == 1.0

    def test_matches_pointwise_probability(self, chain_network):
        matrix = transition_matrix(chain_network, 1)
        states = all_states(3)
        for x in range(8):
            for q in range(8):
                expected = transition_probability(states[x], states[q], chain_network, 1)
                assert matrix[x, q] == pytest.approx(expected, abs=1e-15)

    def test_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "CHAIN_NODE_CAP", 3)
        with pytest.raises(StateSpaceTooLarge, match="n=4"):
            transition_matrix(seeded_network(4, 1, seed=0), 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_sampled_transitions(self, n):
        net = seeded_network(n, 1, seed=20 + n)
        matrix = transition_matrix(net, 0)
        samples = 100_000
        size = 2**n
        for x in (1, size - 1, size // 2 + 1):
            row = empirical_transition_row(net, 0, decode_state(x % size, n), samples, rng=x)
            tol = binomial_tolerance(matrix[x % size], samples, comparisons=3 * size)
            assert (np.abs(row - matrix[x % size]) <= tol).all()


class TestMarginals:
    def test_healthy_initial(self, chain_network):
        freq = monte_carlo_marginals(chain_network, [0, 0, 0], 1000, rng=1)
        assert freq.shape == (4, 3)
        assert not freq.any()

    def test_certain_links_are_deterministic(self, chain_network):
        net = ContactNetwork.static(chain_network.adjacency[0].astype(float), 3)
        freq = monte_carlo_marginals(net, [1, 0, 0], 500, rng=2)
        x = np.array([1, 0, 0])
        draw = net.adjacency[0].astype(np.uint8)
        expected = [x]
        for k in range(3):
            x = step_state(x, draw, net, k)
            expected.append(x)
        np.testing.assert_array_equal(freq, np.array(expected, dtype=float))

    @pytest.mark.slow
    def test_one_step_exactness(self):
        net = seeded_network(3, 3, seed=8)
        trials = 100_000
        freq = monte_carlo_marginals(net, [1, 0, 1], trials, rng=8)
        rho = conditional_infection_probs([1, 0, 1], net, 0)
        assert (np.abs(freq[1] - rho) <= binomial_tolerance(rho, trials, comparisons=3)).all()

    @pytest.mark.slow
    def test_trajectories_follow_exact_marginals(self):
        net = seeded_network(3, 3, seed=13)
        p0 = [0.7, 0.2, 0.0]
        trials = 60_000
        paths = sample_trajectories(net, p0, trials, rng=13)
        assert paths.shape == (trials, 4, 3)
        exact = exact_marginals(net, p0)
        tol = binomial_tolerance(exact, trials, comparisons=exact.size)
        assert (np.abs(paths.mean(axis=0) - exact) <= tol).all()

    def test_identical_across_worker_counts(self, monkeypatch):
        monkeypatch.setattr(settings, "TRIAL_BLOCK", 500)
        net = seeded_network(3, 4, seed=6)
        serial = monte_carlo_marginals(net, [1, 0, 0], 2000, rng=99, workers=1)
        pooled = monte_carlo_marginals(net, [1, 0, 0], 2000, rng=99, workers=2)
        np.testing.assert_array_equal(serial, pooled)

    def test_same_seed_same_result(self, chain_network):
        a = monte_carlo_marginals(chain_network, [1, 0, 0], 3000, rng=4)
        b = monte_carlo_marginals(chain_network, [1, 0, 0], 3000, rng=4)
        np.testing.assert_array_equal(a, b)

    def test_exact_marginals_start_from_initial(self, chain_network):
        exact = exact_marginals(chain_network, [1.0, 0.0, 0.0])
        np.testing.assert_allclose(exact[0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(exact[1], [0.5, 0.6, 0.0])


class TestPropagateDistribution:
    def test_starts_from_product_bernoulli(self, two_node):
        dist = propagate_distribution(two_node, [0.5, 1.0])
        assert dist.shape == (3, 4)
        np.testing.assert_allclose(dist[0], initial_distribution([0.5, 1.0]))
        np.testing.assert_allclose(dist.sum(axis=1), 1.0)

    def test_marginals_agree(self, chain_network):
        dist = propagate_distribution(chain_network, [0.7, 0.2, 0.0])
        states = all_states(3)
        np.testing.assert_allclose(dist @ states, exact_marginals(chain_network, [0.7, 0.2, 0.0]), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_configuration_frequencies(self, n):
        net = seeded_network(n, 4, seed=40 + n)
        p0 = np.linspace(0.2, 0.7, n)
        trials = 40_000
        paths = sample_trajectories(net, p0, trials, rng=40 + n)
        dist = propagate_distribution(net, p0)
        codes = paths.astype(np.int64) @ np.left_shift(1, np.arange(n, dtype=np.int64))
        tol = binomial_tolerance(dist, trials, comparisons=dist.size)
        for k in range(net.horizon + 1):
            freq = np.bincount(codes[:, k], minlength=2**n) / trials
            assert (np.abs(freq - dist[k]) <= tol[k]).all(), k
