import itertools
from statistics import NormalDist

import numpy as np
import pytest

from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork
from sisnet.network.generators import erdos_renyi_network, representative_five_node_scenario


def sigma_multiplier(comparisons: int, alpha: float = 1e-3) -> float:
    """3 for a single comparison, Bonferroni-widened for a grid of them."""
    z = NormalDist().inv_cdf(1.0 - alpha / (2.0 * max(1, comparisons)))
    return max(3.0, z)


def binomial_tolerance(p, trials: int, comparisons: int = 1) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    sigma = np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / trials)
    # floor covers entries whose exact probability is 0 or 1
    return sigma_multiplier(comparisons) * sigma + 1e-12


def seeded_network(n: int, T: int, seed: int, time_varying: bool = True) -> ContactNetwork:
    return erdos_renyi_network(
        n, T, edge_prob=0.6, seed=seed, weight_range=(0.1, 0.7), self_weight_range=(0.2, 0.8), time_varying=time_varying
    )


def exhaustive_open_loop(net: ContactNetwork, params: CostParams, p0: np.ndarray) -> float:
    """Minimum J2 over all 2^(nT) open-loop schedules, evaluated on the TransNN dynamics."""
    n, T = net.n, net.horizon
    schedules = np.array(list(itertools.product((0, 1), repeat=n * T)), dtype=bool).reshape(-1, T, n)
    p = np.repeat(np.asarray(p0, dtype=float)[None, :], schedules.shape[0], axis=0)
    cost = np.zeros(schedules.shape[0])
    for k in range(T):
        u = schedules[:, k, :]
        cost += params.c * p.sum(axis=1) + u.sum(axis=1)
        m = net.weights[k][None, :, :] * np.where(u, params.beta, 1.0)[:, :, None]
        p = 1.0 - np.prod(1.0 - m * p[:, None, :], axis=2)
    return float(cost.min())


@pytest.fixture
def five_node():
    return representative_five_node_scenario()


@pytest.fixture
def chain_network():
    """Directed chain 0 -> 1 -> 2 with self-loops (row = receiver)."""
    w = np.array([[0.5, 0.0, 0.0], [0.6, 0.4, 0.0], [0.0, 0.7, 0.3]])
    return ContactNetwork.static(w, 3)


@pytest.fixture
def complete3():
    w = np.full((3, 3), 0.3)
    np.fill_diagonal(w, 0.5)
    return ContactNetwork.static(w, 2)
