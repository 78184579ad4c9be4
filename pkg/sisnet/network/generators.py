"""
sisnet/network/generators.py
----------------------------
Seeded network builders used by the harness, the benchmark grid and the tests.
"""

from __future__ import annotations

import logging
from typing import Tuple

import networkx as nx
import numpy as np

from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork
from sisnet.network.scenario import Scenario

logger = logging.getLogger(__name__)

# Stand-in for the five-node example network; row = receiver, column = source.
FIVE_NODE_WEIGHTS = (
    (0.60, 0.30, 0.00, 0.00, 0.20),
    (0.30, 0.50, 0.40, 0.00, 0.00),
    (0.00, 0.40, 0.70, 0.30, 0.25),
    (0.00, 0.00, 0.30, 0.60, 0.50),
    (0.20, 0.00, 0.25, 0.50, 0.40),
)
FIVE_NODE_INITIAL = (1.0, 0.0, 0.0, 0.0, 0.0)
FIVE_NODE_SEED = 2023


def erdos_renyi_network(
    n: int,
    T: int,
    edge_prob: float = 0.5,
    seed: int = 0,
    weight_range: Tuple[float, float] = (0.1, 0.6),
    self_weight_range: Tuple[float, float] = (0.2, 0.7),
    time_varying: bool = False,
) -> ContactNetwork:
    """Directed G(n, p) support with uniform heterogeneous weights.

    An edge j -> i in the graph becomes w_ij (j can infect i).  With
    ``time_varying`` the weights are redrawn for every step on the same edge
    set.
    """
    if n < 1 or T < 1:
        raise ValueError(f"n and T must be >= 1, got n={n}, T={T}")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    for name, (lo, hi) in (("weight_range", weight_range), ("self_weight_range", self_weight_range)):
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got {(lo, hi)}")

    graph_ss, weight_ss = np.random.SeedSequence(seed).spawn(2)
    graph = nx.erdos_renyi_graph(n, edge_prob, seed=int(graph_ss.generate_state(1)[0]), directed=True)
    rng = np.random.default_rng(weight_ss)

    support = np.zeros((n, n), dtype=bool)
    for source, target in graph.edges():
        support[target, source] = True
    np.fill_diagonal(support, False)

    steps = T if time_varying else 1
    weights = np.zeros((steps, n, n))
    for k in range(steps):
        off = rng.uniform(weight_range[0], weight_range[1], size=(n, n))
        weights[k] = np.where(support, off, 0.0)
        weights[k][np.diag_indices(n)] = rng.uniform(self_weight_range[0], self_weight_range[1], size=n)
    if not time_varying:
        weights = np.repeat(weights, T, axis=0)

    logger.debug(f"Generated G({n}, {edge_prob}) network with {int(support.sum())} links, T={T}, seed={seed}")
    return ContactNetwork(weights)


def representative_five_node_scenario(
    beta: float = 0.3, T: int = 10, c: float = 100.0, seed: int = FIVE_NODE_SEED
) -> Scenario:
    """Bundled five-node ring-with-chord network, node 0 initially infected."""
    network = ContactNetwork.static(FIVE_NODE_WEIGHTS, T)
    initial = np.array(FIVE_NODE_INITIAL)
    initial.setflags(write=False)
    return Scenario(
        scenario_id="five_node",
        network=network,
        params=CostParams(c=c, beta=beta, T=T),
        initial=initial,
        seed=seed,
    )


def random_scenario(n: int, T: int, seed: int, beta: float = 0.3, c: float = 100.0, **network_kwargs) -> Scenario:
    """Erdős–Rényi scenario with node 0 infected, used by the benchmark grid."""
    network = erdos_renyi_network(n, T, seed=seed, **network_kwargs)
    initial = np.zeros(n)
    initial[0] = 1.0
    initial.setflags(write=False)
    return Scenario(
        scenario_id=f"er_n{n}_T{T}_s{seed}",
        network=network,
        params=CostParams(c=c, beta=beta, T=T),
        initial=initial,
        seed=seed,
    )
