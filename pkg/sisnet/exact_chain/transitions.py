"""
sisnet/exact_chain/transitions.py
---------------------------------
Closed-form transition law of the exact SIS chain.

Given X(k) = x, node i is infected at k+1 with probability

    rho_i = 1 - prod_j (1 - w_ij^k x_j)

independently across nodes, so Pr(X(k+1) = q | x) = prod_i [q_i rho_i + (1 - q_i)(1 - rho_i)].
The same formula, read with X(k-1) as the conditioning state, is the
conditional infection probability of the mean-field derivation.
"""

from __future__ import annotations

import logging
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from sisnet.exact_chain.states import all_states, as_bits, check_state_space, initial_distribution
from sisnet.network.contact_network import ContactNetwork

logger = logging.getLogger(__name__)

# Rows of the transition matrix assembled at once
ROW_BLOCK = 1024


def _weights(net: ContactNetwork, k: int, weights: Optional[np.ndarray]) -> np.ndarray:
    return net.weights_at(k) if weights is None else np.asarray(weights, dtype=float)


def infection_probs(states: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """rho for a batch of configurations: (B, n) bits and an (n, n) weight matrix -> (B, n)."""
    x = np.asarray(states, dtype=float)
    return 1.0 - np.prod(1.0 - weights[None, :, :] * x[:, None, :], axis=2)


def conditional_infection_probs(
    x: Sequence[int], net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None
) -> np.ndarray:
    """rho(k+1) given X(k) = x.  ``weights`` replaces Omega_k (e.g. controlled weights)."""
    bits = as_bits(x)
    return infection_probs(bits[None, :], _weights(net, k, weights))[0]


def outcome_probability(rho: np.ndarray, q: Sequence[int]) -> float:
    q_bits = as_bits(q).astype(bool)
    return float(np.prod(np.where(q_bits, rho, 1.0 - rho)))


def transition_probability(
    x: Sequence[int], q: Sequence[int], net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None
) -> float:
    rho = conditional_infection_probs(x, net, k, weights)
    return outcome_probability(rho, q)


def product_rows(rho: np.ndarray) -> np.ndarray:
    """Expand per-node probabilities (B, n) into full outcome rows (B, 2^n).

    Column index follows the bit convention: node i is bit i.
    """
    rho = np.atleast_2d(rho)
    rows = np.ones((rho.shape[0], 1))
    for i in range(rho.shape[1]):
        pair = np.stack([1.0 - rho[:, i], rho[:, i]], axis=1)
        rows = (pair[:, :, None] * rows[:, None, :]).reshape(rho.shape[0], -1)
    return rows


def iter_transition_blocks(
    net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None, block: int = ROW_BLOCK
) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield (row slice, rows) pieces of the 2^n x 2^n matrix at step k."""
    check_state_space(net.n, what="transition matrix")
    w = _weights(net, k, weights)
    states = all_states(net.n)
    for start in range(0, states.shape[0], block):
        stop = min(start + block, states.shape[0])
        rho = infection_probs(states[start:stop], w)
        yield slice(start, stop), product_rows(rho)


def transition_matrix(net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Row-stochastic matrix P[x, q] = Pr(X(k+1)=q | X(k)=x); read-only."""
    size = 2**net.n
    matrix = np.empty((size, size))
    for rows, block in iter_transition_blocks(net, k, weights):
        matrix[rows] = block
    matrix.setflags(write=False)
    return matrix


def propagate_distribution(
    net: ContactNetwork, p0: Sequence[float], weights: Optional[np.ndarray] = None
) -> np.ndarray:
    """(T+1, 2^n) exact configuration distributions from product-Bernoulli p0.

    ``weights`` is an optional (T, n, n) stack replacing the network weights.
    """
    check_state_space(net.n, what="distribution propagation")
    dist = np.zeros((net.horizon + 1, 2**net.n))
    dist[0] = initial_distribution(p0)
    for k in range(net.horizon):
        w_k = None if weights is None else weights[k]
        nxt = np.zeros(2**net.n)
        for rows, block in iter_transition_blocks(net, k, w_k):
            nxt += dist[k, rows] @ block
        dist[k + 1] = nxt
    return dist


def exact_marginals(net: ContactNetwork, p0: Sequence[float], weights: Optional[np.ndarray] = None) -> np.ndarray:
    """(T+1, n) exact Pr(X_i(k) = 1)."""
    dist = propagate_distribution(net, p0, weights)
    return dist @ all_states(net.n).astype(float)
