"""
sisnet/transnn/dynamics.py
--------------------------
TransNN mean-field dynamics in probability and information coordinates, and
the linear (Hadamard-product) upper bound.

    1 - p_i(k+1) = prod_j (1 - w_ij^k p_j(k))
    s_i(k+1)     = sum_j Psi(w_ij^k, s_j(k))

The two recursions commute with s = -log(1 - p).  ``weights`` arguments
replace the network's Omega_k (used for controlled weights m_ij^k).
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import tlog_sigmoid

logger = logging.getLogger(__name__)


def _check_vector(v: Sequence[float], n: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must have length n={n}, got shape {arr.shape}")
    return arr


def step_prob(p: Sequence[float], net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    w = net.weights_at(k) if weights is None else weights
    p = _check_vector(p, net.n, "p")
    return 1.0 - np.prod(1.0 - w * p[None, :], axis=1)


def step_info(s: Sequence[float], net: ContactNetwork, k: int, weights: Optional[np.ndarray] = None) -> np.ndarray:
    w = net.weights_at(k) if weights is None else weights
    s = _check_vector(s, net.n, "s")
    return np.sum(tlog_sigmoid(w, s[None, :]), axis=1)


def prob_trajectory(net: ContactNetwork, p0: Sequence[float], weights: Optional[np.ndarray] = None) -> np.ndarray:
    """(T+1, n) iterates of step_prob; ``weights`` is an optional (T, n, n) stack."""
    out = np.empty((net.horizon + 1, net.n))
    out[0] = _check_vector(p0, net.n, "p0")
    for k in range(net.horizon):
        out[k + 1] = step_prob(out[k], net, k, None if weights is None else weights[k])
    return out


def info_trajectory(net: ContactNetwork, s0: Sequence[float], weights: Optional[np.ndarray] = None) -> np.ndarray:
    """(T+1, n) iterates of step_info; +inf entries propagate by continuity."""
    out = np.empty((net.horizon + 1, net.n))
    out[0] = _check_vector(s0, net.n, "s0")
    for k in range(net.horizon):
        out[k + 1] = step_info(out[k], net, k, None if weights is None else weights[k])
    return out


def linear_bound_trajectory(net: ContactNetwork, mu0: Sequence[float]) -> np.ndarray:
    """(T+1, n) bounds (A_{k-1} . Omega_{k-1}) ... (A_0 . Omega_0) mu(0); row 0 is mu(0).

    Values are not clipped at 1.
    """
    out = np.empty((net.horizon + 1, net.n))
    out[0] = _check_vector(mu0, net.n, "mu0")
    for k in range(net.horizon):
        factor = net.adjacency[k] * net.weights[k]
        out[k + 1] = factor @ out[k]
    return out


def linear_upper_bound(net: ContactNetwork, mu0: Sequence[float], k: int) -> np.ndarray:
    if not 0 <= k <= net.horizon:
        raise IndexError(f"time index {k} out of range for T={net.horizon}")
    return linear_bound_trajectory(net, mu0)[k]
