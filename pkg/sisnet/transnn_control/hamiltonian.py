"""
sisnet/transnn_control/hamiltonian.py
-------------------------------------
Hamiltonian of the TransNN vaccination problem and its switching function.

    H(k) = sum_i [c (1 - e^{-s_i}) + u_i] + sum_i lambda_i(k+1) sum_j Psi(m_ij(u_i), s_j)

with m_ij(u_i) = w_ij (1 + u_i (beta - 1)), which is linear in a relaxed
u_i in [0, 1].  Only row i of the dynamics term depends on u_i, so

    Delta H_i = H(u_i = 1) - H(u_i = 0)
              = 1 - lambda_i(k+1) sum_j log[(1 - w_ij beta + w_ij beta e^{-s_j}) / (1 - w_ij + w_ij e^{-s_j})].

``delta_H_printed`` weights link (i, j) with lambda_j(k+1) instead; it is kept
as a diagnostic and compared against the exact difference.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import dpsi_dw, from_info, tlog_sigmoid

logger = logging.getLogger(__name__)


def _weighted(lam: np.ndarray, terms: np.ndarray) -> np.ndarray:
    """lam * terms with 0 * inf read as 0."""
    with np.errstate(invalid="ignore"):
        return np.where(lam > 0.0, lam * terms, 0.0)


def relaxed_weights(weights: np.ndarray, u: np.ndarray, beta: float) -> np.ndarray:
    return weights * (1.0 + np.asarray(u, dtype=float) * (beta - 1.0))[..., :, None]


def log_ratio(weights: np.ndarray, s: np.ndarray, beta: float) -> np.ndarray:
    """Psi(w_ij, s_j) - Psi(w_ij beta, s_j), elementwise; >= 0 and 0 when beta = 1."""
    w = np.asarray(weights, dtype=float)
    s_b = np.asarray(s, dtype=float)[..., None, :]
    with np.errstate(invalid="ignore"):
        diff = tlog_sigmoid(w, s_b) - tlog_sigmoid(w * beta, s_b)
    return np.where((w == 0.0) | (beta == 1.0), 0.0, diff)


def hamiltonian(
    k: int,
    s: Sequence[float],
    u: Sequence[float],
    lambda_next: Sequence[float],
    net: ContactNetwork,
    params: CostParams,
) -> float:
    """H(k); ``u`` may be relaxed to [0, 1]."""
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lambda_next, dtype=float)
    stage = float(np.sum(params.c * from_info(s) + u))
    m = relaxed_weights(net.weights_at(k), u, params.beta)
    row_sums = np.sum(tlog_sigmoid(m, s[None, :]), axis=1)
    return stage + float(np.sum(_weighted(lam, row_sums)))


def delta_H_all(
    k: int, s: Sequence[float], lambda_next: Sequence[float], net: ContactNetwork, params: CostParams
) -> np.ndarray:
    """Switching function for every node at step k."""
    lam = np.asarray(lambda_next, dtype=float)
    ratio = log_ratio(net.weights_at(k), np.asarray(s, dtype=float), params.beta)
    return 1.0 - _weighted(lam, ratio.sum(axis=1))


def delta_H(
    i: int, k: int, s: Sequence[float], lambda_next: Sequence[float], net: ContactNetwork, params: CostParams
) -> float:
    return float(delta_H_all(k, s, lambda_next, net, params)[i])


def delta_H_printed(
    k: int, s: Sequence[float], lambda_next: Sequence[float], net: ContactNetwork, params: CostParams
) -> np.ndarray:
    """Variant weighting the log-ratio of link (i, j) with lambda_j(k+1)."""
    lam = np.asarray(lambda_next, dtype=float)
    ratio = log_ratio(net.weights_at(k), np.asarray(s, dtype=float), params.beta)
    return 1.0 - np.sum(_weighted(lam[None, :], ratio), axis=1)


def hamiltonian_gradient(
    k: int,
    s: Sequence[float],
    u: Sequence[float],
    lambda_next: Sequence[float],
    net: ContactNetwork,
    params: CostParams,
) -> np.ndarray:
    """dH/du_i at relaxed u: 1 + lambda_i sum_j dPsi/dw(m_ij, s_j) w_ij (beta - 1)."""
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lambda_next, dtype=float)
    w = net.weights_at(k)
    m = relaxed_weights(w, np.asarray(u, dtype=float), params.beta)
    chain = dpsi_dw(m, s[None, :]) * w * (params.beta - 1.0)
    return 1.0 + _weighted(lam, chain.sum(axis=1))
