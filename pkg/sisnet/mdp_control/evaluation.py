"""
sisnet/mdp_control/evaluation.py
--------------------------------
Exact evaluation of feedback policies and open-loop schedules on the chain.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from sisnet.exact_chain.states import all_states, initial_distribution
from sisnet.exact_chain.transitions import exact_marginals, product_rows
from sisnet.mdp_control.bellman import Policy, ValueTable, controlled_weight_stack
from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork

logger = logging.getLogger(__name__)


def evaluate_policy(net: ContactNetwork, params: CostParams, policy: Policy) -> ValueTable:
    """Linear backward recursion V_k(x) = l(x, pi_k(x)) + E[V_{k+1} | x, pi_k(x)]."""
    n, T = net.n, net.horizon
    if policy.horizon != T or policy.n != n:
        raise ValueError(f"policy shape (T={policy.horizon}, n={policy.n}) does not match network (T={T}, n={n})")
    states = all_states(n)
    infected = states.sum(axis=1).astype(float)
    values = np.zeros((T + 1, 2**n))
    for k in range(T - 1, -1, -1):
        u = states[policy.actions[k]].astype(bool)
        m = net.weights[k][None, :, :] * np.where(u, params.beta, 1.0)[:, :, None]
        rho = 1.0 - np.prod(1.0 - m * states[:, None, :].astype(float), axis=2)
        rows = product_rows(rho)
        values[k] = params.c * infected + u.sum(axis=1) + rows @ values[k + 1]
    values.setflags(write=False)
    return ValueTable(values)


def expected_initial_value(values: ValueTable, p0: Sequence[float]) -> float:
    """sum_x Pr(X(0) = x) V_0(x) under independent Bernoulli(p0) initial states."""
    return float(initial_distribution(p0) @ values.values[0])


def evaluate_schedule_exact(
    net: ContactNetwork, params: CostParams, schedule: np.ndarray, p0: Sequence[float]
) -> float:
    """J1 of an open-loop (T, n) schedule, by exact distribution propagation."""
    u = np.asarray(schedule, dtype=float)
    if u.shape != (net.horizon, net.n):
        raise ValueError(f"schedule must have shape (T, n)=({net.horizon}, {net.n}), got {u.shape}")
    marginals = exact_marginals(net, p0, controlled_weight_stack(net, u, params.beta))
    return float(params.c * marginals[:-1].sum() + u.sum())


def policy_to_document(values: ValueTable, policy: Policy) -> dict:
    """JSON mapping keyed "k/state" (state = integer index, node i = bit i)."""
    value_doc = {}
    for k in range(values.values.shape[0]):
        for x in range(values.values.shape[1]):
            value_doc[f"{k}/{x}"] = float(values.values[k, x])
    policy_doc = {}
    for k in range(policy.horizon):
        for x in range(policy.actions.shape[1]):
            policy_doc[f"{k}/{x}"] = int(policy.actions[k, x])
    return {"n": policy.n, "T": policy.horizon, "values": value_doc, "policy": policy_doc}
