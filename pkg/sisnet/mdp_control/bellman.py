"""
sisnet/mdp_control/bellman.py
-----------------------------
Exact finite-horizon vaccination MDP on the 2^n-state chain.

Vaccinating node i scales its whole incoming row: m_ij^k = w_ij^k * (beta if
u_i else 1).  Stage cost l(x, u) = c * |x| + |u|.  Backward induction

    V_T = 0
    V_k(x) = min_u [ l(x, u) + sum_q Pr(q | x, u) V_{k+1}(q) ]

with Pr(. | x, u) built on the fly from the product formula for every (x, u)
pair; nothing of size 2^n x 2^n x 2^n is materialized.  Ties go to the lowest
action index.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Optional, Sequence, Tuple

import numpy as np

from sisnet import settings
from sisnet.errors import StateSpaceTooLarge
from sisnet.exact_chain.states import all_states, as_bits, decode_state, encode_state
from sisnet.exact_chain.transitions import infection_probs, outcome_probability, product_rows
from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork

logger = logging.getLogger(__name__)

# Relative tolerance under which two action values count as tied
TIE_TOLERANCE = 1e-12


# --- Controlled transmission model ---

def controlled_prob(w, u_i, beta: float):
    """m = u * w * beta + (1 - u) * w."""
    w = np.asarray(w, dtype=float)
    out = np.where(np.asarray(u_i, dtype=bool), w * beta, w)
    return out.item() if out.ndim == 0 else out


def controlled_weights(net: ContactNetwork, k: int, u: Sequence[int], beta: float) -> np.ndarray:
    """Matrix of m_ij^k(u_i); row i is scaled when node i is vaccinated."""
    u_bits = as_bits(u).astype(bool)
    return net.weights_at(k) * np.where(u_bits, beta, 1.0)[:, None]


def controlled_weight_stack(net: ContactNetwork, schedule: np.ndarray, beta: float) -> np.ndarray:
    """(T, n, n) controlled weights for an open-loop (T, n) schedule."""
    u = np.asarray(schedule, dtype=bool)
    return net.weights * np.where(u, beta, 1.0)[:, :, None]


def stage_cost(x: Sequence[int], u: Sequence[int], c: float) -> float:
    return float(c * as_bits(x).sum() + as_bits(u).sum())


def controlled_transition_probability(
    x: Sequence[int], q: Sequence[int], u: Sequence[int], net: ContactNetwork, k: int, params: CostParams
) -> float:
    m = controlled_weights(net, k, u, params.beta)
    rho = infection_probs(as_bits(x)[None, :], m)[0]
    return outcome_probability(rho, q)


def controlled_transition_row(
    x: Sequence[int], u: Sequence[int], net: ContactNetwork, k: int, params: CostParams
) -> np.ndarray:
    """Pr(. | x, u) over all 2^n next configurations."""
    m = controlled_weights(net, k, u, params.beta)
    rho = infection_probs(as_bits(x)[None, :], m)
    return product_rows(rho)[0]


# --- Tables ---

@dataclass(frozen=True)
class ValueTable:
    """V[k, state index] for k = 0..T; V[T] = 0."""

    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def value(self, k: int, x: Sequence[int]) -> float:
        return float(self.values[k, encode_state(x)])


@dataclass(frozen=True)
class Policy:
    """Minimizing action index per (k, state index), same bit convention as states."""

    actions: np.ndarray
    n: int

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    def action(self, k: int, x: Sequence[int]) -> np.ndarray:
        return decode_state(int(self.actions[k, encode_state(x)]), self.n)

    def action_bits(self) -> np.ndarray:
        """(T, 2^n, n) table of action bits."""
        return all_states(self.n)[self.actions]


# --- Backward induction ---

def _stage_factors(weights_k: np.ndarray, beta: float, n: int) -> np.ndarray:
    """(2^n, n, n) controlled weight matrices for every action index."""
    u = all_states(n).astype(bool)
    return weights_k[None, :, :] * np.where(u, beta, 1.0)[:, :, None]


def _backup_chunk(task) -> Tuple[np.ndarray, np.ndarray]:
    """Minimize over actions for a chunk of state indices at one stage."""
    factors, c, v_next, state_idx, n = task
    states = all_states(n)
    n_actions = factors.shape[0]
    action_cost = states.sum(axis=1).astype(float)
    best_v = np.empty(len(state_idx))
    best_u = np.empty(len(state_idx), dtype=np.int64)
    for pos, x_idx in enumerate(state_idx):
        x = states[x_idx]
        infected_cost = c * float(x.sum())
        q_values = np.empty(n_actions)
        for a in range(n_actions):
            rho = 1.0 - np.prod(1.0 - factors[a] * x[None, :], axis=1)
            row = product_rows(rho[None, :])[0]
            q_values[a] = infected_cost + action_cost[a] + row @ v_next
        q_min = q_values.min()
        best = int(np.flatnonzero(q_values <= q_min + TIE_TOLERANCE * max(1.0, abs(q_min)))[0])
        best_u[pos] = best
        best_v[pos] = q_values[best]
    return best_v, best_u


def solve_bellman(
    net: ContactNetwork,
    params: CostParams,
    workers: Optional[int] = None,
    cap: Optional[int] = None,
) -> Tuple[ValueTable, Policy]:
    """Backward dynamic programming over all states and actions.

    With workers > 1 the states of each stage are split into chunks over a
    process pool; every stage waits for all chunks before the next one starts.
    """
    cap = settings.MDP_NODE_CAP if cap is None else cap
    if net.n > cap:
        raise StateSpaceTooLarge(net.n, cap, "MDP")
    if params.T != net.horizon:
        raise ValueError(f"CostParams.T={params.T} does not match network horizon {net.horizon}")

    n, T = net.n, net.horizon
    size = 2**n
    workers = settings.WORKERS if workers is None else workers
    values = np.zeros((T + 1, size))
    actions = np.zeros((T, size), dtype=np.int64)
    chunks = np.array_split(np.arange(size), max(1, min(workers, size)))

    start = time.perf_counter()
    pool = Pool(processes=workers) if workers > 1 else None
    try:
        for k in range(T - 1, -1, -1):
            factors = _stage_factors(net.weights[k], params.beta, n)
            tasks = [(factors, params.c, values[k + 1], idx, n) for idx in chunks]
            results = pool.map(_backup_chunk, tasks) if pool is not None else [_backup_chunk(t) for t in tasks]
            for idx, (v, u) in zip(chunks, results):
                values[k, idx] = v
                actions[k, idx] = u
            logger.debug(f"Bellman stage k={k} done")
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    values.setflags(write=False)
    actions.setflags(write=False)
    logger.info(f"Solved MDP with n={n}, T={T} ({size} states x {size} actions) in {time.perf_counter() - start:.3f}s")
    return ValueTable(values), Policy(actions, n)
