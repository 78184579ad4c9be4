"""
sisnet/exact_chain/sampling.py
------------------------------
Trajectory sampling of the agent-based SIS dynamics and Monte Carlo
estimators built on it.

One step: every link (i, j) fires independently with probability w_ij^k
(W_ij ~ Bernoulli), and node i is infected at k+1 iff some j with X_j(k) = 1
has W_ij = 1 (j = i included, the self-loop encodes failure to recover).

Trials are cut into fixed-size blocks, each with its own child of
``SeedSequence(seed)``.  The block size depends only on n and
``settings.TRIAL_BLOCK``, so results do not depend on how many workers run
the blocks.
"""

from __future__ import annotations

import logging
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from sisnet import settings
from sisnet.exact_chain.states import as_bits, check_state_space
from sisnet.network.contact_network import ContactNetwork

logger = logging.getLogger(__name__)

# Cap on the number of link draws (trials x n x n) held in memory per block
MAX_BLOCK_CELLS = 2_000_000

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


# --- Seeding and block machinery ---

def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(0, 2**63 - 1)))
    return np.random.SeedSequence(0 if seed is None else int(seed))


def block_size(n: int) -> int:
    return max(1, min(settings.TRIAL_BLOCK, MAX_BLOCK_CELLS // max(1, n * n)))


def plan_blocks(trials: int, n: int, seed: SeedLike) -> List[Tuple[int, np.random.SeedSequence]]:
    """Split ``trials`` into (size, seed sequence) blocks in a fixed order."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    size = block_size(n)
    sizes = [size] * (trials // size)
    if trials % size:
        sizes.append(trials % size)
    children = as_seed_sequence(seed).spawn(len(sizes))
    return list(zip(sizes, children))


def run_blocks(fn: Callable, tasks: Sequence, workers: Optional[int] = None) -> list:
    """Map ``fn`` over block tasks, in a process pool when workers > 1.  Order is preserved."""
    workers = settings.WORKERS if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            return pool.map(fn, tasks)
    return [fn(t) for t in tasks]


# --- Single-step primitives ---

def sample_transmissions(net: ContactNetwork, k: int, rng: np.random.Generator) -> np.ndarray:
    """Realized transmissions W^k in {0,1}^(n x n); zero off the link support."""
    w = net.weights_at(k)
    draw = rng.random(w.shape) < w
    return (draw & net.adjacency[k]).astype(np.uint8)


def step_state(x: Sequence[int], draw: np.ndarray, net: ContactNetwork, k: int) -> np.ndarray:
    """1 - X_i(k+1) = prod_j (1 - W_ij X_j(k))."""
    bits = as_bits(x).astype(bool)
    w = np.asarray(draw, dtype=bool) & net.adjacency[k]
    return (w & bits[None, :]).any(axis=1).astype(np.uint8)


def step_batch(states: np.ndarray, weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Advance a (B, n) boolean batch one step under an (n, n) weight matrix."""
    draws = rng.random((states.shape[0],) + weights.shape) < weights[None, :, :]
    return (draws & states[:, None, :]).any(axis=2)


def draw_initial(p0: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """Independent per-node Bernoulli(p0) initial configurations, (size, n) bool."""
    return rng.random((size, p0.size)) < p0[None, :]


def _initial_vector(initial: Sequence[float], n: int) -> np.ndarray:
    p0 = np.asarray(initial, dtype=float)
    if p0.shape != (n,):
        raise ValueError(f"initial condition must have length n={n}, got shape {p0.shape}")
    if ((p0 < 0.0) | (p0 > 1.0)).any():
        raise ValueError(f"initial probabilities must lie in [0, 1], got {p0.tolist()}")
    return p0


# --- Block workers (module level so a process pool can pickle them) ---

def _marginal_block(task) -> np.ndarray:
    weights, p0, size, ss = task
    rng = np.random.default_rng(ss)
    counts = np.zeros((weights.shape[0] + 1, p0.size), dtype=np.int64)
    x = draw_initial(p0, size, rng)
    counts[0] = x.sum(axis=0)
    for k in range(weights.shape[0]):
        x = step_batch(x, weights[k], rng)
        counts[k + 1] = x.sum(axis=0)
    return counts


def _trajectory_block(task) -> np.ndarray:
    weights, p0, size, ss = task
    rng = np.random.default_rng(ss)
    out = np.zeros((size, weights.shape[0] + 1, p0.size), dtype=np.uint8)
    x = draw_initial(p0, size, rng)
    out[:, 0] = x
    for k in range(weights.shape[0]):
        x = step_batch(x, weights[k], rng)
        out[:, k + 1] = x
    return out


def _transition_block(task) -> np.ndarray:
    weights, x0, size, ss = task
    rng = np.random.default_rng(ss)
    x = np.repeat(x0[None, :], size, axis=0)
    nxt = step_batch(x, weights, rng)
    codes = nxt.astype(np.int64) @ (1 << np.arange(x0.size, dtype=np.int64))
    return np.bincount(codes, minlength=2**x0.size)


# --- Estimators ---

def monte_carlo_marginals(
    net: ContactNetwork,
    initial: Sequence[float],
    trials: int,
    rng: SeedLike = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """(T+1, n) empirical infection frequencies Pr^(X_i(k) = 1)."""
    p0 = _initial_vector(initial, net.n)
    blocks = plan_blocks(trials, net.n, rng)
    weights = np.array(net.weights)
    tasks = [(weights, p0, size, ss) for size, ss in blocks]
    counts = sum(run_blocks(_marginal_block, tasks, workers))
    logger.debug(f"Monte Carlo marginals: {trials} trials in {len(blocks)} blocks")
    return counts / float(trials)


def sample_trajectories(
    net: ContactNetwork,
    initial: Sequence[float],
    trials: int,
    rng: SeedLike = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """(trials, T+1, n) binary trajectories."""
    p0 = _initial_vector(initial, net.n)
    blocks = plan_blocks(trials, net.n, rng)
    weights = np.array(net.weights)
    tasks = [(weights, p0, size, ss) for size, ss in blocks]
    return np.concatenate(run_blocks(_trajectory_block, tasks, workers), axis=0)


def empirical_transition_row(
    net: ContactNetwork,
    k: int,
    x: Sequence[int],
    samples: int,
    rng: SeedLike = None,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Frequency of each next configuration over ``samples`` one-step draws from x."""
    check_state_space(net.n, what="empirical transition row")
    x0 = as_bits(x).astype(bool)
    if x0.size != net.n:
        raise ValueError(f"state must have length n={net.n}, got {x0.size}")
    blocks = plan_blocks(samples, net.n, rng)
    weights = np.array(net.weights_at(k))
    tasks = [(weights, x0, size, ss) for size, ss in blocks]
    counts = sum(run_blocks(_transition_block, tasks, workers))
    return counts / float(samples)


def binomial_sigma(p: np.ndarray, trials: int) -> np.ndarray:
    """Standard error of a frequency estimate of p from ``trials`` samples."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / trials)
