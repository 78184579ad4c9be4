"""
sisnet/exact_chain/states.py
----------------------------
Binary configuration encoding for the 2^n-state chain.

Node i occupies bit i of the integer index: index = sum_i x_i * 2^i.  The MDP
tables, transition matrices and exported files all use this order.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from sisnet import settings
from sisnet.errors import StateSpaceTooLarge


def check_state_space(n: int, cap: Optional[int] = None, what: str = "state space") -> None:
    cap = settings.CHAIN_NODE_CAP if cap is None else cap
    if n > cap:
        raise StateSpaceTooLarge(n, cap, what)


def as_bits(x: Sequence[int]) -> np.ndarray:
    bits = np.asarray(x)
    if bits.ndim != 1:
        raise ValueError(f"binary state must be a vector, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError(f"binary state entries must be 0 or 1, got {bits.tolist()}")
    return bits.astype(np.uint8)


def encode_state(bits: Sequence[int]) -> int:
    b = as_bits(bits)
    return int(np.dot(b.astype(np.int64), np.left_shift(1, np.arange(b.size, dtype=np.int64))))


def decode_state(index: int, n: int) -> np.ndarray:
    if not 0 <= index < 2**n:
        raise ValueError(f"state index {index} out of range for n={n}")
    return ((int(index) >> np.arange(n)) & 1).astype(np.uint8)


def all_states(n: int) -> np.ndarray:
    """(2^n, n) table of every configuration, row r = decode_state(r, n)."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.uint8)


def initial_distribution(p0: Sequence[float], cap: Optional[int] = None) -> np.ndarray:
    """Product-Bernoulli distribution over configurations with marginals p0."""
    p = np.asarray(p0, dtype=float)
    if ((p < 0.0) | (p > 1.0)).any():
        raise ValueError(f"initial probabilities must lie in [0, 1], got {p.tolist()}")
    check_state_space(p.size, cap)
    states = all_states(p.size).astype(bool)
    return np.prod(np.where(states, p[None, :], 1.0 - p[None, :]), axis=1)
