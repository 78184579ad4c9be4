"""
sisnet/transnn/activation.py
----------------------------
TlogSigmoid link activation and the probability <-> information transform.

    Psi(w, x) = -log(1 - w + w e^{-x}),   w in [0, 1], x in [0, inf]
    s = -log(1 - p),                      p in [0, 1], s in [0, inf]

+inf is a genuine value of the information coordinate (p = 1).  All
functions accept scalars or arrays and broadcast; scalar inputs give floats.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from sisnet.settings import LOG_FLOOR

ArrayLike = Union[float, np.ndarray]


def _out(value: np.ndarray) -> ArrayLike:
    return value.item() if value.ndim == 0 else value


def _inner(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """1 - w + w e^{-x}, floored at LOG_FLOOR."""
    return np.maximum((1.0 - w) + w * np.exp(-x), LOG_FLOOR)


def tlog_sigmoid(w: ArrayLike, x: ArrayLike) -> ArrayLike:
    w, x = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # small x: expm1 keeps Psi(w, 0) = 0 exact and avoids cancellation
        small = -np.log1p(w * np.expm1(-np.minimum(x, 1.0)))
        large = -np.log(_inner(w, x))
        out = np.where(x < 1.0, small, large)
        out = np.where(w >= 1.0, x, out)
    return _out(out)


def dpsi_ds(w: ArrayLike, x: ArrayLike) -> ArrayLike:
    """dPsi/dx = w e^{-x} / (1 - w + w e^{-x}); 0 at (w=1, x=inf)."""
    w, x = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(x, dtype=float))
    num = w * np.exp(-x)
    den = np.maximum((1.0 - w) + num, LOG_FLOOR)
    out = np.where(num > 0.0, num / den, 0.0)
    return _out(out)


def dpsi_dw(w: ArrayLike, x: ArrayLike) -> ArrayLike:
    """dPsi/dw = (1 - e^{-x}) / (1 - w + w e^{-x}).

    The denominator is floored, so the (w=1, x=inf) pole returns a large
    finite value instead of inf.
    """
    w, x = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(x, dtype=float))
    out = -np.expm1(-x) / _inner(w, x)
    return _out(out)


def to_info(p: ArrayLike) -> ArrayLike:
    """s = -log(1 - p); p = 1 maps to +inf."""
    p = np.asarray(p, dtype=float)
    if ((p < 0.0) | (p > 1.0)).any():
        raise ValueError(f"probabilities must lie in [0, 1], got min={p.min()}, max={p.max()}")
    with np.errstate(divide="ignore"):
        out = np.where(p >= 1.0, np.inf, -np.log1p(-np.minimum(p, 1.0)))
    return _out(out)


def from_info(s: ArrayLike) -> ArrayLike:
    """p = 1 - e^{-s}; s = +inf maps to 1."""
    s = np.asarray(s, dtype=float)
    if (s < 0.0).any():
        raise ValueError(f"information states must be >= 0, got min={s.min()}")
    return _out(-np.expm1(-s))
