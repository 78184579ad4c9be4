"""
sisnet/network/contact_network.py
---------------------------------
Time-varying directed contact network with per-link transmission
probabilities.

Orientation is fixed: ``weights[k, i, j]`` is w_ij^k, the probability that an
infected node *j* infects node *i* at step *k* (row = receiver).  The diagonal
holds the self-transmission (failure-to-recover) probabilities and is always
part of the link set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

# Above this many nodes neighbourhood queries use precomputed adjacency lists
DENSE_NODE_CAP = 64


@dataclass(frozen=True)
class Neighborhood:
    node: int
    k: int
    in_neighbors_with_self: Tuple[int, ...]
    out_neighbors_with_self: Tuple[int, ...]


class ContactNetwork:
    """Immutable stack of T transmission matrices Ω_0 … Ω_{T-1}."""

    __slots__ = ("_weights", "_adjacency", "_in_lists", "_out_lists")

    def __init__(self, weights: np.ndarray):
        arr = np.array(weights, dtype=float, copy=True)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError(f"weights must have shape (T, n, n), got {arr.shape}")
        horizon, n, _ = arr.shape
        if horizon < 1 or n < 1:
            raise ValueError(f"network needs n >= 1 and T >= 1, got n={n}, T={horizon}")

        diag = np.diagonal(arr, axis1=1, axis2=2)
        if np.isnan(diag).any():
            k, i = np.argwhere(np.isnan(diag))[0]
            raise ValueError(f"missing self-loop weight for node {i} at step {k}")
        if np.isnan(arr).any():
            k, i, j = np.argwhere(np.isnan(arr))[0]
            raise ValueError(f"missing weight w[{i},{j}] at step {k}")
        bad = (arr < 0.0) | (arr > 1.0) | ~np.isfinite(arr)
        if bad.any():
            k, i, j = np.argwhere(bad)[0]
            raise ValueError(f"probability out of range: w[{i},{j}] = {arr[k, i, j]} at step {k}")

        adjacency = (arr > 0.0) | np.eye(n, dtype=bool)[None, :, :]
        arr.setflags(write=False)
        adjacency.setflags(write=False)
        object.__setattr__(self, "_weights", arr)
        object.__setattr__(self, "_adjacency", adjacency)

        in_lists: List[List[Tuple[int, ...]]] = []
        out_lists: List[List[Tuple[int, ...]]] = []
        if n > DENSE_NODE_CAP:
            for k in range(horizon):
                in_lists.append([tuple(np.flatnonzero(adjacency[k, i, :]).tolist()) for i in range(n)])
                out_lists.append([tuple(np.flatnonzero(adjacency[k, :, i]).tolist()) for i in range(n)])
        object.__setattr__(self, "_in_lists", in_lists)
        object.__setattr__(self, "_out_lists", out_lists)

    def __setattr__(self, name, value):
        raise AttributeError("ContactNetwork is immutable")

    def __reduce__(self):
        return (ContactNetwork, (np.array(self._weights),))

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def static(cls, matrix: Sequence[Sequence[float]], horizon: int) -> "ContactNetwork":
        """Expand one weight matrix to T identical steps."""
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        mat = np.asarray(matrix, dtype=float)
        return cls(np.repeat(mat[None, :, :], horizon, axis=0))

    @classmethod
    def from_matrices(cls, matrices: Sequence[Sequence[Sequence[float]]]) -> "ContactNetwork":
        return cls(np.asarray(matrices, dtype=float))

    # ------------------------------------------------------------------
    # accessors
    # ------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self._weights.shape[1]

    @property
    def horizon(self) -> int:
        return self._weights.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Read-only (T, n, n) array of w_ij^k."""
        return self._weights

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only (T, n, n) boolean support of Ω_k plus the diagonal."""
        return self._adjacency

    def weights_at(self, k: int) -> np.ndarray:
        self._check_time(k)
        return self._weights[k]

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self._weights, np.swapaxes(self._weights, 1, 2)))

    def equals(self, other: "ContactNetwork") -> bool:
        return isinstance(other, ContactNetwork) and np.array_equal(self._weights, other._weights)

    def __repr__(self) -> str:
        return f"ContactNetwork(n={self.n}, T={self.horizon})"

    # ------------------------------------------------------------------
    # neighbourhoods
    # ------------------------------------------------------------------

    def in_neighborhood(self, i: int, k: int) -> Tuple[int, ...]:
        """N_i^{∘k}: nodes j with a link (i, j) at step k, plus i itself."""
        self._check_node(i)
        self._check_time(k)
        if self._in_lists:
            return self._in_lists[k][i]
        return tuple(np.flatnonzero(self._adjacency[k, i, :]).tolist())

    def out_neighborhood(self, i: int, k: int) -> Tuple[int, ...]:
        """N_{i-}^{∘k}: nodes ℓ that i can infect at step k, plus i itself."""
        self._check_node(i)
        self._check_time(k)
        if self._out_lists:
            return self._out_lists[k][i]
        return tuple(np.flatnonzero(self._adjacency[k, :, i]).tolist())

    def neighborhood(self, i: int, k: int) -> Neighborhood:
        return Neighborhood(
            node=i,
            k=k,
            in_neighbors_with_self=self.in_neighborhood(i, k),
            out_neighbors_with_self=self.out_neighborhood(i, k),
        )

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"node index {i} out of range for n={self.n}")

    def _check_time(self, k: int) -> None:
        if not 0 <= k < self.horizon:
            raise IndexError(f"time index {k} out of range for T={self.horizon}")


def in_neighborhood(net: ContactNetwork, i: int, k: int) -> Tuple[int, ...]:
    return net.in_neighborhood(i, k)


def out_neighborhood(net: ContactNetwork, i: int, k: int) -> Tuple[int, ...]:
    return net.out_neighborhood(i, k)
