from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CostParams:
    """Cost weight c, vaccine factor β and horizon T shared by both controllers.

    Vaccinating node i multiplies every incoming transmission probability of i
    by β, so β=0 is a perfect vaccine and β=1 a useless one.
    """

    c: float
    beta: float
    T: int

    def __post_init__(self):
        if not self.c >= 0.0:
            raise ValueError(f"infection cost c must be >= 0, got {self.c}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"vaccine factor beta must lie in [0, 1], got {self.beta}")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"horizon T must be a positive integer, got {self.T}")

    def to_dict(self) -> dict:
        return {"c": self.c, "beta": self.beta, "T": self.T}
