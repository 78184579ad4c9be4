"""Exceptions raised by the sisnet stages."""


class SisnetError(Exception):
    """Base class for toolkit errors."""


class ScenarioError(SisnetError, ValueError):
    """Scenario document is malformed or violates a network invariant."""


class StateSpaceTooLarge(SisnetError, RuntimeError):
    """Requested exact computation would enumerate too many configurations."""

    def __init__(self, n: int, cap: int, what: str = "state space"):
        self.n = n
        self.cap = cap
        super().__init__(f"{what} with n={n} nodes exceeds the configured cap n <= {cap} (2^{n} configurations)")
