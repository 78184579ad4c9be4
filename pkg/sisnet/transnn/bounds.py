"""
sisnet/transnn/bounds.py
------------------------
Checks that the TransNN iterates bound the exact infection probabilities.

For matched initial marginals, Monte Carlo marginal <= step_prob iterate <=
linear bound elementwise; the stochastic leg is judged against a 3 sigma
binomial tolerance computed from the trial count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from sisnet import settings
from sisnet.exact_chain.sampling import SeedLike, monte_carlo_marginals
from sisnet.exact_chain.transitions import exact_marginals
from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import to_info
from sisnet.transnn.dynamics import linear_bound_trajectory, prob_trajectory

logger = logging.getLogger(__name__)

SIGMA_MULTIPLIER = 3.0
EXACT_TOLERANCE = 1e-12


@dataclass
class BoundReport:
    trials: int
    p: np.ndarray
    p_hat: np.ndarray
    tolerance: np.ndarray
    linear_bound: np.ndarray
    exact: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def slack(self) -> np.ndarray:
        return self.p - self.p_hat

    @property
    def info_slack(self) -> np.ndarray:
        s = to_info(self.p)
        s_hat = to_info(self.p_hat)
        with np.errstate(invalid="ignore"):
            diff = s - s_hat
        return np.where(np.isinf(s) & np.isinf(s_hat), 0.0, diff)

    @property
    def max_violation(self) -> float:
        """Largest amount by which the estimate exceeds the iterate (<= 0 when none)."""
        return float(np.max(-self.slack))

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(self.slack < -self.tolerance))

    @property
    def linear_ordering_ok(self) -> bool:
        return bool(np.all(self.linear_bound >= self.p - EXACT_TOLERANCE))

    @property
    def exact_slack(self) -> Optional[np.ndarray]:
        return None if self.exact is None else self.p - self.exact

    @property
    def exact_ok(self) -> Optional[bool]:
        if self.exact is None:
            return None
        return bool(np.min(self.exact_slack) >= -EXACT_TOLERANCE)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.linear_ordering_ok and self.exact_ok is not False

    def to_frame(self) -> pd.DataFrame:
        T1, n = self.p.shape
        k, node = np.meshgrid(np.arange(T1), np.arange(n), indexing="ij")
        frame = pd.DataFrame(
            {
                "k": k.ravel(),
                "node": node.ravel(),
                "p": self.p.ravel(),
                "p_hat": self.p_hat.ravel(),
                "linear_bound": self.linear_bound.ravel(),
                "slack": self.slack.ravel(),
                "tolerance": self.tolerance.ravel(),
            }
        )
        if self.exact is not None:
            frame["exact"] = self.exact.ravel()
        return frame

    def to_document(self) -> dict:
        info = self.info_slack
        finite = info[np.isfinite(info)]
        doc = {
            "trials": self.trials,
            "ok": self.ok,
            "max_violation": self.max_violation,
            "violations": self.violations,
            "min_slack": float(np.min(self.slack)),
            "min_info_slack": float(np.min(finite)) if finite.size else 0.0,
            "linear_ordering_ok": self.linear_ordering_ok,
            "exact_ok": self.exact_ok,
            "p": self.p.tolist(),
            "p_hat": self.p_hat.tolist(),
            "linear_bound": self.linear_bound.tolist(),
        }
        if self.exact is not None:
            doc["min_exact_slack"] = float(np.min(self.exact_slack))
        return doc


def assemble_bound_report(net: ContactNetwork, p0: np.ndarray, p_hat: np.ndarray, trials: int) -> BoundReport:
    """Build the report from already estimated marginals p_hat."""
    p = prob_trajectory(net, p0)
    var = np.maximum(p * (1.0 - p), p_hat * (1.0 - p_hat))
    tolerance = SIGMA_MULTIPLIER * np.sqrt(np.clip(var, 0.0, None) / trials) + EXACT_TOLERANCE

    exact = exact_marginals(net, p0) if net.n <= settings.CHAIN_NODE_CAP else None
    report = BoundReport(
        trials=trials,
        p=p,
        p_hat=p_hat,
        tolerance=tolerance,
        linear_bound=linear_bound_trajectory(net, p0),
        exact=exact,
    )

    if report.violations:
        msg = (
            f"Mean-field bound exceeded beyond 3 sigma at {report.violations} (k, node) entries; "
            f"max violation {report.max_violation:.3g}"
        )
        logger.warning(msg)
        report.warnings.append(msg)
    if not report.linear_ordering_ok:
        msg = "Linear bound fell below the mean-field iterate"
        logger.warning(msg)
        report.warnings.append(msg)
    if report.exact_ok is False:
        msg = f"Exact marginals exceed the mean-field iterate by {-np.min(report.exact_slack):.3g}"
        logger.warning(msg)
        report.warnings.append(msg)
    logger.info(
        f"Bound check: {trials} trials, min slack {np.min(report.slack):.4g}, "
        f"max violation {report.max_violation:.4g}, ok={report.ok}"
    )
    return report


def check_upper_bound(
    net: ContactNetwork,
    initial: Sequence[float],
    trials: int,
    rng: SeedLike = None,
    workers: Optional[int] = None,
) -> BoundReport:
    """Compare step_prob iterates against Monte Carlo (and exact, for small n) marginals."""
    p0 = np.asarray(initial, dtype=float)
    p_hat = monte_carlo_marginals(net, p0, trials, rng, workers)
    return assemble_bound_report(net, p0, p_hat, trials)
