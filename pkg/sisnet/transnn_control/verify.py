"""
sisnet/transnn_control/verify.py
--------------------------------
Gradient-sign check of the switching rule.

H(k) is convex in each relaxed u_i in [0, 1], so when dH/du_i has the same
sign at u_i = 0 and u_i = 1 the minimizer sits on the boundary (0 for a
positive gradient, 1 for a negative one).  Disagreements are reported, not
raised.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import tlog_sigmoid
from sisnet.transnn_control.hamiltonian import delta_H_all, delta_H_printed, hamiltonian_gradient, relaxed_weights

logger = logging.getLogger(__name__)

CONVEXITY_TOLERANCE = 1e-12


@dataclass
class VerificationReport:
    frame: pd.DataFrame
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def sign_agreements(self) -> int:
        return int(self.frame["signs_agree"].sum())

    @property
    def rule_mismatches(self) -> int:
        agree = self.frame[self.frame["signs_agree"]]
        return int((agree["boundary_action"] != agree["rule_action"]).sum())

    @property
    def schedule_mismatches(self) -> int:
        agree = self.frame[self.frame["signs_agree"]]
        return int((agree["boundary_action"] != agree["chosen"]).sum())

    @property
    def convexity_ok(self) -> bool:
        second = self.frame["second_difference"].dropna()
        scale = np.maximum(1.0, self.frame.loc[second.index, "scale"])
        return bool((second >= -CONVEXITY_TOLERANCE * scale).all())

    @property
    def printed_disagreements(self) -> int:
        return int((self.frame["printed_action"] != self.frame["rule_action"]).sum())

    @property
    def corners(self) -> int:
        return int(self.frame["corner"].sum())

    def summary(self) -> dict:
        return {
            "entries": int(len(self.frame)),
            "sign_agreements": self.sign_agreements,
            "rule_mismatches": self.rule_mismatches,
            "schedule_mismatches": self.schedule_mismatches,
            "convexity_ok": self.convexity_ok,
            "printed_formula_disagreements": self.printed_disagreements,
            "corners": self.corners,
        }

    def to_document(self) -> dict:
        doc = self.summary()
        doc["entries_detail"] = self.frame.drop(columns=["scale"]).to_dict("records")
        doc["warnings"] = list(self.warnings)
        doc["notes"] = list(self.notes)
        return doc


def _row_terms(weights: np.ndarray, s: np.ndarray, lam: np.ndarray, u_value: float, beta: float) -> np.ndarray:
    """lambda_i sum_j Psi(m_ij(u_i = u_value), s_j) for every i."""
    m = relaxed_weights(weights, np.full(weights.shape[0], u_value), beta)
    rows = np.sum(tlog_sigmoid(m, s[None, :]), axis=1)
    with np.errstate(invalid="ignore"):
        return np.where(lam > 0.0, lam * rows, 0.0)


def verify_minimizer(
    s: np.ndarray,
    adjoint: np.ndarray,
    schedule: np.ndarray,
    net: ContactNetwork,
    params: CostParams,
) -> VerificationReport:
    """Per-(i, k) endpoint gradients, boundary action, convexity and formula comparison."""
    s = np.asarray(s, dtype=float)
    adjoint = np.asarray(adjoint, dtype=float)
    schedule = np.asarray(schedule).astype(int)
    records = []
    for k in range(net.horizon):
        lam = adjoint[k + 1]
        w = net.weights_at(k)
        # dH/du_i depends on u_i alone, so the other entries can stay at the schedule
        grad0 = hamiltonian_gradient(k, s[k], np.zeros(net.n), lam, net, params)
        grad1 = hamiltonian_gradient(k, s[k], np.ones(net.n), lam, net, params)
        dH = delta_H_all(k, s[k], lam, net, params)
        printed = delta_H_printed(k, s[k], lam, net, params)
        h0 = _row_terms(w, s[k], lam, 0.0, params.beta)
        h_half = _row_terms(w, s[k], lam, 0.5, params.beta)
        h1 = _row_terms(w, s[k], lam, 1.0, params.beta)
        with np.errstate(invalid="ignore"):
            second = h0 - 2.0 * h_half + h1
        corner = ((w >= 1.0) & np.isinf(s[k])[None, :]).any(axis=1)

        for i in range(net.n):
            agree = bool((grad0[i] > 0 and grad1[i] > 0) or (grad0[i] < 0 and grad1[i] < 0))
            boundary = (0 if grad0[i] > 0 else 1) if agree else -1
            records.append(
                {
                    "k": k,
                    "node": i,
                    "grad_at_0": float(grad0[i]),
                    "grad_at_1": float(grad1[i]),
                    "signs_agree": agree,
                    "boundary_action": boundary,
                    "delta_H": float(dH[i]),
                    "rule_action": int(dH[i] < 0.0),
                    "chosen": int(schedule[k, i]),
                    "second_difference": float(second[i]) if np.isfinite(second[i]) else np.nan,
                    "scale": float(max(abs(h0[i]), abs(h1[i]))) if np.isfinite(h0[i]) and np.isfinite(h1[i]) else 1.0,
                    "printed_delta_H": float(printed[i]),
                    "printed_action": int(printed[i] < 0.0),
                    "corner": bool(corner[i]),
                }
            )

    report = VerificationReport(frame=pd.DataFrame.from_records(records))
    if report.rule_mismatches:
        report.warnings.append(f"{report.rule_mismatches} entries with agreeing gradient signs contradict the Delta H rule")
    if report.schedule_mismatches:
        report.warnings.append(f"{report.schedule_mismatches} scheduled actions differ from the boundary minimizer")
    if not report.convexity_ok:
        report.warnings.append("Hamiltonian second difference in u_i is negative somewhere")
    if report.printed_disagreements:
        report.notes.append(
            f"lambda_j-weighted Delta H variant implies a different action at {report.printed_disagreements} entries"
        )
    if report.corners:
        report.notes.append(f"{report.corners} entries hit the w=1, s=inf corner")
    for msg in report.warnings + report.notes:
        logger.warning(msg)
    logger.info(f"Minimizer verification: {report.summary()}")
    return report
