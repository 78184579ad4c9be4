"""
sisnet/transnn_control/sweep.py
-------------------------------
Forward-backward sweep for the open-loop TransNN vaccination schedule.

Each iteration runs the controlled dynamics forward (probability
coordinates, s derived with to_info), the adjoint recursion backward

    lambda(T) = 0
    lambda_i(k) = c e^{-s_i(k)} + sum_l lambda_l(k+1) dPsi/ds(m_li^k(u_l(k)), s_i(k))

and replaces the whole schedule with u_i(k) = 1 iff Delta H_i(k) < 0.  The
loop starts from u = 0 and stops at a fixed point, on a repeated schedule
(oscillation) or after max_iters.  A repeated schedule hands the cheapest
member of the cycle to refine_schedule, which settles it one entry at a time.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from sisnet import settings
from sisnet.mdp_control.bellman import controlled_weight_stack
from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork
from sisnet.transnn.activation import dpsi_ds, from_info, to_info
from sisnet.transnn.dynamics import step_info
from sisnet.transnn_control.hamiltonian import delta_H_all, hamiltonian, log_ratio

logger = logging.getLogger(__name__)

CONVERGED = "converged"
OSCILLATING = "oscillating"
MAX_ITERS = "max_iters"
SINGLE_PASS = "single_pass"

REFINE_TOLERANCE = 1e-12


@dataclass
class SweepResult:
    schedule: np.ndarray
    p: np.ndarray
    s: np.ndarray
    adjoint: np.ndarray
    delta_H: np.ndarray
    status: str
    iterations: int
    J2: float
    J2_history: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    warnings: List[str] = field(default_factory=list)
    refinement_flips: int = 0

    @property
    def converged(self) -> bool:
        return self.status in (CONVERGED, SINGLE_PASS)

    def to_document(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "J2": self.J2,
            "J2_history": list(self.J2_history),
            "refinement_flips": self.refinement_flips,
            "wall_time": self.wall_time,
            "schedule": self.schedule.astype(int).tolist(),
            "p": self.p.tolist(),
            "s": self.s.tolist(),
            "adjoint": self.adjoint.tolist(),
            "delta_H": self.delta_H.tolist(),
            "warnings": list(self.warnings),
        }


# --- Passes ---

def forward_pass(net: ContactNetwork, params: CostParams, p0: np.ndarray, schedule: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(p, s) trajectories, each (T+1, n), under the controlled weights of ``schedule``."""
    m = controlled_weight_stack(net, schedule, params.beta)
    p = np.empty((net.horizon + 1, net.n))
    p[0] = p0
    for k in range(net.horizon):
        p[k + 1] = 1.0 - np.prod(1.0 - m[k] * p[k][None, :], axis=1)
    return p, to_info(np.clip(p, 0.0, 1.0))


def adjoint_backward(s: np.ndarray, schedule: np.ndarray, net: ContactNetwork, params: CostParams) -> np.ndarray:
    """(T+1, n) adjoint table with lambda(T) = 0; every entry is >= 0."""
    s = np.asarray(s, dtype=float)
    T = net.horizon
    m = controlled_weight_stack(net, schedule, params.beta)
    # D[k, l, i] = dPsi/ds(m_li^k, s_i(k))
    D = dpsi_ds(m, s[:T, None, :])
    decay = np.exp(-s[:T])
    lam = np.zeros((T + 1, net.n))
    for k in range(T - 1, -1, -1):
        lam[k] = params.c * decay[k] + D[k].T @ lam[k + 1]
    return lam


def delta_H_table(s: np.ndarray, adjoint: np.ndarray, net: ContactNetwork, params: CostParams) -> np.ndarray:
    """(T, n) Delta H_i(k) for all steps at once."""
    T = net.horizon
    ratio = log_ratio(net.weights, s[:T], params.beta).sum(axis=2)
    lam = adjoint[1:]
    with np.errstate(invalid="ignore"):
        weighted = np.where(lam > 0.0, lam * ratio, 0.0)
    return 1.0 - weighted


def control_rule(
    s: Sequence[float], lambda_next: Sequence[float], net: ContactNetwork, params: CostParams, k: int
) -> np.ndarray:
    """u_i = 1 iff Delta H_i(k) < 0 (ties give 0)."""
    return (delta_H_all(k, s, lambda_next, net, params) < 0.0).astype(np.uint8)


# --- Costs ---

def evaluate_J2(trajectory: np.ndarray, schedule: np.ndarray, params: CostParams, info: bool = False) -> float:
    """J2 = sum_{k<T} [c 1'p(k) + 1'u(k)]; ``info`` marks an s trajectory."""
    u = np.asarray(schedule, dtype=float)
    traj = np.asarray(trajectory, dtype=float)[: u.shape[0]]
    p = from_info(traj) if info else traj
    return float(params.c * np.sum(p) + np.sum(u))


def cost_to_go(
    s_k: Sequence[float], k: int, schedule: np.ndarray, net: ContactNetwork, params: CostParams
) -> float:
    """Tail of J2 from step k, propagated in information coordinates."""
    s = np.asarray(s_k, dtype=float)
    u = np.asarray(schedule)
    m = controlled_weight_stack(net, u, params.beta)
    total = 0.0
    for t in range(k, net.horizon):
        total += float(params.c * np.sum(from_info(s)) + np.sum(u[t]))
        s = step_info(s, net, t, weights=m[t])
    return total


# --- Sweep ---

def refine_schedule(
    net: ContactNetwork,
    params: CostParams,
    p0: np.ndarray,
    schedule: np.ndarray,
    max_flips: Optional[int] = None,
) -> Tuple[np.ndarray, int, bool]:
    """Apply the switching rule one entry at a time, earliest step first.

    With the rest of the schedule fixed, the cost-to-go is concave in s and
    the adjoint is its gradient, so a single flip the rule asks for changes
    J2 by at most -|Delta H_i(k)|.  Accepted flips lower J2, and the loop ends
    on a fixed point of the rule.  Returns (schedule, flips,
    is_fixed_point).
    """
    max_flips = net.horizon * net.n * settings.DEFAULT_MAX_ITERS if max_flips is None else max_flips
    schedule = np.array(schedule, dtype=np.uint8)
    p, s = forward_pass(net, params, p0, schedule)
    J2 = evaluate_J2(p, schedule, params)
    flips = 0
    while True:
        lam = adjoint_backward(s, schedule, net, params)
        rule = (delta_H_table(s, lam, net, params) < 0.0).astype(np.uint8)
        pending = np.argwhere(rule != schedule)
        if pending.size == 0:
            return schedule, flips, True
        if flips >= max_flips:
            return schedule, flips, False
        accepted = False
        for k, i in pending:
            candidate = schedule.copy()
            candidate[k, i] = rule[k, i]
            p_c, s_c = forward_pass(net, params, p0, candidate)
            J2_c = evaluate_J2(p_c, candidate, params)
            if J2_c <= J2 + REFINE_TOLERANCE * max(1.0, abs(J2)):
                schedule, s, J2 = candidate, s_c, J2_c
                flips += 1
                accepted = True
                break
        if not accepted:
            return schedule, flips, False


def _cross_check(s: np.ndarray, adjoint: np.ndarray, schedule: np.ndarray, dH: np.ndarray,
                 net: ContactNetwork, params: CostParams) -> List[str]:
    """Compare the closed-form Delta H with direct Hamiltonian differences."""
    problems = []
    for k in range(net.horizon):
        for i in range(net.n):
            u1 = schedule[k].astype(float).copy()
            u0 = u1.copy()
            u1[i], u0[i] = 1.0, 0.0
            diff = hamiltonian(k, s[k], u1, adjoint[k + 1], net, params) - hamiltonian(k, s[k], u0, adjoint[k + 1], net, params)
            if np.isfinite(diff) and abs(diff - dH[k, i]) > 1e-9 * max(1.0, abs(diff)):
                problems.append(f"Delta H mismatch at (i={i}, k={k}): formula {dH[k, i]:.6g}, difference {diff:.6g}")
    return problems


def forward_backward_solve(
    net: ContactNetwork,
    params: CostParams,
    initial: Sequence[float],
    max_iters: Optional[int] = None,
    debug_checks: Optional[bool] = None,
) -> SweepResult:
    max_iters = settings.DEFAULT_MAX_ITERS if max_iters is None else max_iters
    debug_checks = settings.DEBUG_CHECKS if debug_checks is None else debug_checks
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if params.T != net.horizon:
        raise ValueError(f"CostParams.T={params.T} does not match network horizon {net.horizon}")
    p0 = np.asarray(initial, dtype=float)
    if p0.shape != (net.n,) or ((p0 < 0.0) | (p0 > 1.0)).any():
        raise ValueError(f"initial must be {net.n} probabilities in [0, 1], got {p0.tolist()}")

    start = time.perf_counter()
    schedule = np.zeros((net.horizon, net.n), dtype=np.uint8)
    schedules = [schedule]
    seen = {schedule.tobytes(): 0}
    history: List[float] = []
    warnings: List[str] = []
    status = MAX_ITERS
    iterations = 0
    refinement_flips = 0

    for it in range(1, max_iters + 1):
        iterations = it
        p, s = forward_pass(net, params, p0, schedule)
        lam = adjoint_backward(s, schedule, net, params)
        dH = delta_H_table(s, lam, net, params)
        history.append(evaluate_J2(p, schedule, params))
        if debug_checks:
            for msg in _cross_check(s, lam, schedule, dH, net, params):
                logger.warning(msg)
                warnings.append(msg)
        new = (dH < 0.0).astype(np.uint8)
        logger.debug(f"Sweep iteration {it}: J2={history[-1]:.6f}, vaccinations={int(new.sum())}")

        if np.array_equal(new, schedule):
            status = CONVERGED
            break
        key = new.tobytes()
        if key in seen:
            cycle = list(range(seen[key], len(schedules)))
            best = min(cycle, key=lambda idx: history[idx])
            schedule, refinement_flips, settled = refine_schedule(net, params, p0, schedules[best])
            if settled:
                status = CONVERGED
                logger.info(
                    f"Sweep cycle over {len(cycle)} schedules settled by {refinement_flips} single-entry update(s)"
                )
            else:
                status = OSCILLATING
                msg = (
                    f"Sweep oscillates over {len(cycle)} schedules; refinement from J2={history[best]:.6f} "
                    f"stopped after {refinement_flips} update(s) without a fixed point"
                )
                logger.warning(msg)
                warnings.append(msg)
            break
        seen[key] = len(schedules)
        schedules.append(new)
        schedule = new
    else:
        if max_iters == 1:
            status = SINGLE_PASS
        else:
            msg = f"Sweep did not converge within {max_iters} iterations"
            logger.warning(msg)
            warnings.append(msg)

    p, s = forward_pass(net, params, p0, schedule)
    lam = adjoint_backward(s, schedule, net, params)
    dH = delta_H_table(s, lam, net, params)
    J2 = evaluate_J2(p, schedule, params)
    wall = time.perf_counter() - start
    logger.info(f"Forward-backward sweep {status} after {iterations} iteration(s): J2={J2:.4f}, {wall:.4f}s")
    return SweepResult(
        schedule=schedule,
        p=p,
        s=s,
        adjoint=lam,
        delta_H=dH,
        status=status,
        iterations=iterations,
        J2=J2,
        J2_history=history,
        wall_time=wall,
        warnings=warnings,
        refinement_flips=refinement_flips,
    )
