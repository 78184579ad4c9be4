"""
runner/harness.py
-----------------
Runs the four computations on a scenario (exact chain sampling, TransNN
forward dynamics, MDP control, TransNN control), times them, compares the
resulting actions and costs and writes the run artifacts.

Artifacts in the run directory:
    result.json            actions, costs, bound_check, verification, skipped, warnings, timing
    traces.csv             trial, k, node, state, action
    timing.csv             method, seconds
    actions_{method}.csv   k, node, value
    marginals_*.csv        k, node, value (Monte Carlo, exact, mean-field, bound)
    mdp_policy.json        value and policy tables keyed "k/state"
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from sisnet import settings
from sisnet.errors import StateSpaceTooLarge
from sisnet.exact_chain.sampling import monte_carlo_marginals, sample_trajectories
from sisnet.exact_chain.transitions import exact_marginals
from sisnet.exports import per_node_frame, trajectories_frame, write_csv, write_json
from sisnet.mdp_control.bellman import controlled_weight_stack, solve_bellman
from sisnet.mdp_control.evaluation import evaluate_schedule_exact, expected_initial_value, policy_to_document
from sisnet.mdp_control.simulate import simulate_policy
from sisnet.network.contact_network import ContactNetwork
from sisnet.network.generators import random_scenario
from sisnet.network.scenario import Scenario, load_scenario
from sisnet.transnn.activation import to_info
from sisnet.transnn.bounds import BoundReport, assemble_bound_report
from sisnet.transnn.dynamics import linear_bound_trajectory, prob_trajectory
from sisnet.transnn_control.sweep import SweepResult, forward_backward_solve
from sisnet.transnn_control.verify import VerificationReport, verify_minimizer

logger = logging.getLogger(__name__)

EXACT_CHAIN = "exact_chain"
TRANSNN = "transnn"
MDP = "mdp"
TRANSNN_CONTROL = "transnn_control"
METHODS = (EXACT_CHAIN, TRANSNN, MDP, TRANSNN_CONTROL)

# Trials written to traces.csv
TRACE_TRIALS = 20


@dataclass
class RunOptions:
    methods: Tuple[str, ...] = METHODS
    trials: Optional[int] = None
    max_iters: Optional[int] = None
    seed: Optional[int] = None
    skip_mdp: bool = False
    require_mdp: bool = False
    workers: Optional[int] = None
    out_dir: Optional[Union[str, os.PathLike]] = None


@dataclass
class ScenarioResult:
    scenario_id: str
    seed: int
    n: int
    T: int
    params: dict
    timing: Dict[str, float] = field(default_factory=dict)
    actions: Dict[str, np.ndarray] = field(default_factory=dict)
    costs: Dict[str, dict] = field(default_factory=dict)
    series: Dict[str, np.ndarray] = field(default_factory=dict)
    bound_check: Optional[BoundReport] = None
    verification: Optional[VerificationReport] = None
    sweep: Optional[SweepResult] = None
    comparison: Optional[dict] = None
    policy_document: Optional[dict] = None
    traces: Optional[pd.DataFrame] = None
    skipped: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def has_warnings(self) -> bool:
        return bool(self.warnings)

    def to_document(self) -> dict:
        doc = {
            "scenario_id": self.scenario_id,
            "seed": self.seed,
            "n": self.n,
            "T": self.T,
            "params": self.params,
            "actions": {m: a.astype(int).tolist() for m, a in self.actions.items()},
            "costs": self.costs,
            "bound_check": None if self.bound_check is None else self.bound_check.to_document(),
            "verification": None if self.verification is None else self.verification.to_document(),
            "skipped": self.skipped,
            "warnings": self.warnings,
            "timing": self.timing,
        }
        if self.comparison is not None:
            doc["comparison"] = self.comparison
        if self.sweep is not None:
            doc["transnn_control"] = self.sweep.to_document()
        return doc


# --- Action comparison ---

def compare_actions(
    mdp_actions: np.ndarray, transnn_schedule: np.ndarray, mdp_action_fraction: Optional[np.ndarray] = None
) -> dict:
    """Is every MDP action (realized on one trace) also in the TransNN schedule?"""
    mdp = np.asarray(mdp_actions).astype(bool)
    sched = np.asarray(transnn_schedule).astype(bool)
    if mdp.shape != sched.shape:
        raise ValueError(f"action tables differ in shape: {mdp.shape} vs {sched.shape}")
    taken = int(mdp.sum())
    included = int((mdp & sched).sum())
    union = int((mdp | sched).sum())
    report = {
        "mdp_actions": taken,
        "transnn_actions": int(sched.sum()),
        "included": included,
        "inclusion_fraction": included / taken if taken else 1.0,
        "inclusion_holds": included == taken,
        "overlap": included / union if union else 1.0,
        "agreement_fraction": float(np.mean(mdp == sched)),
        "first_step_agreement": bool(np.array_equal(mdp[0], sched[0])),
        "entries": [
            {"k": int(k), "node": int(i), "mdp": int(mdp[k, i]), "transnn": int(sched[k, i])}
            for k, i in zip(*np.nonzero(mdp | sched))
        ],
    }
    if mdp_action_fraction is not None:
        frac = np.asarray(mdp_action_fraction, dtype=float)
        total = float(frac.sum())
        report["inclusion_fraction_all_trials"] = float((frac * sched).sum() / total) if total > 0 else 1.0
    return report


# --- Scenario run ---

def _elapsed(start: float) -> float:
    return max(time.perf_counter() - start, 1e-9)


def _schedule_cost_monte_carlo(
    net: ContactNetwork, schedule: np.ndarray, beta: float, c: float, p0: np.ndarray, trials: int, seed, workers
) -> Tuple[float, float]:
    """Mean J1 of an open-loop schedule on the exact chain, with its standard error."""
    controlled = ContactNetwork(controlled_weight_stack(net, schedule, beta))
    marg = monte_carlo_marginals(controlled, p0, trials, seed, workers)
    mean = float(c * marg[:-1].sum() + schedule.sum())
    # per-trial cost variance is bounded by (c n T)^2 / 4
    spread = c * net.n * net.horizon / 2.0
    return mean, spread / np.sqrt(trials)


def run_scenario(source: Union[str, os.PathLike, Scenario], options: Optional[RunOptions] = None) -> ScenarioResult:
    options = options or RunOptions()
    scenario = source if isinstance(source, Scenario) else load_scenario(source)
    scenario = scenario.with_seed(options.seed)
    trials = settings.DEFAULT_TRIALS if options.trials is None else options.trials
    net, params, p0 = scenario.network, scenario.params, np.asarray(scenario.initial, dtype=float)
    chain_ss, trace_ss, mdp_ss, schedule_ss = np.random.SeedSequence(scenario.seed).spawn(4)

    result = ScenarioResult(
        scenario_id=scenario.scenario_id,
        seed=scenario.seed,
        n=net.n,
        T=net.horizon,
        params=params.to_dict(),
    )
    methods = set(options.methods)
    logger.info(f"Running scenario {scenario.scenario_id} (n={net.n}, T={net.horizon}, seed={scenario.seed}): {sorted(methods)}")

    # exact chain + TransNN forward
    p_hat = None
    if EXACT_CHAIN in methods:
        start = time.perf_counter()
        p_hat = monte_carlo_marginals(net, p0, trials, chain_ss, options.workers)
        if net.n <= settings.CHAIN_NODE_CAP:
            result.series["exact"] = exact_marginals(net, p0)
        result.timing[EXACT_CHAIN] = _elapsed(start)
        result.series["monte_carlo"] = p_hat
        traj = sample_trajectories(net, p0, min(TRACE_TRIALS, trials), trace_ss, 1)
        result.traces = trajectories_frame(traj).rename(columns={"value": "state"})
        result.traces["action"] = 0
        logger.info(f"Exact chain: {trials} trials in {result.timing[EXACT_CHAIN]:.4f}s")

    if TRANSNN in methods:
        start = time.perf_counter()
        p = prob_trajectory(net, p0)
        result.series["p"] = p
        result.series["s"] = to_info(p)
        result.series["linear_bound"] = linear_bound_trajectory(net, p0)
        result.timing[TRANSNN] = _elapsed(start)
        if p_hat is not None:
            result.bound_check = assemble_bound_report(net, p0, p_hat, trials)
            result.warnings.extend(result.bound_check.warnings)
        logger.info(f"TransNN forward pass in {result.timing[TRANSNN]:.6f}s")

    # MDP control
    mdp_ran = False
    if MDP in methods:
        if options.skip_mdp:
            result.skipped[MDP] = "skipped on request (--skip-mdp)"
        elif net.n > settings.MDP_NODE_CAP:
            if options.require_mdp:
                raise StateSpaceTooLarge(net.n, settings.MDP_NODE_CAP, "MDP")
            result.skipped[MDP] = f"n={net.n} exceeds the MDP cap n <= {settings.MDP_NODE_CAP}"
        else:
            start = time.perf_counter()
            values, policy = solve_bellman(net, params, workers=options.workers)
            result.timing[MDP] = _elapsed(start)
            sim = simulate_policy(net, params, policy, p0, trials, mdp_ss, options.workers)
            result.actions[MDP] = sim.actions[0]
            result.series["mdp_action_fraction"] = sim.action_fraction()
            result.costs[MDP] = {
                "V0": expected_initial_value(values, p0),
                "simulated_mean": sim.mean_cost,
                "simulated_std_error": sim.std_error,
                "trials": trials,
            }
            result.policy_document = policy_to_document(values, policy)
            result.traces = sim.to_frame(TRACE_TRIALS)
            mdp_ran = True
            logger.info(f"MDP solved in {result.timing[MDP]:.4f}s, V0={result.costs[MDP]['V0']:.4f}")
        if MDP in result.skipped:
            logger.info(f"MDP skipped: {result.skipped[MDP]}")

    # TransNN control
    if TRANSNN_CONTROL in methods:
        start = time.perf_counter()
        sweep = forward_backward_solve(net, params, p0, max_iters=options.max_iters)
        result.timing[TRANSNN_CONTROL] = _elapsed(start)
        result.sweep = sweep
        result.actions[TRANSNN_CONTROL] = sweep.schedule
        result.warnings.extend(sweep.warnings)
        result.verification = verify_minimizer(sweep.s, sweep.adjoint, sweep.schedule, net, params)
        result.warnings.extend(result.verification.warnings)

        mc_mean, mc_err = _schedule_cost_monte_carlo(
            net, sweep.schedule, params.beta, params.c, p0, trials, schedule_ss, options.workers
        )
        costs = {"J2": sweep.J2, "J1_monte_carlo": mc_mean, "J1_monte_carlo_error_bound": mc_err,
                 "status": sweep.status, "iterations": sweep.iterations}
        if net.n <= settings.CHAIN_NODE_CAP:
            costs["J1_exact"] = evaluate_schedule_exact(net, params, sweep.schedule, p0)
        result.costs[TRANSNN_CONTROL] = costs
        logger.info(f"TransNN control {sweep.status} in {result.timing[TRANSNN_CONTROL]:.6f}s, J2={sweep.J2:.4f}")

    if mdp_ran and TRANSNN_CONTROL in result.actions:
        result.comparison = compare_actions(
            result.actions[MDP], result.actions[TRANSNN_CONTROL], result.series["mdp_action_fraction"]
        )
        schedule_j1 = result.costs[TRANSNN_CONTROL].get("J1_exact", result.costs[TRANSNN_CONTROL]["J1_monte_carlo"])
        result.costs["dominance"] = {
            "mdp_V0": result.costs[MDP]["V0"],
            "transnn_schedule_J1": schedule_j1,
            "transnn_J2": result.costs[TRANSNN_CONTROL]["J2"],
            "mdp_not_worse": bool(result.costs[MDP]["V0"] <= schedule_j1 + 1e-9 * max(1.0, abs(schedule_j1))),
        }
        if MDP in result.timing and TRANSNN_CONTROL in result.timing:
            result.timing["speedup"] = result.timing[MDP] / result.timing[TRANSNN_CONTROL]
        logger.info(
            f"Action comparison: inclusion {result.comparison['inclusion_fraction']:.3f}, "
            f"first step agreement {result.comparison['first_step_agreement']}"
        )

    if options.out_dir is not None:
        write_artifacts(result, options.out_dir)
    return result


def write_artifacts(result: ScenarioResult, out_dir: Union[str, os.PathLike]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(result.to_document(), out / "result.json")

    traces = result.traces
    if traces is None:
        traces = pd.DataFrame(columns=["trial", "k", "node", "state", "action"])
    write_csv(traces, out / "traces.csv")

    timing = pd.DataFrame(
        [{"method": m, "seconds": t} for m, t in result.timing.items() if m != "speedup"],
        columns=["method", "seconds"],
    )
    write_csv(timing, out / "timing.csv")

    for method, table in result.actions.items():
        write_csv(per_node_frame(np.asarray(table).astype(int)), out / f"actions_{method}.csv")
    for name, series in result.series.items():
        write_csv(per_node_frame(series), out / f"marginals_{name}.csv")
    if result.policy_document is not None:
        write_json(result.policy_document, out / "mdp_policy.json")
    logger.info(f"Artifacts for {result.scenario_id} written to {out}")
    return out


# --- Benchmark ---

def _time_repeats(fn, repeats: int) -> List[float]:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(_elapsed(start))
    return times


def benchmark(
    sizes: Sequence[int],
    horizons: Sequence[int],
    repeats: int = 3,
    seed: int = 0,
    methods: Sequence[str] = (MDP, TRANSNN_CONTROL),
    max_iters: Optional[int] = None,
) -> pd.DataFrame:
    """Median wall time per (method, n, T) on seeded Erdős–Rényi scenarios."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if not sizes or not horizons:
        raise ValueError("benchmark needs at least one size and one horizon")
    rows = []
    for n in sizes:
        for T in horizons:
            scenario = random_scenario(n, T, seed=seed)
            net, params, p0 = scenario.network, scenario.params, scenario.initial
            for method in methods:
                if method == MDP:
                    if n > settings.MDP_NODE_CAP:
                        logger.info(f"Benchmark: skipping MDP at n={n} (cap {settings.MDP_NODE_CAP})")
                        continue
                    times = _time_repeats(lambda: solve_bellman(net, params, workers=1), repeats)
                elif method == TRANSNN_CONTROL:
                    times = _time_repeats(lambda: forward_backward_solve(net, params, p0, max_iters=max_iters), repeats)
                else:
                    raise ValueError(f"unknown benchmark method: {method}")
                rows.append(
                    {
                        "method": method,
                        "n": n,
                        "T": T,
                        "repeats": repeats,
                        "median_seconds": float(np.median(times)),
                        "min_seconds": float(np.min(times)),
                    }
                )
                logger.info(f"Benchmark {method} n={n} T={T}: median {rows[-1]['median_seconds']:.6f}s")
    return pd.DataFrame(rows, columns=["method", "n", "T", "repeats", "median_seconds", "min_seconds"])
