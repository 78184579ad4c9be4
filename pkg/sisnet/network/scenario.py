"""
sisnet/network/scenario.py
--------------------------
Load and validate scenario documents (JSON) into a ContactNetwork plus the
control parameters and initial condition that travel with it.

Document fields: ``n``, ``T``, ``beta``, ``c``, ``initial``, ``weights``,
``seed``.  ``weights`` is either ``{"static": matrix}`` or a list of T
matrices.  ``null`` off the diagonal means "no link"; the diagonal
(self-loop) must always be given.  Unknown fields are rejected.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, List, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from sisnet.errors import ScenarioError
from sisnet.mdp_control.params import CostParams
from sisnet.network.contact_network import ContactNetwork

logger = logging.getLogger(__name__)

Matrix = List[List[Optional[float]]]


class StaticWeights(BaseModel):
    model_config = ConfigDict(extra="forbid")

    static: Matrix


class ScenarioDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=1)
    T: int = Field(ge=1)
    beta: float = Field(ge=0.0, le=1.0)
    c: float = Field(ge=0.0)
    initial: List[float]
    weights: Union[StaticWeights, List[Matrix]]
    seed: int = 0

    @model_validator(mode="after")
    def _check_shapes(self) -> "ScenarioDocument":
        if len(self.initial) != self.n:
            raise ValueError(f"initial has {len(self.initial)} entries, expected n={self.n}")
        for i, p in enumerate(self.initial):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range: initial[{i}] = {p}")

        if isinstance(self.weights, StaticWeights):
            matrices = [self.weights.static]
        else:
            matrices = self.weights
            if len(matrices) != self.T:
                raise ValueError(f"weights lists {len(matrices)} matrices, expected T={self.T}")

        for k, mat in enumerate(matrices):
            if len(mat) != self.n or any(len(row) != self.n for row in mat):
                raise ValueError(f"weights matrix at step {k} is not {self.n}x{self.n}")
            for i, row in enumerate(mat):
                if row[i] is None:
                    raise ValueError(f"missing self-loop weight for node {i} at step {k}")
                for j, w in enumerate(row):
                    if w is not None and not 0.0 <= w <= 1.0:
                        raise ValueError(f"probability out of range: w[{i}][{j}] = {w} at step {k}")
        return self

    def weight_stack(self) -> np.ndarray:
        if isinstance(self.weights, StaticWeights):
            mats = [self.weights.static] * self.T
        else:
            mats = self.weights
        # None -> no link
        return np.array([[[0.0 if w is None else w for w in row] for row in mat] for mat in mats], dtype=float)


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    network: ContactNetwork
    params: CostParams
    initial: np.ndarray
    seed: int
    source: Optional[str] = None

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def horizon(self) -> int:
        return self.network.horizon

    def with_seed(self, seed: Optional[int]) -> "Scenario":
        if seed is None:
            return self
        return replace(self, seed=int(seed))


def _format_validation_error(label: str, err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e.get("loc", ())) or "<document>"
        parts.append(f"{label}: {loc}: {e.get('msg')}")
    return "; ".join(parts)


def _read_source(source: Union[str, os.PathLike, Mapping[str, Any]]) -> tuple[Mapping[str, Any], str, str]:
    """Return (raw document, label used in error messages, scenario id)."""
    if isinstance(source, Mapping):
        return source, "<mapping>", "scenario"

    text: str
    label: str
    scenario_id: str
    path = Path(source) if not (isinstance(source, str) and source.lstrip().startswith("{")) else None
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ScenarioError(f"Scenario file not found: {path}")
        except OSError as e:
            raise ScenarioError(f"Could not read scenario file {path}: {e}") from e
        label, scenario_id = str(path), path.stem
    else:
        text, label, scenario_id = str(source), "<string>", "scenario"

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{label}:{e.lineno}:{e.colno}: malformed scenario document: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ScenarioError(f"{label}:1:1: malformed scenario document: top level must be an object")
    return raw, label, scenario_id


def load_scenario(source: Union[str, os.PathLike, Mapping[str, Any]], scenario_id: Optional[str] = None) -> Scenario:
    """Parse and validate a scenario document from a path, JSON text or mapping."""
    raw, label, default_id = _read_source(source)
    try:
        doc = ScenarioDocument.model_validate(raw)
    except ValidationError as e:
        raise ScenarioError(_format_validation_error(label, e)) from e

    try:
        network = ContactNetwork(doc.weight_stack())
        params = CostParams(c=doc.c, beta=doc.beta, T=doc.T)
    except ValueError as e:
        raise ScenarioError(f"{label}: {e}") from e

    initial = np.asarray(doc.initial, dtype=float)
    initial.setflags(write=False)
    scenario = Scenario(
        scenario_id=scenario_id or default_id,
        network=network,
        params=params,
        initial=initial,
        seed=doc.seed,
        source=None if label.startswith("<") else label,
    )
    logger.debug(f"Loaded scenario {scenario.scenario_id}: n={network.n}, T={network.horizon}, seed={doc.seed}")
    return scenario


def load_network(source: Union[str, os.PathLike, Mapping[str, Any]]) -> ContactNetwork:
    return load_scenario(source).network


def dump_scenario(scenario: Scenario) -> dict:
    """Inverse of load_scenario; identical steps collapse to the static form."""
    weights = scenario.network.weights
    if all(np.array_equal(weights[0], weights[k]) for k in range(1, weights.shape[0])):
        weight_doc: Any = {"static": weights[0].tolist()}
    else:
        weight_doc = weights.tolist()
    return {
        "n": scenario.n,
        "T": scenario.horizon,
        "beta": scenario.params.beta,
        "c": scenario.params.c,
        "initial": [float(p) for p in scenario.initial],
        "weights": weight_doc,
        "seed": scenario.seed,
    }


def write_scenario(scenario: Scenario, path: Union[str, os.PathLike]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(dump_scenario(scenario), f, indent=2)
        f.write("\n")
    logger.info(f"Wrote scenario {scenario.scenario_id} to {out}")
    return out
