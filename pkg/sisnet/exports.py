"""
sisnet/exports.py
-----------------
CSV and JSON writers shared by the stages and the runner.

CSV files are long format with a header row.  JSON is written with sorted
keys; +inf becomes the string "inf" and NaN becomes null so the files are
strict JSON and byte-stable across runs.
"""

from __future__ import annotations

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


# --- CSV ---

def per_node_frame(values: np.ndarray, value_name: str = "value", extra: Optional[dict] = None) -> pd.DataFrame:
    """(T+1, n) matrix -> columns k, node, value."""
    values = np.asarray(values)
    k, node = np.meshgrid(np.arange(values.shape[0]), np.arange(values.shape[1]), indexing="ij")
    frame = pd.DataFrame({"k": k.ravel(), "node": node.ravel(), value_name: values.ravel()})
    for column, value in (extra or {}).items():
        frame[column] = value
    return frame


def trajectories_frame(trajectories: np.ndarray) -> pd.DataFrame:
    """(trials, T+1, n) binary trajectories -> columns trial, k, node, value."""
    trajectories = np.asarray(trajectories)
    trial, k, node = np.meshgrid(
        np.arange(trajectories.shape[0]),
        np.arange(trajectories.shape[1]),
        np.arange(trajectories.shape[2]),
        indexing="ij",
    )
    return pd.DataFrame(
        {"trial": trial.ravel(), "k": k.ravel(), "node": node.ravel(), "value": trajectories.ravel().astype(int)}
    )


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, encoding="utf-8")
    logger.info(f"Wrote {len(frame)} rows to {out}")
    return out


# --- JSON ---

def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def dumps(doc: Any) -> str:
    return json.dumps(jsonable(doc), indent=2, sort_keys=True)


def write_json(doc: Any, path: PathLike) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        f.write(dumps(doc))
        f.write("\n")
    logger.info(f"Wrote {out}")
    return out
