# meqc/utils/csv_export.py - CSV emission with a fixed header and 12 significant digits

import logging
import os
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "seed",
    "policy",
    "param",
    "value",
    "mean_cost",
    "latency_cost",
    "energy_cost",
    "qpu_grant_rate",
    "mean_success_prob",
]
LEARNING_CURVE_COLUMNS = ["epoch", "mean_cost", "policy_loss", "value_loss", "entropy"]
FLOAT_FORMAT = "%.12g"
PARTIAL_SUFFIX = ".partial"


def emit_csv(rows: list[dict], path: str | Path, columns: list[str] = SWEEP_COLUMNS) -> Path:
    """Write rows under a fixed header.

    The file is written next to its target with a ``.partial`` suffix and renamed on
    success, so an interrupted write leaves the marker file behind.
    """
    path = Path(path)
    partial = path.with_name(path.name + PARTIAL_SUFFIX)
    df = pd.DataFrame(rows, columns=columns)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(partial, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        os.replace(partial, path)
    except OSError as e:
        logger.error(f"Failed writing {len(df)} rows to {path}: {e}")
        raise
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
