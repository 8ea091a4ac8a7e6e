"""Decimal rounding and JSON/CSV writers shared by the result records."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

JSON_DIGITS = 12
CSV_DIGITS = 9


def sig(x: float, digits: int = JSON_DIGITS) -> float:
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{digits}g}")


def rounded(obj, digits: int = JSON_DIGITS):
    """Recursively convert numpy data to plain Python with `digits` significant digits."""
    if isinstance(obj, dict):
        return {str(k): rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = sig(obj, digits)
        # JSON has no inf/nan
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(rounded(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def dump_curve_csv(t: np.ndarray, X: np.ndarray, path, prefix: str = "x") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"{prefix}{i + 1}" for i in range(X.shape[1])])
        for tk, row in zip(t, X):
            w.writerow([f"{sig(tk, CSV_DIGITS):.{CSV_DIGITS}g}"] + [f"{v:.{CSV_DIGITS}g}" for v in row])
    return path


def load_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1:]
