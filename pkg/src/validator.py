# src/validator.py
"""
Validator utilities for computed results.

- Delay matrix: zero diagonal, symmetry, finite non-negative entries,
  triangle inequality (shortest-path closure).
- Frontier: no member weakly dominates another.
- Oracle rows: analytic prediction vs simulated value agree within tolerance.

Oracle mismatches are appended to a CSV under logs/ for audit.
"""

import csv
import logging
import os
from typing import Dict, List, Tuple

import numpy as np

from src.paretoSearch import ParetoSet, dominates
from src.topology import DelayMatrix

logger = logging.getLogger(__name__)

LOG_PATH = "logs/oracleMismatches.csv"
DEFAULT_TOLERANCE_MS = 1e-9


def validateDelayMatrix(d: DelayMatrix, tolerance: float = DEFAULT_TOLERANCE_MS) -> Tuple[bool, str]:
    """Returns (isValid, message); message is empty when valid."""
    m = np.asarray(d.d)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False, f"not_square: shape={m.shape}"
    if not np.isfinite(m).all():
        return False, "non_finite_entries"
    if (m < 0).any():
        return False, f"negative_entries: min={m.min()}"
    if np.any(np.diag(m) != 0):
        return False, "non_zero_diagonal"
    if not np.array_equal(m, m.T):
        return False, f"asymmetric: max_diff={np.abs(m - m.T).max()}"

    for k in range(m.shape[0]):
        via = m[:, k, None] + m[None, k, :]
        excess = m - via
        if excess.max() > tolerance:
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            return False, f"triangle_violation: d[{i}][{j}] > d[{i}][{k}] + d[{k}][{j}] by {excess.max():.3g}"
    return True, ""


def validateFrontier(frontier: ParetoSet) -> Tuple[bool, str]:
    points = frontier.points
    for a in points:
        for b in points:
            if a is not b and dominates(a, b):
                return False, f"dominated_member: {b.delays} by {a.delays}"
    return True, ""


def validateAndLogOracle(
    rows: List[Dict],
    logPath: str = LOG_PATH,
    tolerance: float = DEFAULT_TOLERANCE_MS,
    overwrite: bool = False,
) -> List[Tuple[Dict, str]]:
    """
    Check that every row's `predicted_ms` and `simulated_ms` agree.
    Writes issues to CSV (append by default) and returns (row, message) pairs.
    """
    warnings = []
    for row in rows:
        diff = abs(row["predicted_ms"] - row["simulated_ms"])
        if diff > tolerance:
            warnings.append((row, f"mismatch: |predicted - simulated| = {diff:.3g} ms"))

    if warnings:
        os.makedirs(os.path.dirname(logPath) or ".", exist_ok=True)
        mode = "w" if overwrite else "a"
        with open(logPath, mode, newline="", encoding="utf-8") as csvfile:
            writer = csv.writer(csvfile)
            if overwrite or csvfile.tell() == 0:
                writer.writerow(["scenario", "n_sw", "predicted_ms", "simulated_ms", "issue"])
            for row, message in warnings:
                writer.writerow([row.get("scenario"), row.get("n_sw"), row["predicted_ms"], row["simulated_ms"], message])

        logger.warning(f"[VALIDATE] {len(warnings)} model/simulation mismatch(es), see {logPath}")
        for row, msg in warnings:
            logger.warning(f"[VALIDATE]   - {row.get('scenario')} n_sw={row.get('n_sw')}: {msg}")
    else:
        logger.info(f"[VALIDATE] Model and simulation agree on all {len(rows)} rows")

    return warnings
