# src/placementMetrics.py
"""
Placements, master assignment and the two aggregate delays.

A placement is a tuple of C distinct node ids hosting the controllers.
Each controller sits on its switch with zero access latency.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
import pandas as pd

from src.exceptions import ModelError
from src.topology import DelayMatrix

logger = logging.getLogger(__name__)

Placement = Tuple[int, ...]
# masters[s] is the index in the placement of the controller serving switch s
MasterAssignment = np.ndarray

FRONTIER_COLUMNS = ["placement", "sw_ctr_ms", "ctr_ctr_ms"]


@dataclass(frozen=True)
class DelayPoint:
    swCtr: float
    ctrCtr: float
    placement: Placement

    @property
    def delays(self) -> Tuple[float, float]:
        return (self.swCtr, self.ctrCtr)

    def toRow(self) -> dict:
        return {
            "placement": ";".join(str(n) for n in self.placement),
            "sw_ctr_ms": self.swCtr,
            "ctr_ctr_ms": self.ctrCtr,
        }


def validatePlacement(placement: Sequence[int], n: int) -> Placement:
    p = tuple(int(x) for x in placement)
    if not 1 <= len(p) <= n:
        raise ModelError(f"Placement needs between 1 and {n} controllers, got {len(p)}")
    if len(set(p)) != len(p):
        raise ModelError(f"Two controllers cannot share a switch: {p}")
    for node in p:
        if not 0 <= node < n:
            raise ModelError(f"Controller node {node} outside [0, {n})")
    return p


def assignMasters(d: DelayMatrix, p: Placement) -> MasterAssignment:
    """masterOf[s] = index in p of the closest controller; ties go to the lowest index."""
    p = validatePlacement(p, d.size)
    return np.argmin(d[:, list(p)], axis=1)


def avgSwCtrDelay(d: DelayMatrix, p: Placement) -> float:
    p = validatePlacement(p, d.size)
    return float(d[:, list(p)].min(axis=1).mean())


def avgCtrCtrDelay(d: DelayMatrix, p: Placement) -> float:
    """Mean delay over unordered controller pairs, 0 for a single controller."""
    p = validatePlacement(p, d.size)
    if len(p) == 1:
        return 0.0
    sub = d[np.ix_(p, p)]
    upper = np.triu_indices(len(p), k=1)
    return float(sub[upper].mean())


def evaluatePlacement(d: DelayMatrix, p: Placement) -> DelayPoint:
    p = validatePlacement(p, d.size)
    return DelayPoint(swCtr=avgSwCtrDelay(d, p), ctrCtr=avgCtrCtrDelay(d, p), placement=p)


def placementCount(n: int, c: int) -> int:
    if c < 1 or n < 1:
        raise ModelError(f"Need N >= 1 and C >= 1, got N={n}, C={c}")
    if c > n:
        raise ModelError(f"Cannot place {c} controllers on {n} switches")
    return math.comb(n, c)


def pointsToFrame(points: Iterable[DelayPoint]) -> pd.DataFrame:
    rows = [pt.toRow() for pt in sorted(points, key=lambda pt: (pt.swCtr, pt.ctrCtr, pt.placement))]
    return pd.DataFrame(rows, columns=FRONTIER_COLUMNS)
