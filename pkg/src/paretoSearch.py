# src/paretoSearch.py
"""
Pareto frontiers of controller placements over (avg Sw-Ctr, avg Ctr-Ctr).

Searches:
- exaPlace: every C-subset of the N switches.
- rndPlace: i_max uniformly random placements.
- evoPlace: random placements, each successful one perturbed towards a
  smaller Ctr-Ctr delay until the perturbation stops being Pareto.

Domination is weak: a point with identical delays to a member is rejected,
which keeps the evolutionary inner loop finite.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from src import settings
from src.exceptions import EnumerationCapError, ModelError
from src.placementMetrics import DelayPoint, Placement, evaluatePlacement, placementCount, validatePlacement
from src.topology import DelayMatrix, Topology, shortestPathNodes

logger = logging.getLogger(__name__)


def dominates(a: DelayPoint, b: DelayPoint) -> bool:
    """Weak domination: a is no worse than b on both delays."""
    return a.swCtr <= b.swCtr and a.ctrCtr <= b.ctrCtr


class ParetoSet:
    """Mutable set of mutually non-dominated delay points."""

    def __init__(self, points: Iterable[DelayPoint] = ()):
        self._points: List[DelayPoint] = []
        for pt in points:
            self.addPrune(pt)

    def addPrune(self, candidate: DelayPoint) -> bool:
        for member in self._points:
            if dominates(member, candidate):
                return False
        self._points = [m for m in self._points if not dominates(candidate, m)]
        self._points.append(candidate)
        return True

    @property
    def points(self) -> List[DelayPoint]:
        """Members sorted by ascending Sw-Ctr (hence descending Ctr-Ctr)."""
        return sorted(self._points, key=lambda pt: (pt.swCtr, pt.ctrCtr))

    def delays(self) -> List[Tuple[float, float]]:
        return [pt.delays for pt in self.points]

    def isValid(self) -> bool:
        for a, b in itertools.permutations(self._points, 2):
            if dominates(a, b):
                return False
        return True

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[DelayPoint]:
        return iter(self.points)

    def __bool__(self) -> bool:
        return bool(self._points)


@dataclass(frozen=True)
class SearchBudget:
    iMax: int
    seed: int = 0

    def __post_init__(self):
        if self.iMax < 1:
            raise ModelError(f"i_max must be at least 1, got {self.iMax}")


@dataclass
class SearchStats:
    evaluated: int = 0
    perturbations: int = 0
    samplingFraction: float = 0.0


class ExtremeGains(NamedTuple):
    swRatio: float
    ccRatio: float
    infinite: bool


def mergeFrontiers(sets: Iterable[ParetoSet]) -> ParetoSet:
    """Fold several frontiers into one; the result does not depend on their order."""
    allPoints = [pt for s in sets for pt in s.points]
    allPoints.sort(key=lambda pt: (pt.swCtr, pt.ctrCtr, pt.placement))
    return ParetoSet(allPoints)


def _exaChunk(matrix: np.ndarray, c: int, first: int) -> List[DelayPoint]:
    d = DelayMatrix(matrix)
    frontier = ParetoSet()
    for rest in itertools.combinations(range(first + 1, d.size), c - 1):
        frontier.addPrune(evaluatePlacement(d, (first,) + rest))
    return frontier.points


def exaPlace(
    d: DelayMatrix,
    c: int,
    cap: Optional[int] = None,
    workers: int = 1,
    onPoint: Optional[Callable[[DelayPoint], None]] = None,
) -> ParetoSet:
    """Exact frontier by enumerating every placement once."""
    total = placementCount(d.size, c)
    if cap is None:
        cap = settings.getEnumerationCap()
    if total > cap:
        raise EnumerationCapError(total, cap)

    logger.info(f"[SEARCH] Exa-Place: {total} placements of {c} controllers on {d.size} nodes")
    if workers > 1 and onPoint is None and c > 1:
        firsts = range(d.size - c + 1)
        matrix = np.array(d.d)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_exaChunk, itertools.repeat(matrix), itertools.repeat(c), firsts))
        frontier = mergeFrontiers(ParetoSet(points) for points in chunks)
    else:
        frontier = ParetoSet()
        for p in itertools.combinations(range(d.size), c):
            point = evaluatePlacement(d, p)
            if onPoint is not None:
                onPoint(point)
            frontier.addPrune(point)

    logger.info(f"[SEARCH] Exa-Place frontier has {len(frontier)} points")
    return frontier


def randomPlacement(n: int, c: int, rng: np.random.Generator) -> Placement:
    """First c entries of a uniform permutation of 0..n-1 (partial Knuth shuffle)."""
    if not 1 <= c <= n:
        raise ModelError(f"Cannot draw {c} controllers out of {n} nodes")
    swapped = {}
    placement = []
    for k in range(c):
        j = int(rng.integers(k, n))
        atK = swapped.get(k, k)
        atJ = swapped.get(j, j)
        swapped[j] = atK
        placement.append(atJ)
    return tuple(placement)


def rndPlace(d: DelayMatrix, c: int, budget: SearchBudget, stats: Optional[SearchStats] = None) -> ParetoSet:
    rng = np.random.default_rng(budget.seed)
    frontier = ParetoSet()
    for _ in range(budget.iMax):
        frontier.addPrune(evaluatePlacement(d, randomPlacement(d.size, c, rng)))

    if stats is not None:
        stats.evaluated += budget.iMax
        stats.samplingFraction = budget.iMax / placementCount(d.size, c)
    logger.info(f"[SEARCH] Rnd-Place seed={budget.seed} i_max={budget.iMax}: {len(frontier)} points")
    return frontier


def decreaseCtrCtrDelay(p: Placement, d: DelayMatrix, t: Topology) -> Placement:
    """
    Move the controller farthest from the others one hop towards its nearest
    peer. Returns p unchanged when the hop lands on an occupied switch.
    """
    p = validatePlacement(p, d.size)
    if len(p) < 2:
        raise ModelError("Perturbation needs at least two controllers")

    sub = d[np.ix_(p, p)]
    spread = sub.sum(axis=1)
    farthest = int(np.argmax(spread))

    nearest = None
    for c in range(len(p)):
        if c == farthest:
            continue
        if nearest is None or sub[farthest, c] < sub[farthest, nearest]:
            nearest = c

    path = shortestPathNodes(t, p[farthest], p[nearest], d)
    hop = path[1]
    if hop in p:
        return p
    moved = list(p)
    moved[farthest] = hop
    return tuple(moved)


def evoPlace(
    d: DelayMatrix,
    c: int,
    budget: SearchBudget,
    t: Topology,
    stats: Optional[SearchStats] = None,
) -> ParetoSet:
    rng = np.random.default_rng(budget.seed)
    frontier = ParetoSet()
    evaluated = perturbations = 0

    for _ in range(budget.iMax):
        placement = randomPlacement(d.size, c, rng)
        evaluated += 1
        added = frontier.addPrune(evaluatePlacement(d, placement))
        while added and c >= 2:
            perturbed = decreaseCtrCtrDelay(placement, d, t)
            if perturbed == placement:
                break
            perturbations += 1
            evaluated += 1
            placement = perturbed
            added = frontier.addPrune(evaluatePlacement(d, placement))

    if stats is not None:
        stats.evaluated += evaluated
        stats.perturbations += perturbations
        stats.samplingFraction = budget.iMax / placementCount(d.size, c)
    logger.info(
        f"[SEARCH] Evo-Place seed={budget.seed} i_max={budget.iMax}: {len(frontier)} points, "
        f"{perturbations} perturbations"
    )
    return frontier


def _requireNonEmpty(*sets: ParetoSet):
    for s in sets:
        if not s:
            raise ModelError("Frontier is empty")


def _stairSwAt(optimal: List[DelayPoint], ctrCtr: float) -> float:
    for pt in optimal:
        if pt.ctrCtr <= ctrCtr:
            return pt.swCtr
    return optimal[-1].swCtr


def _stairCcAt(optimal: List[DelayPoint], swCtr: float) -> float:
    best = optimal[0].ctrCtr
    for pt in optimal:
        if pt.swCtr > swCtr:
            break
        best = pt.ctrCtr
    return best


def frontierErrors(optimal: ParetoSet, approx: ParetoSet) -> Tuple[float, float]:
    """Mean Sw-Ctr and Ctr-Ctr distance of approx points above the optimal staircase."""
    _requireNonEmpty(optimal, approx)
    stairs = optimal.points
    swErrs = []
    ccErrs = []
    for pt in approx.points:
        swErrs.append(max(0.0, pt.swCtr - _stairSwAt(stairs, pt.ctrCtr)))
        ccErrs.append(max(0.0, pt.ctrCtr - _stairCcAt(stairs, pt.swCtr)))
    return float(np.mean(swErrs)), float(np.mean(ccErrs))


def frontierMeans(frontier: ParetoSet) -> Tuple[float, float]:
    _requireNonEmpty(frontier)
    delays = np.array(frontier.delays())
    return float(delays[:, 0].mean()), float(delays[:, 1].mean())


def _ratio(num: float, den: float) -> Tuple[float, bool]:
    if den == 0:
        return (1.0, False) if num == 0 else (float("inf"), True)
    return num / den, False


def extremeGains(frontier: ParetoSet) -> ExtremeGains:
    """Sw-Ctr increase and Ctr-Ctr decrease between the two extreme points."""
    _requireNonEmpty(frontier)
    points = frontier.points
    p1, p2 = points[0], points[-1]
    if p1 is p2:
        return ExtremeGains(1.0, 1.0, False)
    swRatio, swInf = _ratio(p2.swCtr, p1.swCtr)
    ccRatio, ccInf = _ratio(p1.ctrCtr, p2.ctrCtr)
    return ExtremeGains(swRatio, ccRatio, swInf or ccInf)


def ctrCtrReductionFactor(frontier: ParetoSet, slack: float = 2.0) -> float:
    """Ctr-Ctr gain available when the Sw-Ctr delay may grow by `slack`."""
    _requireNonEmpty(frontier)
    points = frontier.points
    first = points[0]
    eligible = [pt for pt in points if pt.swCtr <= slack * first.swCtr]
    chosen = min(eligible, key=lambda pt: pt.ctrCtr)
    ratio, _ = _ratio(first.ctrCtr, chosen.ctrCtr)
    return ratio
