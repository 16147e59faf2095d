# src/reactionModels.py
"""
Controller reactivity as perceived by the switches.

- MDO (multiple data ownership): the master answers locally, 2 * d_sw-ctr.
- SDO (single data ownership, Raft): the master forwards to the data owner
  (leader), which commits after a majority of followers acknowledged.
- l2-switch flow setup: one SDO update per switch on the path, plus one more
  at the last switch for the ARP reply.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import settings
from src.exceptions import ModelError
from src.placementMetrics import Placement, assignMasters, avgSwCtrDelay, validatePlacement
from src.topology import DelayMatrix, Node, Topology, allPairsDelays, buildTopology

logger = logging.getLogger(__name__)

MAJORITY_RULES = ("paper", "raft")
SCENARIO_SWITCH_RANGE = (3, 36)


@dataclass(frozen=True, eq=False)
class ClusterView:
    placement: Placement
    leader: int
    masters: np.ndarray

    @classmethod
    def build(
        cls,
        d: DelayMatrix,
        placement: Sequence[int],
        leader: int = 0,
        masters: Optional[Sequence[int]] = None,
    ) -> "ClusterView":
        p = validatePlacement(placement, d.size)
        if not 0 <= leader < len(p):
            raise ModelError(f"Leader index {leader} outside [0, {len(p)})")
        if masters is None:
            masterArr = assignMasters(d, p)
        else:
            masterArr = np.asarray(masters, dtype=int)
            if masterArr.shape != (d.size,) or masterArr.min() < 0 or masterArr.max() >= len(p):
                raise ModelError("Master assignment must map every switch to a controller index")
        return cls(placement=p, leader=leader, masters=masterArr)

    @property
    def size(self) -> int:
        return len(self.placement)

    @property
    def leaderNode(self) -> int:
        return self.placement[self.leader]

    def masterNode(self, switch: int) -> int:
        return self.placement[int(self.masters[switch])]

    def followers(self) -> List[int]:
        return [c for c in range(self.size) if c != self.leader]


@dataclass(frozen=True)
class FlowScenario:
    """Switch path with the last switch repeated once, host edge delays and t_c."""

    path: Tuple[int, ...]
    hostEdgeDelays: Tuple[float, float] = (0.0, 0.0)
    tc: float = 20.0

    def __post_init__(self):
        if not self.path:
            raise ModelError("Flow path is empty")
        if len(self.path) < 2 or self.path[-1] != self.path[-2]:
            raise ModelError(f"The last switch must appear twice in the path, got {self.path}")
        if self.tc < 0 or min(self.hostEdgeDelays) < 0:
            raise ModelError("t_c and host edge delays must be non-negative")

    @classmethod
    def fromRoute(cls, route: Sequence[int], hostEdgeDelays=(0.0, 0.0), tc: float = 20.0) -> "FlowScenario":
        if not route:
            raise ModelError("Flow path is empty")
        return cls(path=tuple(route) + (route[-1],), hostEdgeDelays=tuple(hostEdgeDelays), tc=tc)

    @property
    def route(self) -> Tuple[int, ...]:
        return self.path[:-1]

    @property
    def updates(self) -> int:
        return len(self.path)


@dataclass
class OwnerSweep:
    placement: Placement
    reactions: List[Tuple[int, float]]
    optimalLeader: int
    minFactor: float
    maxFactor: float
    mdoReaction: float = field(default=0.0)


def _checkRule(rule: str):
    if rule not in MAJORITY_RULES:
        raise ModelError(f"Unknown majority rule '{rule}', expected one of {MAJORITY_RULES}")


def mdoReaction(dSwCtr: float) -> float:
    if dSwCtr < 0:
        raise ModelError(f"Switch-to-controller delay must be non-negative, got {dSwCtr}")
    return 2.0 * dSwCtr


def majorityIndex(c: int, rule: str = "paper") -> int:
    """1-based rank of the follower whose ack releases the commit; 0 without followers."""
    _checkRule(rule)
    followers = c - 1
    if followers <= 0:
        return 0
    if rule == "paper":
        k = c // 2 + 1
    else:
        k = max(1, c // 2)
    return min(k, followers)


def majorityAckDelay(d: DelayMatrix, v: ClusterView, rule: str = "paper") -> float:
    k = majorityIndex(v.size, rule)
    if k == 0:
        return 0.0
    leaderNode = v.leaderNode
    followerDelays = sorted(float(d[leaderNode, v.placement[c]]) for c in v.followers())
    return followerDelays[k - 1]


def sdoReaction(d: DelayMatrix, v: ClusterView, switch: int, rule: str = "paper") -> float:
    if not 0 <= switch < d.size:
        raise ModelError(f"Unknown switch {switch}")
    masterNode = v.masterNode(switch)
    dSwCtr = float(d[switch, masterNode])
    dCtrLeader = float(d[masterNode, v.leaderNode])
    return 2.0 * dSwCtr + 2.0 * dCtrLeader + 2.0 * majorityAckDelay(d, v, rule)


def avgSdoReaction(d: DelayMatrix, v: ClusterView, rule: str = "paper") -> float:
    switches = np.arange(d.size)
    masterNodes = np.asarray(v.placement)[v.masters]
    perSwitch = 2.0 * d[switches, masterNodes] + 2.0 * d[masterNodes, v.leaderNode]
    return float(perSwitch.mean()) + 2.0 * majorityAckDelay(d, v, rule)


def avgMdoReaction(d: DelayMatrix, p: Placement) -> float:
    return 2.0 * avgSwCtrDelay(d, p)


def arpSetupTime(d: DelayMatrix, v: ClusterView, s: FlowScenario, rule: str = "paper") -> float:
    """Flow setup time (ARP reaction time) of the l2-switch application."""
    for switch in s.path:
        if not 0 <= switch < d.size:
            raise ModelError(f"Path switch {switch} has no master in this cluster view")

    route = s.route
    interSwitch = sum(float(d[u, w]) for u, w in zip(route, route[1:]))
    hostToHost = s.hostEdgeDelays[0] + interSwitch + s.hostEdgeDelays[1]

    controlTerms = 0.0
    for switch in s.path:
        masterNode = v.masterNode(switch)
        controlTerms += 2.0 * float(d[switch, masterNode]) + 2.0 * float(d[masterNode, v.leaderNode])

    updates = s.updates
    return 2.0 * hostToHost + controlTerms + 2.0 * updates * majorityAckDelay(d, v, rule) + updates * s.tc


def _reductionFactors(values: Sequence[float]) -> Tuple[float, float]:
    ordered = sorted(values)
    if len(ordered) == 1:
        return 1.0, 1.0
    lowest = ordered[0]
    if lowest == 0:
        minFactor = 1.0 if ordered[1] == 0 else float("inf")
        maxFactor = 1.0 if ordered[-1] == 0 else float("inf")
        return minFactor, maxFactor
    return ordered[1] / lowest, ordered[-1] / lowest


def ownerSweep(d: DelayMatrix, p: Placement, rule: str = "paper") -> OwnerSweep:
    """Average SDO reaction for every choice of data owner."""
    p = validatePlacement(p, d.size)
    masters = assignMasters(d, p)
    reactions = []
    for leader in range(len(p)):
        view = ClusterView(placement=p, leader=leader, masters=masters)
        reactions.append((leader, avgSdoReaction(d, view, rule)))

    best = min(reactions, key=lambda item: (item[1], item[0]))[0]
    minFactor, maxFactor = _reductionFactors([r for _, r in reactions])
    logger.debug(f"[REACT] Owner sweep {p}: best leader {best}, factors {minFactor:.3f}/{maxFactor:.3f}")
    return OwnerSweep(
        placement=p,
        reactions=reactions,
        optimalLeader=best,
        minFactor=minFactor,
        maxFactor=maxFactor,
        mdoReaction=avgMdoReaction(d, p),
    )


def scenarioSetup(
    name: str,
    nSw: int,
    scenarios: Optional[Dict[str, Dict]] = None,
    hypervisorDelay: float = settings.BUILTIN_DEFAULTS["hypervisorDelayMs"],
) -> Tuple[Topology, DelayMatrix, ClusterView, FlowScenario]:
    """
    Testbed scenario as a topology: a zero-delay chain of nSw switches (one
    host per end), the master follower F1 at d_sw-ctr from the chain, the
    leader L at d_ctr-ctr from F1 and the second follower F2 next to L.
    """
    if scenarios is None:
        scenarios = settings.loadScenarios()
    key = name.upper()
    if key not in scenarios:
        raise ModelError(f"Unknown scenario '{name}', expected one of {sorted(scenarios)}")
    low, high = SCENARIO_SWITCH_RANGE
    if not low <= nSw <= high:
        raise ModelError(f"n_sw must be in [{low}, {high}], got {nSw}")

    params = scenarios[key]
    swCtr = float(params["swCtrMs"])
    ctrCtr = float(params["ctrCtrMs"])
    tc = float(params.get("tcMs", settings.BUILTIN_DEFAULTS["tcMs"]))

    f1, leader, f2 = nSw, nSw + 1, nSw + 2
    nodes = [Node(id=i, label=f"s{i + 1}") for i in range(nSw)]
    nodes += [Node(id=f1, label="F1"), Node(id=leader, label="L"), Node(id=f2, label="F2")]
    edges = [(i, i + 1, 0.0) for i in range(nSw - 1)]
    edges += [(0, f1, swCtr), (f1, leader, ctrCtr), (leader, f2, hypervisorDelay)]

    topology = buildTopology(f"scenario-{key}-{nSw}", nodes, edges)
    d = allPairsDelays(topology)
    view = ClusterView.build(d, (leader, f1, f2), leader=0)
    flow = FlowScenario.fromRoute(list(range(nSw)), tc=tc)
    return topology, d, view, flow


def scenarioTable(name: str, nSw: int, scenarios: Optional[Dict[str, Dict]] = None, rule: str = "paper") -> float:
    """Flow setup time predicted for a testbed scenario with nSw switches."""
    _, d, view, flow = scenarioSetup(name, nSw, scenarios)
    predicted = arpSetupTime(d, view, flow, rule)
    logger.debug(f"[REACT] Scenario {name.upper()} n_sw={nSw}: {predicted:.3f} ms")
    return predicted
