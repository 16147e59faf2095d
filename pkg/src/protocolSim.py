# src/protocolSim.py
"""
Message-level discrete-event simulation of the control plane, built on simpy.

SDO update (Raft), per switch event:
    1 update-event    switch -> master
    2 raft-request    master -> leader        (absent when master is leader)
    3 log-replication leader -> followers
    4 log-reply       followers -> leader     (commit on the majority-th reply)
    5 log-commit      leader -> followers
    6 response-event  master -> switch        (after t_c at the master)

MDO update: 1 and 6, plus asynchronous advertisements to the other controllers.

l2-switch flow: the ARP request is flooded on a shortest-path tree rooted at
the source switch; every switch on the route runs one SDO update before
forwarding, the last switch runs a second one for the ARP reply, then
flow-mods are installed and the reply travels back to the source host.

Delays are neglected everywhere except propagation and t_c.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Generator, List, Optional, Sequence, Tuple

import networkx as nx
import simpy

from src.exceptions import ModelError, TopologyError
from src.reactionModels import ClusterView, FlowScenario, majorityIndex
from src.topology import DelayMatrix, Topology

logger = logging.getLogger(__name__)

EVENT_KINDS = (
    "update-event",
    "raft-request",
    "log-replication",
    "log-reply",
    "log-commit",
    "response-event",
    "advertisement",
    "arp-request",
    "arp-reply",
    "flow-mod",
)


@dataclass(frozen=True)
class SimEvent:
    """A message; `time` is its receive time, `sentAt` its emission time."""

    time: float
    kind: str
    src: str
    dst: str
    seq: int
    sentAt: float

    def toRecord(self) -> dict:
        return {
            "time_ms": self.time,
            "kind": self.kind,
            "src": self.src,
            "dst": self.dst,
            "seq": self.seq,
            "sent_ms": self.sentAt,
        }


@dataclass
class EventTrace:
    events: List[SimEvent] = field(default_factory=list)
    reaction: Optional[float] = None

    def kinds(self) -> List[str]:
        return [e.kind for e in self.events]

    def ofKind(self, kind: str) -> List[SimEvent]:
        return [e for e in self.events if e.kind == kind]

    def toRecords(self) -> List[dict]:
        return [e.toRecord() for e in self.events]


def switchName(node: int) -> str:
    return f"sw{node}"


def controllerName(index: int) -> str:
    return f"ctr{index}"


class ControlPlaneSimulator:
    """
    One simpy environment per run. Every message is a process that sleeps for
    its propagation delay and is traced on arrival; protocol steps are
    processes that wait on those messages.
    """

    def __init__(self, d: DelayMatrix, view: ClusterView, rule: str = "paper"):
        self.d = d
        self.view = view
        self.rule = rule
        self.env = simpy.Environment()
        self.trace = EventTrace()
        self._seq = itertools.count()
        self._majority = majorityIndex(view.size, rule)

    @property
    def now(self) -> float:
        return float(self.env.now)

    def send(self, kind: str, src: str, dst: str, delay: float) -> simpy.Process:
        """Start a message; the returned process fires when it is received."""
        if delay < 0:
            raise ModelError(f"Negative delay {delay} for {kind}")
        return self.env.process(self._transmit(kind, src, dst, delay, next(self._seq)))

    def _transmit(self, kind: str, src: str, dst: str, delay: float, seq: int) -> Generator:
        sentAt = self.now
        yield self.env.timeout(delay)
        self.trace.events.append(SimEvent(time=self.now, kind=kind, src=src, dst=dst, seq=seq, sentAt=sentAt))

    def run(self, process: Generator) -> float:
        """Run `process` to completion, draining every message it left in flight."""
        done = self.env.process(process)
        self.env.run()
        self.trace.events.sort(key=lambda e: (e.time, e.seq))
        self.trace.reaction = float(done.value)
        return self.trace.reaction

    def _delay(self, u: int, v: int) -> float:
        return float(self.d[u, v])

    def _replicate(self, replies: List[int], committed: simpy.Event, follower: int) -> Generator:
        view = self.view
        name = controllerName(follower)
        leader = controllerName(view.leader)
        delay = self._delay(view.leaderNode, view.placement[follower])
        yield self.send("log-replication", leader, name, delay)
        yield self.send("log-reply", name, leader, delay)
        replies[0] += 1
        if replies[0] == self._majority:
            committed.succeed()

    def sdoUpdate(self, switch: int, tc: float) -> Generator:
        """Messages 1-6 for one switch event; returns when the response reaches the switch."""
        view = self.view
        masterIdx = int(view.masters[switch])
        masterNode = view.placement[masterIdx]
        leaderNode = view.leaderNode
        sw = switchName(switch)
        master = controllerName(masterIdx)
        leader = controllerName(view.leader)

        yield self.send("update-event", sw, master, self._delay(switch, masterNode))

        if view.size > 1:
            if masterIdx != view.leader:
                yield self.send("raft-request", master, leader, self._delay(masterNode, leaderNode))

            replies = [0]
            committed = self.env.event()
            for c in view.followers():
                self.env.process(self._replicate(replies, committed, c))
            yield committed

            commits = {
                c: self.send("log-commit", leader, controllerName(c), self._delay(leaderNode, view.placement[c]))
                for c in view.followers()
            }
            if masterIdx in commits:
                yield commits[masterIdx]

        yield self.env.timeout(tc)
        yield self.send("response-event", master, sw, self._delay(masterNode, switch))
        return self.now

    def mdoUpdate(self, switch: int) -> Generator:
        view = self.view
        masterIdx = int(view.masters[switch])
        masterNode = view.placement[masterIdx]
        sw = switchName(switch)
        master = controllerName(masterIdx)

        yield self.send("update-event", sw, master, self._delay(switch, masterNode))
        response = self.send("response-event", master, sw, self._delay(masterNode, switch))
        for c in range(view.size):
            if c != masterIdx:
                self.send("advertisement", master, controllerName(c), self._delay(masterNode, view.placement[c]))
        yield response
        return self.now


def _checkSwitch(d: DelayMatrix, switch: int):
    if not 0 <= switch < d.size:
        raise ModelError(f"Unknown switch {switch}")


def simulateSdoUpdate(d: DelayMatrix, v: ClusterView, switch: int, rule: str = "paper") -> Tuple[float, EventTrace]:
    _checkSwitch(d, switch)
    sim = ControlPlaneSimulator(d, v, rule)
    reaction = sim.run(sim.sdoUpdate(switch, 0.0))
    logger.debug(f"[SIM] SDO update at switch {switch}: {reaction:.6f} ms, {len(sim.trace.events)} messages")
    return reaction, sim.trace


def simulateMdoUpdate(d: DelayMatrix, v: ClusterView, switch: int) -> Tuple[float, EventTrace]:
    _checkSwitch(d, switch)
    sim = ControlPlaneSimulator(d, v)
    return sim.run(sim.mdoUpdate(switch)), sim.trace


def floodTree(t: Topology, root: int) -> Dict[int, int]:
    """
    Parent of every node in a shortest-path tree rooted at root.
    On ties the lowest-id parent settled before the node wins, so zero-latency
    edges cannot close a cycle.
    """
    preds, dist = nx.dijkstra_predecessor_and_distance(t.graph, root, weight="latency")
    settled = {node: rank for rank, node in enumerate(dist)}
    tree = {}
    for node, parents in preds.items():
        earlier = [p for p in parents if settled[p] < settled[node]]
        if earlier:
            tree[node] = min(earlier)
    return tree


def treeRoute(parents: Dict[int, int], src: int, dst: int) -> List[int]:
    route = [dst]
    while route[-1] != src:
        if route[-1] not in parents:
            raise TopologyError(f"Node {dst} is unreachable from {src}")
        route.append(parents[route[-1]])
    return route[::-1]


def equivalentFlowScenario(
    t: Topology,
    src: int,
    dst: int,
    tc: float,
    hostEdgeDelays: Sequence[float] = (0.0, 0.0),
) -> FlowScenario:
    """FlowScenario following the same route the simulated ARP request takes."""
    if src == dst:
        raise ModelError("Source and destination switches must differ")
    route = treeRoute(floodTree(t, src), src, dst)
    return FlowScenario.fromRoute(route, hostEdgeDelays=tuple(hostEdgeDelays), tc=tc)


def simulateL2switchFlow(
    t: Topology,
    d: DelayMatrix,
    v: ClusterView,
    src: int,
    dst: int,
    tc: float,
    hostEdgeDelays: Sequence[float] = (0.0, 0.0),
    rule: str = "paper",
) -> Tuple[float, EventTrace]:
    """Flow setup time of the l2-switch application between hosts at src and dst."""
    if src == dst:
        raise ModelError("Source and destination switches must differ")
    for node in (src, dst):
        _checkSwitch(d, node)

    parents = floodTree(t, src)
    route = treeRoute(parents, src, dst)
    onRoute = set(route)
    children: Dict[int, List[int]] = {}
    for node, parent in sorted(parents.items()):
        children.setdefault(parent, []).append(node)

    sim = ControlPlaneSimulator(d, v, rule)
    h1Delay, h2Delay = hostEdgeDelays

    def broadcast(node: int, child: int) -> Generator:
        yield sim.send("arp-request", switchName(node), switchName(child), float(d[node, child]))
        flood(child)

    def flood(node: int):
        # off-route branches only carry the broadcast, no controller round trip
        for child in children.get(node, []):
            if child not in onRoute:
                sim.env.process(broadcast(node, child))

    def flow() -> Generator:
        yield sim.send("arp-request", "h1", switchName(route[0]), h1Delay)
        for i, node in enumerate(route):
            yield sim.env.process(sim.sdoUpdate(node, tc))
            flood(node)
            if i == len(route) - 1:
                yield sim.send("arp-request", switchName(node), "h2", h2Delay)
            else:
                yield sim.send("arp-request", switchName(node), switchName(route[i + 1]),
                               float(d[node, route[i + 1]]))

        yield sim.send("arp-reply", "h2", switchName(route[-1]), h2Delay)
        yield sim.env.process(sim.sdoUpdate(route[-1], tc))
        for switch in route:
            masterIdx = int(v.masters[switch])
            sim.send("flow-mod", controllerName(masterIdx), switchName(switch),
                     float(d[v.placement[masterIdx], switch]))

        for i in range(len(route) - 1, 0, -1):
            yield sim.send("arp-reply", switchName(route[i]), switchName(route[i - 1]),
                           float(d[route[i], route[i - 1]]))
        yield sim.send("arp-reply", switchName(route[0]), "h1", h1Delay)
        return sim.now

    reaction = sim.run(flow())
    logger.debug(f"[SIM] l2-switch flow {src}->{dst}: {reaction:.6f} ms over {len(route)} switches")
    return reaction, sim.trace
