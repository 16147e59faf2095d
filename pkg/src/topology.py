# src/topology.py
"""
Network topology, all-pairs delay matrix and shortest paths.

Every other module works on the dense node ids 0..N-1 defined here:
- Topology: immutable switch graph with per-edge one-way latency (ms).
- DelayMatrix: shortest-path closure of the edge latencies.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from src.exceptions import TopologyError
from src.utils.geoHelper import DEFAULT_SPEED_KM_PER_MS, geoLatency

logger = logging.getLogger(__name__)

PATH_TOLERANCE_MS = 1e-9

Edge = Tuple[int, int, float]


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    latitude: Optional[float] = None
    longitude: Optional[float] = None

    def hasCoordinates(self) -> bool:
        return self.latitude is not None and self.longitude is not None


@dataclass(frozen=True)
class Topology:
    name: str
    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        if not self.nodes:
            raise TopologyError(f"Topology '{self.name}' has zero nodes")

        for expected, node in enumerate(self.nodes):
            if node.id != expected:
                raise TopologyError(f"Node ids must be 0..N-1 without gaps, found {node.id} at position {expected}")
            if node.latitude is not None and not -90.0 <= node.latitude <= 90.0:
                raise TopologyError(f"Node '{node.label}' latitude {node.latitude} out of range")
            if node.longitude is not None and not -180.0 <= node.longitude <= 180.0:
                raise TopologyError(f"Node '{node.label}' longitude {node.longitude} out of range")

        seen = set()
        for u, v, latency in self.edges:
            if u == v:
                raise TopologyError(f"Self-loop on node {u}")
            if not (0 <= u < self.size and 0 <= v < self.size):
                raise TopologyError(f"Edge ({u},{v}) references an unknown node")
            if not math.isfinite(latency) or latency < 0:
                raise TopologyError(f"Edge ({u},{v}) has invalid latency {latency}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TopologyError(f"Edge ({u},{v}) appears more than once")
            seen.add(key)

        if not nx.is_connected(self.graph):
            parts = nx.number_connected_components(self.graph)
            raise TopologyError(f"Topology '{self.name}' is disconnected ({parts} components)")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph(name=self.name)
        for node in self.nodes:
            g.add_node(node.id, label=node.label)
        for u, v, latency in self.edges:
            g.add_edge(u, v, latency=latency)
        return g

    def latency(self, u: int, v: int) -> float:
        return self.graph.edges[u, v]["latency"]


@dataclass(frozen=True, eq=False)
class DelayMatrix:
    """N x N one-way delays in ms; d[i][j] is the shortest-path latency."""

    d: np.ndarray

    def __post_init__(self):
        self.d.setflags(write=False)

    @property
    def size(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, key):
        return self.d[key]

    def scaled(self, factor: float) -> "DelayMatrix":
        return DelayMatrix(np.array(self.d) * factor)


def buildTopology(
    name: str,
    nodes: Sequence[Node],
    rawEdges: Iterable[Tuple[int, int, Optional[float]]],
    speed: float = DEFAULT_SPEED_KM_PER_MS,
) -> Topology:
    """
    Assemble a Topology from parsed nodes and edges.
    Explicit latencies win; missing ones come from the endpoint coordinates.
    Parallel edges collapse to the minimum latency, self-loops are dropped.
    """
    best: Dict[Tuple[int, int], float] = {}
    for u, v, latency in rawEdges:
        if u == v:
            logger.warning(f"[LOAD] Dropping self-loop on node {nodes[u].label}")
            continue
        if latency is None:
            latency = geoLatency(nodes[u], nodes[v], speed)
        key = (min(u, v), max(u, v))
        if key in best:
            logger.debug(f"[LOAD] Parallel edge {key}, keeping minimum latency")
            latency = min(latency, best[key])
        best[key] = float(latency)

    edges = tuple((u, v, lat) for (u, v), lat in sorted(best.items()))
    topology = Topology(name=name, nodes=tuple(nodes), edges=edges)
    logger.info(f"[LOAD] Topology '{name}': {topology.size} nodes, {len(edges)} edges")
    return topology


def linearTopology(n: int, hopDelay: float) -> Topology:
    """Chain of n switches, each hop with the same latency."""
    if n < 1:
        raise TopologyError(f"A linear topology needs at least one node, got {n}")
    if hopDelay <= 0:
        raise TopologyError(f"Hop delay must be positive, got {hopDelay}")
    nodes = tuple(Node(id=i, label=f"s{i}") for i in range(n))
    edges = tuple((i, i + 1, float(hopDelay)) for i in range(n - 1))
    return Topology(name=f"linear{n}", nodes=nodes, edges=edges)


def allPairsDelays(t: Topology) -> DelayMatrix:
    d = nx.floyd_warshall_numpy(t.graph, nodelist=list(range(t.size)), weight="latency")
    d = np.asarray(d, dtype=float)
    if not np.isfinite(d).all():
        raise TopologyError(f"Topology '{t.name}' has unreachable node pairs")
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    logger.debug(f"[DELAYS] '{t.name}': diameter {d.max():.3f} ms")
    return DelayMatrix(d)


def shortestPathNodes(t: Topology, i: int, j: int, delays: Optional[DelayMatrix] = None) -> List[int]:
    """
    Node sequence from i to j realizing d[i][j].
    Among tight next hops the smallest id is taken.
    """
    for node in (i, j):
        if not 0 <= node < t.size:
            raise TopologyError(f"Unknown node id {node}")
    if delays is None:
        delays = allPairsDelays(t)
    if not math.isfinite(delays[i, j]):
        raise TopologyError(f"Node {j} is unreachable from {i}")

    path = [i]
    visited = {i}
    current = i
    while current != j:
        nextHop = None
        for neighbor in sorted(t.graph.neighbors(current)):
            if neighbor in visited:
                continue
            viaNeighbor = t.latency(current, neighbor) + delays[neighbor, j]
            if abs(viaNeighbor - delays[current, j]) <= PATH_TOLERANCE_MS:
                nextHop = neighbor
                break
        if nextHop is None:
            # only reachable through zero-latency cycles
            logger.debug(f"[DELAYS] Greedy path {i}->{j} stuck at {current}, using Dijkstra")
            return nx.dijkstra_path(t.graph, i, j, weight="latency")
        path.append(nextHop)
        visited.add(nextHop)
        current = nextHop
    return path


def pathLatency(t: Topology, path: Sequence[int]) -> float:
    return sum(t.latency(u, v) for u, v in zip(path, path[1:]) if u != v)
