import os

import numpy as np
import pytest
from hypothesis import strategies as st

from src.topology import Node, allPairsDelays, buildTopology, linearTopology

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")
ZOO_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "topologies")


def goldenPath(name: str) -> str:
    return os.path.join(GOLDEN_DIR, name)


def zooPath(name: str) -> str:
    """Topology Zoo file under data/topologies/, skipping the test when absent."""
    path = os.path.join(ZOO_DIR, f"{name}.graphml")
    if not os.path.exists(path):
        pytest.skip(f"{name}.graphml not available under {ZOO_DIR}")
    return path


@pytest.fixture
def linear8():
    return linearTopology(8, 1.0)


@pytest.fixture
def linear8Delays(linear8):
    return allPairsDelays(linear8)


@pytest.fixture
def triangle():
    nodes = [Node(id=i, label=f"t{i}") for i in range(3)]
    return buildTopology("triangle", nodes, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def randomConnectedTopology(n: int, extraEdges: int, seed: int):
    """Random spanning tree plus a few chords, integer-ms latencies."""
    rng = np.random.default_rng(seed)
    edges = [(i, int(rng.integers(0, i)), float(rng.integers(1, 10))) for i in range(1, n)]
    for _ in range(extraEdges):
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False)) if n > 1 else (0, 0)
        if u != v:
            edges.append((u, v, float(rng.integers(1, 10))))
    nodes = [Node(id=i, label=f"n{i}") for i in range(n)]
    return buildTopology(f"random{n}-{seed}", nodes, edges)


@st.composite
def topologies(draw, minNodes: int = 3, maxNodes: int = 9):
    n = draw(st.integers(min_value=minNodes, max_value=maxNodes))
    extra = draw(st.integers(min_value=0, max_value=n))
    seed = draw(st.integers(min_value=0, max_value=2**16))
    return randomConnectedTopology(n, extra, seed)
