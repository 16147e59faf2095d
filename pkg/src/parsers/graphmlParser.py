# src/parsers/graphmlParser.py
"""
GraphML parser for Internet Topology Zoo files.

Node data keys used: "label", "Latitude", "Longitude".
Edge data key used: "latency_ms" (explicit one-way latency, decimal string).
Every other attribute (LinkSpeed, LinkLabel, ...) is ignored.
"""

import logging
import os
from typing import BinaryIO, List, Optional, Union

import networkx as nx

from src.exceptions import TopologyError
from src.topology import Node, Topology, buildTopology
from src.utils.geoHelper import DEFAULT_SPEED_KM_PER_MS

logger = logging.getLogger(__name__)

LATENCY_KEY = "latency_ms"


def _toFloat(value) -> Optional[float]:
    if value is None:
        return None
    try:
        return float(str(value).strip())
    except ValueError:
        return None


def parse(source: Union[str, os.PathLike, BinaryIO], speed: float = DEFAULT_SPEED_KM_PER_MS) -> Topology:
    """Parse a GraphML path or byte stream into a connected Topology."""
    try:
        g = nx.read_graphml(source, force_multigraph=True)
    except Exception as e:
        raise TopologyError(f"Could not parse GraphML: {e}") from e

    if isinstance(source, (str, os.PathLike)):
        fallbackName = os.path.splitext(os.path.basename(source))[0]
    else:
        fallbackName = "graphml"
    name = str(g.graph.get("Network") or g.graph.get("label") or fallbackName)
    logger.info(f"[LOAD] GraphML '{name}' with {g.number_of_nodes()} nodes")

    idOf = {}
    nodes: List[Node] = []
    for rawId, data in g.nodes(data=True):
        idOf[rawId] = len(nodes)
        lat = _toFloat(data.get("Latitude"))
        lon = _toFloat(data.get("Longitude"))
        if lat is None or lon is None:
            lat = lon = None
            logger.debug(f"[LOAD] Node {rawId} has no coordinates")
        nodes.append(Node(id=len(nodes), label=str(data.get("label", rawId)), latitude=lat, longitude=lon))

    rawEdges = []
    for u, v, data in g.edges(data=True):
        latency = _toFloat(data.get(LATENCY_KEY))
        rawEdges.append((idOf[u], idOf[v], latency))

    return buildTopology(name, nodes, rawEdges, speed)
