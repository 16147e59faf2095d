# src/parsers/jsonParser.py
"""
JSON topology parser. Mirrors the Topology fields:

{
    "name": "toy",
    "nodes": [{"id": 0, "label": "Turin", "latitude": 45.07, "longitude": 7.68}, ...],
    "edges": [{"source": 0, "target": 1, "latency_ms": 0.63}, ...]
}

"latency_ms" is optional per edge; when absent it comes from coordinates.
"""

import json
import logging
import os
from typing import BinaryIO, Union

from src.exceptions import TopologyError
from src.topology import Node, Topology, buildTopology
from src.utils.geoHelper import DEFAULT_SPEED_KM_PER_MS

logger = logging.getLogger(__name__)


def parse(source: Union[str, os.PathLike, BinaryIO], speed: float = DEFAULT_SPEED_KM_PER_MS) -> Topology:
    try:
        if isinstance(source, (str, os.PathLike)):
            with open(source, "r", encoding="utf-8") as f:
                doc = json.load(f)
            fallbackName = os.path.splitext(os.path.basename(source))[0]
        else:
            doc = json.load(source)
            fallbackName = "json"
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise TopologyError(f"Could not parse JSON topology: {e}") from e

    try:
        rawNodes = sorted(doc["nodes"], key=lambda n: int(n["id"]))
        nodes = [
            Node(
                id=int(n["id"]),
                label=str(n.get("label", n["id"])),
                latitude=None if n.get("latitude") is None else float(n["latitude"]),
                longitude=None if n.get("longitude") is None else float(n["longitude"]),
            )
            for n in rawNodes
        ]
        rawEdges = [
            (
                int(e["source"]),
                int(e["target"]),
                None if e.get("latency_ms") is None else float(e["latency_ms"]),
            )
            for e in doc.get("edges", [])
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise TopologyError(f"Malformed JSON topology: {e}") from e

    for u, v, _ in rawEdges:
        if not (0 <= u < len(nodes) and 0 <= v < len(nodes)):
            raise TopologyError(f"Edge ({u},{v}) references an unknown node")

    return buildTopology(str(doc.get("name", fallbackName)), nodes, rawEdges, speed)
