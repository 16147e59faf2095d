# src/utils/geoHelper.py
"""Great-circle distances and the propagation delay derived from them."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from src.exceptions import TopologyError

if TYPE_CHECKING:
    from src.topology import Node

EARTH_RADIUS_KM = 6371.0
DEFAULT_SPEED_KM_PER_MS = 200.0  # about 2/3 of c, light in fiber


def haversineKm(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Distance in km between two points given in degrees."""
    lat1Rad = math.radians(lat1)
    lat2Rad = math.radians(lat2)
    dlat = math.radians(lat2 - lat1)
    dlon = math.radians(lon2 - lon1)

    a = math.sin(dlat / 2) ** 2 + math.cos(lat1Rad) * math.cos(lat2Rad) * math.sin(dlon / 2) ** 2
    c = 2 * math.asin(min(1.0, math.sqrt(a)))
    return EARTH_RADIUS_KM * c


def geoLatency(a: "Node", b: "Node", speed: float = DEFAULT_SPEED_KM_PER_MS) -> float:
    """One-way propagation delay in ms between two nodes with coordinates."""
    if speed <= 0:
        raise TopologyError(f"Propagation speed must be positive, got {speed}")
    if not a.hasCoordinates() or not b.hasCoordinates():
        missing = a.label if not a.hasCoordinates() else b.label
        raise TopologyError(f"Node '{missing}' has no coordinates to derive latency from")
    return haversineKm(a.latitude, a.longitude, b.latitude, b.longitude) / speed
