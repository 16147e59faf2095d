# src/topologyParser.py
import logging
import os
from typing import BinaryIO, Union

from src.exceptions import TopologyError
from src.parsers import graphmlParser, jsonParser
from src.topology import Topology
from src.utils.geoHelper import DEFAULT_SPEED_KM_PER_MS

logger = logging.getLogger(__name__)

TOPOLOGY_PARSERS = {
    ".graphml": graphmlParser,
    ".xml": graphmlParser,
    ".json": jsonParser,
}


def loadTopology(filePath: str, speed: float = DEFAULT_SPEED_KM_PER_MS) -> Topology:
    """Pick the parser from the file extension and load a connected Topology."""
    if not os.path.exists(filePath):
        raise TopologyError(f"Topology file {filePath} not found")

    extension = os.path.splitext(filePath)[1].lower()
    parserModule = TOPOLOGY_PARSERS.get(extension)
    if parserModule is None:
        logger.warning(f"[LOAD] Unknown extension '{extension}', trying GraphML")
        parserModule = graphmlParser

    logger.info(f"[LOAD] Parsing {filePath} with {parserModule.__name__.rsplit('.', 1)[-1]}")
    return parserModule.parse(filePath, speed=speed)


def loadGraphml(source: Union[str, BinaryIO], speed: float = DEFAULT_SPEED_KM_PER_MS) -> Topology:
    return graphmlParser.parse(source, speed=speed)
