# src/settings.py
import json
import logging
import os
from typing import Dict

logger = logging.getLogger(__name__)

CONFIG_DIR = os.getenv("CTRPLACE_CONFIG_DIR", "config")
DEFAULTS_FILE = "defaults.json"
SCENARIOS_FILE = "scenarios.json"

BUILTIN_DEFAULTS = {
    "propagationSpeedKmPerMs": 200.0,
    "enumerationCap": 5_000_000,
    "tcMs": 20.0,
    "majorityRule": "paper",
    "outputDir": "data/reports",
    "hypervisorDelayMs": 0.25,
}


def loadJsonFile(filePath: str) -> Dict:
    if not os.path.exists(filePath):
        logger.warning(f"Config file {filePath} not found.")
        return {}
    try:
        with open(filePath, "r", encoding="utf-8") as f:
            return json.load(f)
    except Exception as e:
        logger.error(f"Failed to load {filePath}: {e}")
        return {}


def loadDefaults(configDir: str = CONFIG_DIR) -> Dict:
    """Built-in defaults overlaid with config/defaults.json and CTRPLACE_CAP."""
    defaults = dict(BUILTIN_DEFAULTS)
    defaults.update(loadJsonFile(os.path.join(configDir, DEFAULTS_FILE)))
    defaults["enumerationCap"] = getEnumerationCap(defaults["enumerationCap"])
    return defaults


def loadScenarios(configDir: str = CONFIG_DIR) -> Dict[str, Dict]:
    scenarios = loadJsonFile(os.path.join(configDir, SCENARIOS_FILE))
    return {name.upper(): params for name, params in scenarios.items()}


def getEnumerationCap(default: int = BUILTIN_DEFAULTS["enumerationCap"]) -> int:
    raw = os.getenv("CTRPLACE_CAP")
    if not raw:
        return int(default)
    try:
        cap = int(raw.replace("_", "").strip())
    except ValueError:
        logger.warning(f"Ignoring CTRPLACE_CAP={raw!r}: not an integer")
        return int(default)
    logger.debug(f"Enumeration cap overridden from environment: {cap}")
    return cap
