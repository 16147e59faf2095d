# src/exporter.py
import json
import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Iterable

import pandas as pd

logger = logging.getLogger(__name__)

REPORT_DIR = os.path.join("data", "reports")


@contextmanager
def _atomicPath(finalPath: str):
    """Yield a temp path next to finalPath; rename over it only on success."""
    directory = os.path.dirname(finalPath) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmpPath = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(finalPath)[1])
    os.close(fd)
    try:
        yield tmpPath
        os.replace(tmpPath, finalPath)
    finally:
        if os.path.exists(tmpPath):
            os.remove(tmpPath)


def exportReport(df: pd.DataFrame, filename: str, reportDir: str = REPORT_DIR, excel: bool = False) -> str:
    csvPath = os.path.join(reportDir, f"{filename}.csv")
    with _atomicPath(csvPath) as tmp:
        df.to_csv(tmp, index=False)

    if excel:
        excelPath = os.path.join(reportDir, f"{filename}.xlsx")
        with _atomicPath(excelPath) as tmp:
            df.to_excel(tmp, index=False, engine="openpyxl")
        logger.info(f"[EXPORT] Exported report: {csvPath} and {excelPath}")
    else:
        logger.info(f"[EXPORT] Exported report: {csvPath} ({len(df)} rows)")
    return csvPath


def exportJson(payload: dict, filename: str, reportDir: str = REPORT_DIR) -> str:
    path = os.path.join(reportDir, f"{filename}.json")
    with _atomicPath(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
    logger.info(f"[EXPORT] Exported {path}")
    return path


def exportTrace(records: Iterable[dict], path: str) -> str:
    """One JSON object per line."""
    count = 0
    with _atomicPath(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True))
                f.write("\n")
                count += 1
    logger.info(f"[EXPORT] Wrote {count} trace events to {path}")
    return path
