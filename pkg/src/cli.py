# src/cli.py
"""
Command implementations behind main.py.

Each cmd* takes a RunConfig, writes its reports under cfg.outDir and returns
a small summary dict for the console.
"""

import itertools
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from src import exporter, settings
from src.exceptions import EnumerationCapError, UsageError
from src.paretoSearch import (
    ParetoSet,
    SearchBudget,
    SearchStats,
    ctrCtrReductionFactor,
    evoPlace,
    exaPlace,
    extremeGains,
    frontierErrors,
    frontierMeans,
    rndPlace,
)
from src.placementMetrics import DelayPoint, Placement, placementCount, pointsToFrame, validatePlacement
from src.protocolSim import simulateL2switchFlow, simulateMdoUpdate, simulateSdoUpdate
from src.reactionModels import ClusterView, arpSetupTime, ownerSweep, scenarioSetup
from src.topology import DelayMatrix, Topology, allPairsDelays
from src.topologyParser import loadTopology
from src.validator import validateAndLogOracle, validateDelayMatrix, validateFrontier

logger = logging.getLogger(__name__)

ALGORITHMS = ("exa", "rnd", "evo")
MODELS = ("mdo", "sdo")

ERRORS_COLUMNS = ["i_max", "algorithm", "seeds", "sw_err_ms", "cc_err_ms"]
ERRORS_BY_SEED_COLUMNS = ["i_max", "algorithm", "seed", "sw_err_ms", "cc_err_ms"]
MEANS_COLUMNS = ["i_max", "algorithm", "seeds", "mean_sw_ctr_ms", "mean_ctr_ctr_ms"]
REACT_COLUMNS = [
    "placement", "leader_node", "avg_reaction_ms", "mdo_avg_ms",
    "is_optimal", "is_mdo_optimal", "is_sdo_optimal", "min_reduction_factor", "max_reduction_factor",
]
SCENARIO_COLUMNS = ["scenario", "n_sw", "predicted_ms", "simulated_ms"]
REDUCTION_COLUMNS = ["topology", "nodes", "controllers", "algorithm", "frontier_size", "reduction_factor"]

_DEFAULTS = settings.BUILTIN_DEFAULTS


@dataclass
class RunConfig:
    topology: Optional[str] = None
    controllers: int = 3
    algorithm: str = "exa"
    iterations: int = 50
    seed: int = 0
    seeds: int = 1
    model: str = "sdo"
    leader: Union[int, str] = "sweep"
    tcMs: Optional[float] = None
    speed: float = _DEFAULTS["propagationSpeedKmPerMs"]
    majorityRule: str = _DEFAULTS["majorityRule"]
    outDir: str = _DEFAULTS["outputDir"]
    cap: int = _DEFAULTS["enumerationCap"]
    scatter: bool = False
    trace: Optional[str] = None
    excel: bool = False
    workers: int = 1
    strict: bool = False
    placement: Optional[Tuple[int, ...]] = None
    switch: int = 0
    iMaxList: List[int] = field(default_factory=list)
    scenario: Optional[str] = None
    nSwRange: Tuple[int, int] = (3, 36)
    topologies: List[str] = field(default_factory=list)
    controllersList: List[int] = field(default_factory=lambda: [3, 4])

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"--algo must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.model not in MODELS:
            raise UsageError(f"--model must be one of {MODELS}, got {self.model!r}")
        if self.controllers < 1:
            raise UsageError(f"--controllers must be at least 1, got {self.controllers}")
        if self.algorithm != "exa" and self.iterations < 1:
            raise UsageError(f"--iterations must be at least 1, got {self.iterations}")
        if self.seeds < 1:
            raise UsageError(f"--seeds must be at least 1, got {self.seeds}")
        if self.leader != "sweep" and not isinstance(self.leader, int):
            raise UsageError(f"--leader must be an index or 'sweep', got {self.leader!r}")
        if self.topology is not None and not os.path.exists(self.topology):
            raise UsageError(f"Topology file {self.topology} not found")


def _loadDelays(cfg: RunConfig, path: Optional[str] = None) -> Tuple[Topology, DelayMatrix]:
    path = path or cfg.topology
    if not path:
        raise UsageError("--topology is required for this command")
    topology = loadTopology(path, speed=cfg.speed)
    d = allPairsDelays(topology)
    isValid, message = validateDelayMatrix(d)
    if not isValid:
        logger.warning(f"[VALIDATE] Delay matrix of '{topology.name}' failed validation: {message}")
    return topology, d


def _checkControllers(c: int, n: int):
    if c > n:
        raise UsageError(f"Cannot place {c} controllers on a topology with {n} nodes")


def _search(cfg: RunConfig, topology: Topology, d: DelayMatrix, algorithm: str, c: int, seed: int,
            stats: Optional[SearchStats] = None) -> ParetoSet:
    if algorithm == "exa":
        return exaPlace(d, c, cap=cfg.cap, workers=cfg.workers)
    budget = SearchBudget(iMax=cfg.iterations, seed=seed)
    if algorithm == "rnd":
        return rndPlace(d, c, budget, stats)
    return evoPlace(d, c, budget, topology, stats)


def _finiteOrNone(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def cmdFrontier(cfg: RunConfig) -> Dict:
    topology, d = _loadDelays(cfg)
    _checkControllers(cfg.controllers, topology.size)

    scatter: List[DelayPoint] = []
    stats = SearchStats()
    if cfg.algorithm == "exa":
        onPoint = scatter.append if cfg.scatter else None
        frontier = exaPlace(d, cfg.controllers, cap=cfg.cap, workers=cfg.workers, onPoint=onPoint)
        stats.evaluated = placementCount(topology.size, cfg.controllers)
        stats.samplingFraction = 1.0
    else:
        frontier = _search(cfg, topology, d, cfg.algorithm, cfg.controllers, cfg.seed, stats)

    isValid, message = validateFrontier(frontier)
    if not isValid:
        logger.error(f"[VALIDATE] Frontier invariant broken: {message}")

    exporter.exportReport(pointsToFrame(frontier.points), "frontier", cfg.outDir, cfg.excel)
    if cfg.scatter:
        if cfg.algorithm == "exa":
            exporter.exportReport(pointsToFrame(scatter), "scatter", cfg.outDir, cfg.excel)
        else:
            logger.warning("[EXPORT] --scatter only applies to --algo exa, skipping scatter.csv")

    gains = extremeGains(frontier)
    summary = {
        "topology": topology.name,
        "nodes": topology.size,
        "controllers": cfg.controllers,
        "algorithm": cfg.algorithm,
        "seed": None if cfg.algorithm == "exa" else cfg.seed,
        "iterations": None if cfg.algorithm == "exa" else cfg.iterations,
        "frontier_size": len(frontier),
        "sw_ratio": _finiteOrNone(gains.swRatio),
        "cc_ratio": _finiteOrNone(gains.ccRatio),
        "infinite_ratio": gains.infinite,
        "ctr_ctr_reduction_factor": _finiteOrNone(ctrCtrReductionFactor(frontier)),
        "evaluated": stats.evaluated,
        "sampling_fraction": stats.samplingFraction,
    }
    exporter.exportJson(summary, "gains", cfg.outDir)
    return summary


def _errorRows(cfg: RunConfig, topology: Topology, d: DelayMatrix, optimal: Optional[ParetoSet]):
    aggregate, bySeed = [], []
    for iMax in cfg.iMaxList:
        for algorithm in ("rnd", "evo"):
            runCfg = replace(cfg, iterations=iMax, algorithm=algorithm)
            swVals, ccVals = [], []
            for seed in range(cfg.seed, cfg.seed + cfg.seeds):
                approx = _search(runCfg, topology, d, algorithm, cfg.controllers, seed)
                if optimal is not None:
                    sw, cc = frontierErrors(optimal, approx)
                else:
                    sw, cc = frontierMeans(approx)
                swVals.append(sw)
                ccVals.append(cc)
                bySeed.append([iMax, algorithm, seed, sw, cc])
            aggregate.append([iMax, algorithm, cfg.seeds, sum(swVals) / len(swVals), sum(ccVals) / len(ccVals)])
            logger.info(f"[SEARCH] i_max={iMax} {algorithm}: {aggregate[-1][3]:.4f} / {aggregate[-1][4]:.4f} ms")
    return aggregate, bySeed


def cmdErrors(cfg: RunConfig) -> Dict:
    if not cfg.iMaxList:
        raise UsageError("--imax needs at least one iteration count")
    if any(i < 1 for i in cfg.iMaxList):
        raise UsageError(f"Iteration counts must be positive, got {cfg.iMaxList}")
    topology, d = _loadDelays(cfg)
    _checkControllers(cfg.controllers, topology.size)

    try:
        optimal = exaPlace(d, cfg.controllers, cap=cfg.cap, workers=cfg.workers)
    except EnumerationCapError as e:
        if cfg.strict:
            raise
        logger.warning(f"[SEARCH] {e}; comparing frontier means instead of errors")
        optimal = None

    aggregate, bySeed = _errorRows(cfg, topology, d, optimal)
    if optimal is not None:
        exporter.exportReport(pd.DataFrame(aggregate, columns=ERRORS_COLUMNS), "errors", cfg.outDir, cfg.excel)
        exporter.exportReport(pd.DataFrame(bySeed, columns=ERRORS_BY_SEED_COLUMNS), "errors_by_seed", cfg.outDir, cfg.excel)
        report = "errors"
    else:
        exporter.exportReport(pd.DataFrame(aggregate, columns=MEANS_COLUMNS), "means", cfg.outDir, cfg.excel)
        report = "means"
    return {"report": report, "rows": len(aggregate), "reference_size": None if optimal is None else len(optimal)}


def _reactPlacements(cfg: RunConfig, n: int) -> List[Placement]:
    if cfg.placement is not None:
        return [validatePlacement(cfg.placement, n)]
    total = placementCount(n, cfg.controllers)
    if total > cfg.cap:
        raise EnumerationCapError(total, cfg.cap)
    return list(itertools.combinations(range(n), cfg.controllers))


def cmdReact(cfg: RunConfig) -> Dict:
    topology, d = _loadDelays(cfg)
    _checkControllers(cfg.controllers if cfg.placement is None else len(cfg.placement), topology.size)

    sweeps = [ownerSweep(d, p, cfg.majorityRule) for p in _reactPlacements(cfg, topology.size)]
    mdoBest = min(sweeps, key=lambda s: (s.mdoReaction, s.placement))
    sweeps.sort(key=lambda s: (-s.minFactor, s.placement))

    rows = []
    for sweep in sweeps:
        label = ";".join(str(n) for n in sweep.placement)
        for leader, reaction in sweep.reactions:
            if cfg.leader != "sweep" and leader != cfg.leader:
                continue
            isOptimal = leader == sweep.optimalLeader
            rows.append({
                "placement": label,
                "leader_node": sweep.placement[leader],
                "avg_reaction_ms": reaction,
                "mdo_avg_ms": sweep.mdoReaction,
                "is_optimal": isOptimal,
                "is_mdo_optimal": sweep is mdoBest and (isOptimal or cfg.leader != "sweep"),
                "is_sdo_optimal": False,
                "min_reduction_factor": _finiteOrNone(sweep.minFactor),
                "max_reduction_factor": _finiteOrNone(sweep.maxFactor),
                "_key": (reaction, sweep.placement, leader),
            })
    if cfg.leader != "sweep" and not rows:
        raise UsageError(f"--leader {cfg.leader} is not a controller index for C={cfg.controllers}")

    sdoBest = min(rows, key=lambda r: r["_key"])
    sdoBest["is_sdo_optimal"] = True
    df = pd.DataFrame(rows).drop(columns="_key")[REACT_COLUMNS]
    exporter.exportReport(df, "reaction", cfg.outDir, cfg.excel)

    summary = {
        "mdo_optimal_placement": [int(n) for n in mdoBest.placement],
        "mdo_optimal_ms": float(mdoBest.mdoReaction),
        "sdo_optimal_placement": [int(n) for n in sdoBest["_key"][1]],
        "sdo_optimal_leader_node": int(sdoBest["leader_node"]),
        "sdo_optimal_ms": float(sdoBest["avg_reaction_ms"]),
    }
    exporter.exportJson(summary, "react_summary", cfg.outDir)
    logger.info(
        f"[REACT] best MDO placement {mdoBest.placement} ({mdoBest.mdoReaction:.3f} ms), "
        f"best SDO placement {tuple(sdoBest['_key'][1])} led by node {sdoBest['leader_node']} "
        f"({sdoBest['avg_reaction_ms']:.3f} ms)"
    )

    if cfg.trace:
        first = sweeps[0]
        leader = first.optimalLeader if cfg.leader == "sweep" else cfg.leader
        view = ClusterView.build(d, first.placement, leader)
        if cfg.model == "sdo":
            _, trace = simulateSdoUpdate(d, view, cfg.switch, cfg.majorityRule)
        else:
            _, trace = simulateMdoUpdate(d, view, cfg.switch)
        exporter.exportTrace(trace.toRecords(), cfg.trace)

    return {"placements": len(sweeps), "rows": len(rows)}


def cmdScenario(cfg: RunConfig) -> Dict:
    if not cfg.scenario:
        raise UsageError("--scenario is required")
    low, high = cfg.nSwRange
    if low > high:
        raise UsageError(f"Empty n_sw range {low}..{high}")

    defaults = settings.loadDefaults()
    scenarios = settings.loadScenarios()
    name = cfg.scenario.upper()
    rows = []
    lastTrace = None
    for nSw in range(low, high + 1):
        topology, d, view, flow = scenarioSetup(name, nSw, scenarios, defaults["hypervisorDelayMs"])
        if cfg.tcMs is not None:
            flow = replace(flow, tc=cfg.tcMs)
        predicted = arpSetupTime(d, view, flow, cfg.majorityRule)
        simulated, lastTrace = simulateL2switchFlow(
            topology, d, view, flow.route[0], flow.route[-1], flow.tc, flow.hostEdgeDelays, cfg.majorityRule
        )
        rows.append({"scenario": name, "n_sw": nSw, "predicted_ms": predicted, "simulated_ms": simulated})
    logger.info(f"[REACT] Scenario {name}: {rows[0]['predicted_ms']:.1f} ms at n_sw={low}, "
                f"{rows[-1]['predicted_ms']:.1f} ms at n_sw={high}")

    validateAndLogOracle(rows)
    exporter.exportReport(pd.DataFrame(rows, columns=SCENARIO_COLUMNS), f"scenario_{name}", cfg.outDir, cfg.excel)
    if cfg.trace and lastTrace is not None:
        exporter.exportTrace(lastTrace.toRecords(), cfg.trace)
    return {"scenario": name, "rows": len(rows), "last_ms": rows[-1]["predicted_ms"]}


def cmdCompare(cfg: RunConfig) -> Dict:
    paths = cfg.topologies or ([cfg.topology] if cfg.topology else [])
    if not paths:
        raise UsageError("--topologies needs at least one file")

    rows = []
    for path in paths:
        topology, d = _loadDelays(cfg, path)
        for c in cfg.controllersList:
            if c > topology.size:
                logger.warning(f"[SEARCH] Skipping C={c} on '{topology.name}' ({topology.size} nodes)")
                continue
            algorithm = "exa"
            try:
                frontier = exaPlace(d, c, cap=cfg.cap, workers=cfg.workers)
            except EnumerationCapError as e:
                logger.warning(f"[SEARCH] {e}; falling back to evo")
                algorithm = "evo"
                frontier = evoPlace(d, c, SearchBudget(cfg.iterations, cfg.seed), topology)
            rows.append([topology.name, topology.size, c, algorithm, len(frontier),
                         _finiteOrNone(ctrCtrReductionFactor(frontier))])

    exporter.exportReport(pd.DataFrame(rows, columns=REDUCTION_COLUMNS), "reduction", cfg.outDir, cfg.excel)
    return {"rows": len(rows)}
