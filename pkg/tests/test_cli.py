import json
import logging
import os

import pandas as pd
import pytest

import main
from src import cli
from src.exceptions import EnumerationCapError, ModelError, UsageError
from tests.conftest import goldenPath, zooPath

REPO_ROOT = os.path.dirname(os.path.dirname(__file__))
LINE8 = goldenPath("line8.json")


@pytest.fixture(autouse=True)
def repoRoot(monkeypatch):
    monkeypatch.chdir(REPO_ROOT)
    monkeypatch.delenv("CTRPLACE_CAP", raising=False)


def writeChain(path, n: int) -> str:
    doc = {
        "name": f"chain{n}",
        "nodes": [{"id": i, "label": f"s{i}"} for i in range(n)],
        "edges": [{"source": i, "target": i + 1, "latency_ms": 1.0} for i in range(n - 1)],
    }
    path.write_text(json.dumps(doc))
    return str(path)


def test_frontier_exa_with_scatter(tmp_path):
    cfg = cli.RunConfig(topology=LINE8, controllers=2, scatter=True, outDir=str(tmp_path))
    summary = cli.cmdFrontier(cfg)

    frontier = pd.read_csv(tmp_path / "frontier.csv")
    assert list(frontier.columns) == ["placement", "sw_ctr_ms", "ctr_ctr_ms"]
    assert list(frontier["placement"]) == ["2;5", "2;4", "3;4"]
    assert len(pd.read_csv(tmp_path / "scatter.csv")) == 28

    gains = json.loads((tmp_path / "gains.json").read_text())
    assert gains["frontier_size"] == 3 == summary["frontier_size"]
    assert gains["sw_ratio"] == pytest.approx(1.5)
    assert gains["cc_ratio"] == pytest.approx(3.0)
    assert gains["ctr_ctr_reduction_factor"] == pytest.approx(3.0)
    assert gains["sampling_fraction"] == 1.0


def test_frontier_evo_is_byte_identical_across_runs(tmp_path):
    outputs = []
    for run in ("a", "b"):
        cfg = cli.RunConfig(topology=LINE8, controllers=3, algorithm="evo", iterations=10, seed=5,
                            outDir=str(tmp_path / run))
        cli.cmdFrontier(cfg)
        outputs.append((tmp_path / run / "frontier.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_frontier_excel_export(tmp_path):
    cli.cmdFrontier(cli.RunConfig(topology=LINE8, controllers=2, excel=True, outDir=str(tmp_path)))
    assert (tmp_path / "frontier.xlsx").exists()
    assert len(pd.read_excel(tmp_path / "frontier.xlsx", engine="openpyxl")) == 3


def test_too_many_controllers_is_a_usage_error(tmp_path):
    with pytest.raises(UsageError):
        cli.cmdFrontier(cli.RunConfig(topology=LINE8, controllers=9, outDir=str(tmp_path)))


def test_run_config_validation():
    with pytest.raises(UsageError):
        cli.RunConfig(controllers=0)
    with pytest.raises(UsageError):
        cli.RunConfig(algorithm="greedy")
    with pytest.raises(UsageError):
        cli.RunConfig(algorithm="rnd", iterations=0)
    with pytest.raises(UsageError):
        cli.RunConfig(topology="missing.graphml")


def test_errors_report(tmp_path):
    cfg = cli.RunConfig(topology=LINE8, controllers=2, iMaxList=[5, 10], seeds=3, outDir=str(tmp_path))
    summary = cli.cmdErrors(cfg)
    assert summary["report"] == "errors"

    errors = pd.read_csv(tmp_path / "errors.csv")
    assert list(errors.columns) == cli.ERRORS_COLUMNS
    assert len(errors) == 4
    assert (errors[["sw_err_ms", "cc_err_ms"]] >= 0).all().all()
    assert list(errors.columns) == ["i_max", "algorithm", "seeds", "sw_err_ms", "cc_err_ms"]
    assert (errors["seeds"] == 3).all()

    bySeed = pd.read_csv(tmp_path / "errors_by_seed.csv")
    assert list(bySeed.columns) == cli.ERRORS_BY_SEED_COLUMNS
    assert len(bySeed) == 12
    means = bySeed.groupby(["i_max", "algorithm"], sort=False)[["sw_err_ms", "cc_err_ms"]].mean().reset_index()
    merged = errors.merge(means, on=["i_max", "algorithm"], suffixes=("", "_seed"))
    assert (merged["sw_err_ms"] - merged["sw_err_ms_seed"]).abs().max() <= 1e-9
    assert (merged["cc_err_ms"] - merged["cc_err_ms_seed"]).abs().max() <= 1e-9


def test_errors_need_iteration_counts(tmp_path):
    with pytest.raises(UsageError):
        cli.cmdErrors(cli.RunConfig(topology=LINE8, controllers=2, outDir=str(tmp_path)))


def test_errors_fall_back_to_means_above_the_cap(tmp_path):
    cfg = cli.RunConfig(topology=LINE8, controllers=3, iMaxList=[5], cap=10, outDir=str(tmp_path))
    assert cli.cmdErrors(cfg)["report"] == "means"
    means = pd.read_csv(tmp_path / "means.csv")
    assert list(means.columns) == cli.MEANS_COLUMNS
    assert len(means) == 2

    cfg.strict = True
    with pytest.raises(EnumerationCapError):
        cli.cmdErrors(cfg)


def test_react_enumerates_every_placement(tmp_path):
    path = writeChain(tmp_path / "chain11.json", 11)
    summary = cli.cmdReact(cli.RunConfig(topology=path, controllers=3, outDir=str(tmp_path)))
    assert summary["placements"] == 165

    df = pd.read_csv(tmp_path / "reaction.csv")
    assert list(df.columns) == cli.REACT_COLUMNS
    assert len(df) == 165 * 3
    assert df.groupby("placement")["mdo_avg_ms"].nunique().max() == 1
    assert df.groupby("placement")["is_optimal"].sum().min() == 1
    factors = df.drop_duplicates("placement")["min_reduction_factor"].tolist()
    assert factors == sorted(factors, reverse=True)

    perPlacement = df.groupby("placement").agg(
        mdo=("mdo_avg_ms", "first"), sdo=("avg_reaction_ms", "min"),
        low=("min_reduction_factor", "first"), high=("max_reduction_factor", "first"),
    )
    assert (perPlacement["mdo"] <= perPlacement["sdo"] + 1e-9).all()
    assert (perPlacement["low"] >= 1.0).all()
    assert (perPlacement["high"] >= perPlacement["low"]).all()

    assert df["is_mdo_optimal"].sum() == 1
    assert df["is_sdo_optimal"].sum() == 1
    mdoRow = df[df["is_mdo_optimal"]].iloc[0]
    sdoRow = df[df["is_sdo_optimal"]].iloc[0]
    assert mdoRow["mdo_avg_ms"] == pytest.approx(df["mdo_avg_ms"].min())
    assert mdoRow["is_optimal"]
    assert sdoRow["avg_reaction_ms"] == pytest.approx(df["avg_reaction_ms"].min())

    best = json.loads((tmp_path / "react_summary.json").read_text())
    assert ";".join(str(n) for n in best["mdo_optimal_placement"]) == mdoRow["placement"]
    assert ";".join(str(n) for n in best["sdo_optimal_placement"]) == sdoRow["placement"]
    assert best["sdo_optimal_leader_node"] == sdoRow["leader_node"]
    assert best["mdo_optimal_ms"] <= best["sdo_optimal_ms"]


def test_react_optima_on_the_line(tmp_path):
    cli.cmdReact(cli.RunConfig(topology=LINE8, controllers=2, outDir=str(tmp_path)))
    best = json.loads((tmp_path / "react_summary.json").read_text())
    # (1, 5), (1, 6), (2, 5) and (2, 6) tie at 1 ms Sw-Ctr; the first in order wins
    assert best["mdo_optimal_placement"] == [1, 5]
    assert best["mdo_optimal_ms"] == pytest.approx(2.0)


def test_react_symmetric_triangle(tmp_path):
    path = tmp_path / "triangle.json"
    path.write_text(json.dumps({
        "name": "triangle",
        "nodes": [{"id": i, "label": f"t{i}"} for i in range(3)],
        "edges": [{"source": u, "target": v, "latency_ms": 1.0} for u, v in [(0, 1), (1, 2), (0, 2)]],
    }))
    cli.cmdReact(cli.RunConfig(topology=str(path), placement=(0, 1, 2), outDir=str(tmp_path)))
    df = pd.read_csv(tmp_path / "reaction.csv")
    assert len(df) == 3
    assert df["avg_reaction_ms"].nunique() == 1


def test_react_fixed_leader_with_trace(tmp_path):
    trace = tmp_path / "trace.jsonl"
    cfg = cli.RunConfig(topology=LINE8, placement=(0, 3, 7), leader=1, trace=str(trace), switch=0,
                        outDir=str(tmp_path))
    cli.cmdReact(cfg)
    df = pd.read_csv(tmp_path / "reaction.csv")
    assert len(df) == 1
    assert df.loc[0, "leader_node"] == 3
    assert df.loc[0, "avg_reaction_ms"] == pytest.approx(13.0)
    assert df.loc[0, "is_mdo_optimal"] and df.loc[0, "is_sdo_optimal"]

    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert records[0]["kind"] == "update-event"
    assert {"time_ms", "kind", "src", "dst", "seq"} <= set(records[0])


def test_scenario_sweep(tmp_path):
    trace = tmp_path / "flow.jsonl"
    cfg = cli.RunConfig(scenario="TMC", nSwRange=(3, 36), trace=str(trace), outDir=str(tmp_path))
    summary = cli.cmdScenario(cfg)
    assert summary["rows"] == 34

    df = pd.read_csv(tmp_path / "scenario_TMC.csv")
    assert list(df.columns) == cli.SCENARIO_COLUMNS
    assert df["predicted_ms"].iloc[0] == pytest.approx(114.0)
    assert df["predicted_ms"].iloc[-1] == pytest.approx(1054.5)
    assert (df["predicted_ms"] - df["simulated_ms"]).abs().max() <= 1e-9
    assert trace.exists()


def test_unknown_scenario_is_a_data_error(tmp_path):
    with pytest.raises(ModelError) as info:
        cli.cmdScenario(cli.RunConfig(scenario="XYZ", nSwRange=(3, 3), outDir=str(tmp_path)))
    assert info.value.exitCode == 3


def test_compare_reduction(tmp_path):
    cfg = cli.RunConfig(topologies=[LINE8, goldenPath("toyItaly.json")], controllersList=[2, 3],
                        outDir=str(tmp_path))
    cli.cmdCompare(cfg)
    df = pd.read_csv(tmp_path / "reduction.csv")
    assert list(df.columns) == cli.REDUCTION_COLUMNS
    assert len(df) == 4
    row = df[(df["topology"] == "line8") & (df["controllers"] == 2)].iloc[0]
    assert row["reduction_factor"] == pytest.approx(3.0)
    assert row["algorithm"] == "exa"


def test_compare_falls_back_to_evo_above_the_cap(tmp_path):
    cfg = cli.RunConfig(topologies=[LINE8], controllersList=[3], cap=10, iterations=5, outDir=str(tmp_path))
    cli.cmdCompare(cfg)
    assert pd.read_csv(tmp_path / "reduction.csv")["algorithm"].tolist() == ["evo"]


def test_main_exit_codes(tmp_path, monkeypatch):
    out = str(tmp_path)
    assert main.main(["frontier", "--topology", LINE8, "--controllers", "2", "--out", out]) == 0
    assert main.main(["frontier", "--topology", LINE8, "--controllers", "9", "--out", out]) == 2
    assert main.main(["frontier", "--topology", goldenPath("disconnected.json"), "--out", out]) == 3
    monkeypatch.setenv("CTRPLACE_CAP", "5")
    assert main.main(["frontier", "--topology", LINE8, "--controllers", "2", "--out", out]) == 4


def test_main_rejects_bad_flags(tmp_path):
    with pytest.raises(SystemExit) as info:
        main.main(["frontier", "--algo", "greedy"])
    assert info.value.code == 2


def test_main_parses_lists_and_ranges(tmp_path):
    out = str(tmp_path)
    assert main.main(["errors", "--topology", LINE8, "--controllers", "2", "--imax", "5,10", "--out", out]) == 0
    assert main.main(["scenario", "--scenario", "tt", "--nsw", "3..5", "--out", out]) == 0
    df = pd.read_csv(tmp_path / "scenario_TT.csv")
    assert df["predicted_ms"].iloc[0] == pytest.approx(86.0)


def test_garr_scatter_covers_every_placement(tmp_path):
    cfg = cli.RunConfig(topology=zooPath("Garr"), controllers=3, scatter=True, outDir=str(tmp_path))
    cli.cmdFrontier(cfg)
    from math import comb

    nodes = json.loads((tmp_path / "gains.json").read_text())["nodes"]
    assert len(pd.read_csv(tmp_path / "scatter.csv")) == comb(nodes, 3)


def test_setup_logging_quiets_openpyxl():
    main.setup_logging(debug=True)
    assert logging.getLogger("openpyxl").level == logging.WARNING
