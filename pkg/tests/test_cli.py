"""Command-line interface: exit codes, output formats, artifacts."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from shardsim.cli import main


@pytest.fixture()
def config_path(tmp_path: Path) -> str:
    raw = {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
        "parallelism": {"dp_shard": 32},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(raw))
    return str(path)


@pytest.fixture()
def single_gpu_config(tmp_path: Path) -> str:
    raw = {
        "hardware": {
            "num_nodes": 1,
            "gpus_per_node": 1,
            "intranode_bandwidth": 900e9,
            "internode_bandwidth": 400e9,
            "intranode_latency": 2e-6,
            "internode_latency": 5e-6,
            "gpu": {
                "name": "h100",
                "peak_flops": 990e12,
                "hbm_bandwidth": 3.35e12,
                "memory_capacity": 80e9,
                "power_peak": 700.0,
                "power_idle": 420.0,
            },
        },
        "model": {"preset": "1b"},
        "workload": {"global_batch": 4, "seq_len": 2048},
        "parallelism": {"dp_shard": 1},
    }
    path = tmp_path / "single.json"
    path.write_text(json.dumps(raw))
    return str(path)


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


def test_simulate_emits_envelope(config_path, capsys):
    assert main(["simulate", "--config", config_path]) == 0
    out = capsys.readouterr().out
    body = json.loads(out)
    assert body["errors"] == []
    assert "simulation" in body
    assert body["simulation"]["metrics"]["wps_global"] > 0
    assert out.endswith("\n")


def test_simulate_is_byte_deterministic(config_path, capsys):
    main(["simulate", "--config", config_path])
    first = capsys.readouterr().out
    main(["simulate", "--config", config_path])
    second = capsys.readouterr().out
    assert first == second


def test_single_gpu_reports_zero_communication(single_gpu_config, capsys):
    assert main(["simulate", "--config", single_gpu_config]) == 0
    body = json.loads(capsys.readouterr().out)
    breakdown = body["simulation"]["breakdown"]
    assert breakdown["comm_total_s"] == 0
    assert breakdown["comm_exposed_s"] == 0
    assert breakdown["bubble_time_s"] == 0


def test_simulate_table_format(config_path, capsys):
    assert main(["simulate", "--config", config_path, "--format", "table"]) == 0
    out = capsys.readouterr().out
    assert "mfu" in out.lower()


def test_missing_config_file_fails_cleanly(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "absent.json")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_invalid_layout_reports_violations(tmp_path, capsys):
    raw = {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
        "parallelism": {"dp_shard": 16},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    assert main(["simulate", "--config", str(path)]) == 1
    err = capsys.readouterr().err
    assert "product mismatch" in err


def test_hardware_override(config_path, capsys):
    assert main(["simulate", "--config", config_path, "--hardware", "a100"]) == 0
    a100 = json.loads(capsys.readouterr().out)
    assert main(["simulate", "--config", config_path]) == 0
    h100 = json.loads(capsys.readouterr().out)
    assert (
        a100["simulation"]["metrics"]["power_per_gpu_w"]
        < h100["simulation"]["metrics"]["power_per_gpu_w"]
    )


def test_simulate_out_dir_writes_artifacts(config_path, tmp_path, capsys):
    out_dir = tmp_path / "artifacts"
    assert main(["simulate", "--config", config_path, "--out", str(out_dir)]) == 0
    stdout = capsys.readouterr().out
    json_artifact = (out_dir / "simulate.json").read_text()
    assert json_artifact == stdout
    assert (out_dir / "simulate.txt").exists()


# --------------------------------------------------------------------------
# plan
# --------------------------------------------------------------------------


def test_plan_without_parallelism_block(tmp_path, capsys):
    raw = {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
    }
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(raw))
    assert main(["plan", "--config", str(path)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["plan"]["entries"]
    assert body["plan"]["enumerated"] == len(body["plan"]["entries"]) + body["plan"]["infeasible"]


def test_plan_csv_format(config_path, capsys):
    assert main(["plan", "--config", config_path, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("rank,")
    assert len(lines) > 1


def test_plan_energy_objective(config_path, capsys):
    assert main(["plan", "--config", config_path, "--objective", "energy"]) == 0
    body = json.loads(capsys.readouterr().out)
    entries = body["plan"]["entries"]
    tpw = [e["metrics"]["tokens_per_watt"] for e in entries]
    assert tpw == sorted(tpw, reverse=True)


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------


def test_weak_sweep_csv(config_path, capsys):
    code = main(
        [
            "sweep",
            "--config",
            config_path,
            "--axis",
            "world",
            "--nodes",
            "1,2,4",
            "--format",
            "csv",
        ]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4  # header + three ladder points
    assert lines[0].split(",")[0] == "axis"


def test_seqlen_sweep_json(config_path, capsys):
    code = main(
        ["sweep", "--config", config_path, "--axis", "seqlen", "--values", "1024,2048"]
    )
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    points = body["sweep"]["points"]
    assert [p["axis_value"] for p in points] == [1024, 2048]


def test_sweep_requires_nodes_for_world_axis(config_path, capsys):
    assert main(["sweep", "--config", config_path, "--axis", "world"]) == 1
    assert "error:" in capsys.readouterr().err


def test_sweep_rejects_bad_values(config_path, capsys):
    code = main(
        ["sweep", "--config", config_path, "--axis", "model", "--values", "900b"]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


# --------------------------------------------------------------------------
# decide
# --------------------------------------------------------------------------


def test_decide_compares_two_layouts(tmp_path, capsys):
    base = {
        "hardware": {"preset": "h100", "num_nodes": 32},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 512, "seq_len": 4096},
        "parallelism": {"dp_shard": 256},
    }
    candidate = json.loads(json.dumps(base))
    candidate["parallelism"] = {"dp_shard": 128, "tp": 2}
    from_path = tmp_path / "from.json"
    to_path = tmp_path / "to.json"
    from_path.write_text(json.dumps(base))
    to_path.write_text(json.dumps(candidate))
    assert main(["decide", "--from", str(from_path), "--to", str(to_path)]) == 0
    body = json.loads(capsys.readouterr().out)
    decision = body["decision"]
    assert decision["improves"] is True
    assert decision["agrees"] is True
    assert decision["c"] > 1.0
    assert decision["simulated_wps_ratio"] > 1.0


def test_decide_rejects_mismatched_workloads(tmp_path, capsys):
    base = {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
        "parallelism": {"dp_shard": 32},
    }
    other = json.loads(json.dumps(base))
    other["workload"]["global_batch"] = 128
    from_path = tmp_path / "from.json"
    to_path = tmp_path / "to.json"
    from_path.write_text(json.dumps(base))
    to_path.write_text(json.dumps(other))
    assert main(["decide", "--from", str(from_path), "--to", str(to_path)]) == 1
    assert "same workload" in capsys.readouterr().err


# --------------------------------------------------------------------------
# calibrate
# --------------------------------------------------------------------------


def _calibration_csv(alpha: float, beta: float) -> str:
    from shardsim import CollectiveKind
    from shardsim.collectives import ring_time

    lines = ["kind,group_size,message_bytes,bus_bandwidth_bytes_per_s"]
    for g in (2, 4, 8, 16):
        for s in (1e5, 1e6, 1e7, 1e8):
            t = ring_time(s, g, beta, alpha)
            busbw = s * (g - 1) / g / t
            lines.append(f"allgather,{g},{s},{busbw}")
    return "\n".join(lines) + "\n"


def test_calibrate_recovers_parameters(tmp_path, capsys):
    csv_path = tmp_path / "bench.csv"
    csv_path.write_text(_calibration_csv(5e-6, 50e9))
    assert main(["calibrate", "--input", str(csv_path)]) == 0
    body = json.loads(capsys.readouterr().out)
    fitted = body["cost_params"]["fitted"]["allgather"]
    assert abs(fitted["alpha"] - 5e-6) / 5e-6 < 0.05
    assert abs(fitted["beta"] - 50e9) / 50e9 < 0.05
    assert body["cost_params"]["calibrated"] is True


def test_calibrate_rejects_underdetermined_data(tmp_path, capsys):
    csv_path = tmp_path / "thin.csv"
    csv_path.write_text(
        "kind,group_size,message_bytes,bus_bandwidth_bytes_per_s\n"
        "allgather,8,1000000,100000000000\n"
    )
    assert main(["calibrate", "--input", str(csv_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_calibrate_writes_artifact(tmp_path, capsys):
    csv_path = tmp_path / "bench.csv"
    csv_path.write_text(_calibration_csv(2e-6, 100e9))
    out_dir = tmp_path / "out"
    assert main(["calibrate", "--input", str(csv_path), "--out", str(out_dir)]) == 0
    stdout = capsys.readouterr().out
    assert (out_dir / "cost_params.json").read_text() == stdout
