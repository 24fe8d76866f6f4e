"""JSON run-configuration parsing."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from shardsim import CollectiveKind, parse_run_config


def _base_config() -> dict:
    return {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
        "parallelism": {"dp_shard": 32, "tp": 1, "pp": 1},
    }


def test_minimal_config_parses():
    rc, violations = parse_run_config(_base_config())
    assert violations == []
    assert rc.topology.world_size == 32
    assert rc.workload.global_batch == 256
    assert rc.parallelism.data_parallel == 32
    assert rc.knobs.compute_efficiency == 0.65
    assert rc.cost_params.bandwidth_efficiency == 0.8


def test_non_object_input_is_a_violation():
    rc, violations = parse_run_config([1, 2, 3])
    assert rc is None
    assert violations == ["/: configuration must be a JSON object"]


def test_missing_blocks_are_reported_by_path():
    rc, violations = parse_run_config({})
    assert rc is None
    paths = {v.split(":")[0] for v in violations}
    assert {"/hardware", "/model", "/workload", "/parallelism"} <= paths


def test_unknown_hardware_preset():
    raw = _base_config()
    raw["hardware"]["preset"] = "tpu"
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any(v.startswith("/hardware/preset") for v in violations)


def test_custom_gpu_block():
    raw = _base_config()
    raw["hardware"] = {
        "num_nodes": 1,
        "gpus_per_node": 4,
        "intranode_bandwidth": 600e9,
        "internode_bandwidth": 100e9,
        "intranode_latency": 2e-6,
        "internode_latency": 5e-6,
        "gpu": {
            "name": "custom",
            "peak_flops": 500e12,
            "hbm_bandwidth": 2e12,
            "memory_capacity": 64e9,
            "power_peak": 500.0,
            "power_idle": 300.0,
        },
    }
    raw["parallelism"] = {"dp_shard": 4}
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.topology.gpu.name == "custom"
    assert rc.topology.world_size == 4


def test_custom_model_shape():
    raw = _base_config()
    raw["model"] = {
        "num_layers": 16,
        "hidden_dim": 1024,
        "num_heads": 16,
        "ffn_dim": 4096,
        "vocab_size": 32000,
    }
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.workload.arch.num_layers == 16


def test_product_mismatch_relocated_to_parallelism():
    raw = _base_config()
    raw["parallelism"] = {"dp_shard": 16}
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert len(violations) == 1
    assert violations[0].startswith("/parallelism")
    assert "product mismatch" in violations[0]


def test_declared_local_batch_must_match():
    raw = _base_config()
    raw["parallelism"] = {"dp_shard": 32, "grad_accum": 2, "local_batch": 8}
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any(v.startswith("/parallelism/local_batch") for v in violations)


def test_declared_local_batch_accepted_when_consistent():
    raw = _base_config()
    raw["parallelism"] = {"dp_shard": 32, "grad_accum": 2, "local_batch": 4}
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.parallelism.grad_accum == 2


def test_microbatches_count_converts_to_size():
    raw = _base_config()
    raw["hardware"]["num_nodes"] = 16
    raw["parallelism"] = {"dp_shard": 32, "pp": 4, "microbatches": 4}
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.parallelism.microbatch == 2  # local batch 8 split into 4


def test_microbatches_must_divide_local_batch():
    raw = _base_config()
    raw["parallelism"] = {"dp_shard": 32, "microbatches": 3}
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any(v.startswith("/parallelism/microbatches") for v in violations)


def test_batch_divisibility_violation():
    raw = _base_config()
    raw["workload"]["global_batch"] = 100
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any("not divisible" in v for v in violations)


def test_overlong_seq_len_is_a_workload_violation():
    raw = _base_config()
    raw["workload"]["seq_len"] = 100_000
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any(v.startswith("/workload") for v in violations)


def test_knobs_block():
    raw = _base_config()
    raw["knobs"] = {
        "compute_efficiency": 0.5,
        "prefetch_depth": 2,
        "tp_overlap": 0.3,
        "batch_scaling_exponent": 0.9,
        "regather_backward": True,
    }
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.knobs.compute_efficiency == 0.5
    assert rc.knobs.prefetch_depth == 2
    assert rc.knobs.regather_backward is True


def test_bad_knob_type_reported():
    raw = _base_config()
    raw["knobs"] = {"regather_backward": "yes"}
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert any(v.startswith("/knobs/regather_backward") for v in violations)


def test_inline_cost_params():
    raw = _base_config()
    raw["cost_params"] = {
        "bandwidth_efficiency": 0.9,
        "fitted": {"allgather": {"alpha": 1e-5, "beta": 50e9}},
    }
    rc, violations = parse_run_config(raw)
    assert violations == []
    assert rc.cost_params.bandwidth_efficiency == 0.9
    assert rc.cost_params.fitted[CollectiveKind.ALL_GATHER].beta == 50e9


def test_cost_params_from_file(tmp_path: Path):
    payload = {"bandwidth_efficiency": 0.7, "calibrated": True}
    path = tmp_path / "params.json"
    path.write_text(json.dumps(payload))
    raw = _base_config()
    raw["cost_params"] = {"path": "params.json"}
    rc, violations = parse_run_config(raw, base_dir=tmp_path)
    assert violations == []
    assert rc.cost_params.bandwidth_efficiency == 0.7
    assert rc.cost_params.calibrated is True


def test_cost_params_missing_file_is_a_violation(tmp_path: Path):
    raw = _base_config()
    raw["cost_params"] = {"path": "absent.json"}
    rc, violations = parse_run_config(raw, base_dir=tmp_path)
    assert rc is None
    assert any(v.startswith("/cost_params/path") for v in violations)


def test_parallelism_optional_when_not_required():
    raw = _base_config()
    del raw["parallelism"]
    rc, violations = parse_run_config(raw, require_parallelism=False)
    assert violations == []
    assert rc.parallelism is None


def test_parallelism_still_parsed_if_present_when_optional():
    raw = _base_config()
    rc, violations = parse_run_config(raw, require_parallelism=False)
    assert violations == []
    assert rc.parallelism is not None


def test_multiple_violations_accumulate():
    raw = _base_config()
    raw["workload"]["global_batch"] = -1
    raw["knobs"] = {"tp_overlap": 7}
    rc, violations = parse_run_config(raw)
    assert rc is None
    assert len(violations) >= 2


def test_parse_never_raises_on_junk():
    for junk in (None, 42, "config", {"hardware": 7}, {"hardware": {"preset": 1}}):
        rc, violations = parse_run_config(junk)
        assert rc is None
        assert violations
