"""Run-configuration parsing: JSON blocks to validated simulation inputs.

Parsing never raises for user input: it returns either a complete
RunConfig or a list of human-readable violations, each prefixed with a
JSON-pointer-style location of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .collectives import CollectiveCostParams
from .engine import SimulationKnobs
from .hardware import (
    ClusterTopology,
    GpuSpec,
    HARDWARE_PRESET_NAMES,
    NodeSpec,
    node_preset,
)
from .parallelism import ParallelismConfig, validate_config
from .workload import MODEL_PRESET_NAMES, TrainingWorkload, TransformerArch, model_preset


@dataclass(frozen=True)
class RunConfig:
    """A fully parsed and validated simulation input.

    parallelism is None only when the caller opted out of requiring it
    (planning and sweeping enumerate layouts themselves).
    """

    topology: ClusterTopology
    workload: TrainingWorkload
    parallelism: ParallelismConfig | None
    knobs: SimulationKnobs
    cost_params: CollectiveCostParams


def _require_block(raw: dict, key: str, violations: list[str]) -> dict | None:
    block = raw.get(key)
    if block is None:
        violations.append(f"/{key}: required block is missing")
        return None
    if not isinstance(block, dict):
        violations.append(f"/{key}: must be an object")
        return None
    return block


def _get_number(
    block: dict,
    key: str,
    path: str,
    violations: list[str],
    *,
    default: float | None = None,
    required: bool = False,
    minimum: float | None = None,
    integer: bool = False,
):
    if key not in block:
        if required:
            violations.append(f"{path}/{key}: required field is missing")
            return None
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        violations.append(f"{path}/{key}: must be a number")
        return None
    if integer:
        if isinstance(value, float) and not value.is_integer():
            violations.append(f"{path}/{key}: must be an integer")
            return None
        value = int(value)
    if minimum is not None and value < minimum:
        violations.append(f"{path}/{key}: must be >= {minimum}")
        return None
    return value


def _parse_gpu(block: dict, path: str, violations: list[str]) -> GpuSpec | None:
    name = block.get("name", "custom")
    fields = {}
    for key in ("peak_flops", "hbm_bandwidth", "memory_capacity", "power_peak", "power_idle"):
        value = _get_number(block, key, path, violations, required=True, minimum=0.0)
        if value is None:
            return None
        fields[key] = float(value)
    try:
        return GpuSpec(name=str(name), **fields)
    except ValueError as exc:
        violations.append(f"{path}: {exc}")
        return None


def _parse_hardware(
    raw: dict, violations: list[str]
) -> ClusterTopology | None:
    block = _require_block(raw, "hardware", violations)
    if block is None:
        return None
    num_nodes = _get_number(
        block, "num_nodes", "/hardware", violations, required=True, minimum=1, integer=True
    )
    node: NodeSpec | None = None
    if "preset" in block:
        preset = block["preset"]
        if not isinstance(preset, str) or preset.lower() not in HARDWARE_PRESET_NAMES:
            violations.append(
                f"/hardware/preset: unknown preset {preset!r}; "
                f"choose from {list(HARDWARE_PRESET_NAMES)}"
            )
        else:
            node = node_preset(preset.lower())
    else:
        gpu_block = block.get("gpu")
        if not isinstance(gpu_block, dict):
            violations.append("/hardware: needs either a preset or a gpu block")
        else:
            gpu = _parse_gpu(gpu_block, "/hardware/gpu", violations)
            gpus_per_node = _get_number(
                block, "gpus_per_node", "/hardware", violations,
                required=True, minimum=1, integer=True,
            )
            intra_bw = _get_number(
                block, "intranode_bandwidth", "/hardware", violations,
                required=True, minimum=0.0,
            )
            inter_bw = _get_number(
                block, "internode_bandwidth", "/hardware", violations,
                required=True, minimum=0.0,
            )
            intra_lat = _get_number(
                block, "intranode_latency", "/hardware", violations,
                default=2.0e-6, minimum=0.0,
            )
            inter_lat = _get_number(
                block, "internode_latency", "/hardware", violations,
                default=5.0e-6, minimum=0.0,
            )
            if gpu is not None and None not in (gpus_per_node, intra_bw, inter_bw, intra_lat, inter_lat):
                try:
                    node = NodeSpec(
                        gpu=gpu,
                        gpus_per_node=int(gpus_per_node),
                        intranode_bandwidth=float(intra_bw),
                        internode_bandwidth=float(inter_bw),
                        intranode_latency=float(intra_lat),
                        internode_latency=float(inter_lat),
                    )
                except ValueError as exc:
                    violations.append(f"/hardware: {exc}")
    if node is None or num_nodes is None:
        return None
    return ClusterTopology(node=node, num_nodes=int(num_nodes))


def _parse_model(raw: dict, violations: list[str]) -> TransformerArch | None:
    block = _require_block(raw, "model", violations)
    if block is None:
        return None
    if "preset" in block:
        preset = block["preset"]
        if not isinstance(preset, str) or preset.lower() not in MODEL_PRESET_NAMES:
            violations.append(
                f"/model/preset: unknown preset {preset!r}; "
                f"choose from {list(MODEL_PRESET_NAMES)}"
            )
            return None
        return model_preset(preset.lower())
    fields = {}
    for key in ("num_layers", "hidden_dim", "num_heads", "ffn_dim", "vocab_size"):
        value = _get_number(block, key, "/model", violations, required=True, minimum=1, integer=True)
        if value is None:
            return None
        fields[key] = int(value)
    max_seq = _get_number(block, "max_seq_len", "/model", violations, default=4096, minimum=1, integer=True)
    if max_seq is None:
        return None
    try:
        return TransformerArch(
            name=str(block.get("name", "custom")), max_seq_len=int(max_seq), **fields
        )
    except ValueError as exc:
        violations.append(f"/model: {exc}")
        return None


def _parse_workload(
    raw: dict, arch: TransformerArch | None, violations: list[str]
) -> TrainingWorkload | None:
    block = _require_block(raw, "workload", violations)
    if block is None or arch is None:
        return None
    global_batch = _get_number(
        block, "global_batch", "/workload", violations, required=True, minimum=1, integer=True
    )
    seq_len = _get_number(
        block, "seq_len", "/workload", violations, required=True, minimum=1, integer=True
    )
    param_bytes = _get_number(
        block, "param_bytes", "/workload", violations, default=2, minimum=2, integer=True
    )
    opt_bytes = _get_number(
        block, "optimizer_bytes_per_param", "/workload", violations,
        default=12, minimum=1, integer=True,
    )
    if None in (global_batch, seq_len, param_bytes, opt_bytes):
        return None
    try:
        return TrainingWorkload(
            arch=arch,
            global_batch=int(global_batch),
            seq_len=int(seq_len),
            param_bytes=int(param_bytes),
            optimizer_bytes_per_param=int(opt_bytes),
        )
    except ValueError as exc:
        violations.append(f"/workload: {exc}")
        return None


def _parse_parallelism(
    raw: dict, workload: TrainingWorkload | None, violations: list[str]
) -> ParallelismConfig | None:
    block = _require_block(raw, "parallelism", violations)
    if block is None:
        return None
    dp = _get_number(block, "dp_shard", "/parallelism", violations, required=True, minimum=1, integer=True)
    tp = _get_number(block, "tp", "/parallelism", violations, default=1, minimum=1, integer=True)
    pp = _get_number(block, "pp", "/parallelism", violations, default=1, minimum=1, integer=True)
    accum = _get_number(block, "grad_accum", "/parallelism", violations, default=1, minimum=1, integer=True)
    microbatches = _get_number(
        block, "microbatches", "/parallelism", violations, default=1, minimum=1, integer=True
    )
    if None in (dp, tp, pp, accum, microbatches) or workload is None:
        return None
    dp, tp, pp, accum, microbatches = int(dp), int(tp), int(pp), int(accum), int(microbatches)
    if workload.global_batch % (dp * accum):
        violations.append(
            f"/parallelism: global_batch {workload.global_batch} is not divisible "
            f"by dp_shard*grad_accum = {dp * accum}"
        )
        return None
    local = workload.global_batch // (dp * accum)
    declared_local = _get_number(
        block, "local_batch", "/parallelism", violations, default=None, minimum=1, integer=True
    )
    if declared_local is not None and int(declared_local) != local:
        violations.append(
            f"/parallelism/local_batch: {int(declared_local)} does not equal "
            f"global_batch/(dp_shard*grad_accum) = {local}"
        )
        return None
    if local % microbatches:
        violations.append(
            f"/parallelism/microbatches: {microbatches} does not divide the "
            f"per-rank microstep batch {local}"
        )
        return None
    try:
        return ParallelismConfig(
            data_parallel=dp,
            tensor_parallel=tp,
            pipeline_parallel=pp,
            microbatch=local // microbatches,
            grad_accum=accum,
        )
    except ValueError as exc:
        violations.append(f"/parallelism: {exc}")
        return None


def _parse_knobs(raw: dict, violations: list[str]) -> SimulationKnobs | None:
    block = raw.get("knobs")
    if block is None:
        return SimulationKnobs()
    if not isinstance(block, dict):
        violations.append("/knobs: must be an object")
        return None
    eff = _get_number(block, "compute_efficiency", "/knobs", violations, default=0.65)
    depth = _get_number(block, "prefetch_depth", "/knobs", violations, default=1, minimum=0, integer=True)
    overlap = _get_number(block, "tp_overlap", "/knobs", violations, default=0.0)
    exponent = _get_number(block, "batch_scaling_exponent", "/knobs", violations, default=1.0)
    regather = block.get("regather_backward", False)
    if not isinstance(regather, bool):
        violations.append("/knobs/regather_backward: must be a boolean")
        return None
    if None in (eff, depth, overlap, exponent):
        return None
    try:
        return SimulationKnobs(
            compute_efficiency=float(eff),
            prefetch_depth=int(depth),
            tp_overlap=float(overlap),
            batch_scaling_exponent=float(exponent),
            regather_backward=regather,
        )
    except ValueError as exc:
        violations.append(f"/knobs: {exc}")
        return None


def _parse_cost_params(
    raw: dict, base_dir: Path | None, violations: list[str]
) -> CollectiveCostParams | None:
    block = raw.get("cost_params")
    if block is None:
        return CollectiveCostParams()
    if not isinstance(block, dict):
        violations.append("/cost_params: must be an object")
        return None
    if "path" in block:
        path = Path(block["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            block = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            violations.append(f"/cost_params/path: cannot load {path}: {exc}")
            return None
    try:
        return CollectiveCostParams.from_json(block)
    except (ValueError, KeyError, TypeError) as exc:
        violations.append(f"/cost_params: {exc}")
        return None


_LOCATION_MAP = {
    "config/tensor_parallel": "/parallelism/tp",
    "config/pipeline_parallel": "/parallelism/pp",
    "config/microbatch": "/parallelism/microbatches",
    "config": "/parallelism",
    "workload/global_batch": "/workload/global_batch",
}


def _relocate(violation: str) -> str:
    for prefix, replacement in _LOCATION_MAP.items():
        if violation.startswith(prefix + ":"):
            return replacement + violation[len(prefix):]
    return violation


def parse_run_config(
    raw: Any, base_dir: Path | None = None, require_parallelism: bool = True
) -> tuple[RunConfig | None, list[str]]:
    """Parse a raw JSON object into a RunConfig or a list of violations."""
    violations: list[str] = []
    if not isinstance(raw, dict):
        return None, ["/: configuration must be a JSON object"]
    topology = _parse_hardware(raw, violations)
    arch = _parse_model(raw, violations)
    workload = _parse_workload(raw, arch, violations)
    parallelism: ParallelismConfig | None = None
    if require_parallelism or "parallelism" in raw:
        parallelism = _parse_parallelism(raw, workload, violations)
        parallelism_ok = parallelism is not None
    else:
        parallelism_ok = True
    knobs = _parse_knobs(raw, violations)
    cost_params = _parse_cost_params(raw, base_dir, violations)
    if violations or None in (topology, workload, knobs, cost_params) or not parallelism_ok:
        return None, violations
    if parallelism is not None:
        semantic = validate_config(workload, parallelism, topology)
        if semantic:
            return None, [_relocate(v) for v in semantic]
    return (
        RunConfig(
            topology=topology,
            workload=workload,
            parallelism=parallelism,
            knobs=knobs,
            cost_params=cost_params,
        ),
        [],
    )
