"""Deterministic serialization shared by the CLI and the HTTP service.

All floats are rounded to 6 significant digits and non-finite values
become null, keys are emitted in sorted order, and the same renderer
backs both output paths, so identical inputs produce byte-identical
JSON wherever they are requested from.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

from ._version import __version__
from .collectives import CollectiveKind, MeasuredBandwidthPoint
from .engine import SimulationKnobs, StepBreakdown
from .hardware import GpuSpec, NodeSpec
from .metrics import MetricsReport
from .parallelism import ParallelismConfig, local_batch_size, num_microbatches
from .planner import PlanResult, SweepSeries
from .scaling import ShardingDecision
from .workload import MemoryBreakdown, TrainingWorkload, TransformerArch, param_count


def _canonical(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format(value, ".6g"))
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(payload: dict) -> str:
    """Render a payload to canonical JSON text (no trailing newline)."""
    return json.dumps(_canonical(payload), sort_keys=True, indent=2)


def format_number(value: float) -> str:
    """The same 6-significant-digit formatting, for CSV and tables."""
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        return ""
    return format(value, ".6g")


def envelope(result_key: str | None, payload: dict | None, errors: Iterable[str] = ()) -> dict:
    """Standard response wrapper: a result or an error list, never both."""
    body: dict[str, Any] = {"engine_version": __version__, "errors": list(errors)}
    if result_key is not None and payload is not None:
        body[result_key] = payload
    return body


def gpu_dict(gpu: GpuSpec) -> dict:
    return {
        "name": gpu.name,
        "peak_flops": gpu.peak_flops,
        "hbm_bandwidth_bytes_per_s": gpu.hbm_bandwidth,
        "memory_capacity_bytes": gpu.memory_capacity,
        "power_peak_w": gpu.power_peak,
        "power_idle_w": gpu.power_idle,
    }


def node_dict(node: NodeSpec) -> dict:
    return {
        "gpu": gpu_dict(node.gpu),
        "gpus_per_node": node.gpus_per_node,
        "intranode_bandwidth_bytes_per_s": node.intranode_bandwidth,
        "internode_bandwidth_bytes_per_s": node.internode_bandwidth,
        "intranode_latency_s": node.intranode_latency,
        "internode_latency_s": node.internode_latency,
    }


def arch_dict(arch: TransformerArch) -> dict:
    return {
        "name": arch.name,
        "num_layers": arch.num_layers,
        "hidden_dim": arch.hidden_dim,
        "num_heads": arch.num_heads,
        "ffn_dim": arch.ffn_dim,
        "vocab_size": arch.vocab_size,
        "max_seq_len": arch.max_seq_len,
        "param_count": param_count(arch),
    }


def knobs_dict(knobs: SimulationKnobs) -> dict:
    return {
        "compute_efficiency": knobs.compute_efficiency,
        "prefetch_depth": knobs.prefetch_depth,
        "tp_overlap": knobs.tp_overlap,
        "batch_scaling_exponent": knobs.batch_scaling_exponent,
        "regather_backward": knobs.regather_backward,
    }


def config_dict(config: ParallelismConfig, workload: TrainingWorkload | None = None) -> dict:
    body = {
        "dp_shard": config.data_parallel,
        "tp": config.tensor_parallel,
        "pp": config.pipeline_parallel,
        "microbatch": config.microbatch,
        "grad_accum": config.grad_accum,
        "parallelism_factor": config.tensor_parallel * config.pipeline_parallel,
        "world_size": config.world_size,
    }
    if workload is not None:
        body["local_batch"] = local_batch_size(workload, config)
        body["microbatches"] = num_microbatches(workload, config)
    return body


def memory_dict(memory: MemoryBreakdown) -> dict:
    return {
        "params_bytes": memory.params,
        "grads_bytes": memory.grads,
        "optimizer_bytes": memory.optimizer,
        "activations_bytes": memory.activations,
        "total_bytes": memory.total,
        "capacity_bytes": memory.capacity,
        "feasible": memory.feasible,
    }


def breakdown_dict(breakdown: StepBreakdown) -> dict:
    return {
        "compute_time_s": breakdown.compute_time,
        "comm_total_s": breakdown.comm_total,
        "comm_exposed_s": breakdown.comm_exposed,
        "bubble_time_s": breakdown.bubble_time,
        "step_time_s": breakdown.step_time,
        "per_phase": [
            {
                "phase": phase.phase,
                "compute_s": phase.compute,
                "comm_s": phase.comm,
                "exposed_s": phase.exposed,
            }
            for phase in breakdown.per_phase
        ],
        "memory": memory_dict(breakdown.memory),
        "feasible": breakdown.feasible,
    }


def metrics_dict(metrics: MetricsReport) -> dict:
    return {
        "wps_global": metrics.wps_global,
        "wps_per_gpu": metrics.wps_per_gpu,
        "mfu": metrics.mfu,
        "observed_flops_per_gpu": metrics.observed_flops_per_gpu,
        "power_per_gpu_w": metrics.power_per_gpu,
        "tokens_per_watt": metrics.tokens_per_watt,
        "memory_per_gpu_bytes": metrics.memory_per_gpu_bytes,
        "exposed_comm_fraction": metrics.exposed_comm_fraction,
        "feasible": metrics.feasible,
    }


def plan_dict(result: PlanResult, workload: TrainingWorkload) -> dict:
    return {
        "objective": result.constraints.objective,
        "enumerated": result.enumerated,
        "infeasible": result.infeasible,
        "entries": [
            {
                "rank": rank,
                "config": config_dict(entry.config, workload),
                "metrics": metrics_dict(entry.metrics),
                "breakdown": breakdown_dict(entry.breakdown),
            }
            for rank, entry in enumerate(result.entries, start=1)
        ],
    }


def sweep_dict(series: SweepSeries) -> dict:
    return {
        "axis": series.axis,
        "notices": list(series.notices),
        "points": [
            {
                "axis_value": point.axis_value,
                "label": point.label,
                "wps_ideal": point.wps_ideal,
                "config": config_dict(point.config),
                "metrics": metrics_dict(point.metrics),
                "breakdown": breakdown_dict(point.breakdown),
            }
            for point in series.points
        ],
    }


def decision_dict(decision: ShardingDecision) -> dict:
    scaling = decision.scaling
    return {
        "p": scaling.p,
        "p_prime": scaling.p_prime,
        "s_b": scaling.s_b,
        "s_c": scaling.s_c,
        "ell": scaling.ell,
        "c": scaling.c,
        "improves": decision.improves,
        "simulated_wps_ratio": decision.simulated_wps_ratio,
        "agrees": decision.agrees,
    }


SWEEP_CSV_COLUMNS = (
    "axis",
    "axis_value",
    "label",
    "dp_shard",
    "tp",
    "pp",
    "microbatch",
    "grad_accum",
    "wps_global",
    "wps_per_gpu",
    "wps_ideal",
    "mfu",
    "exposed_comm_fraction",
    "power_per_gpu_w",
    "tokens_per_watt",
    "step_time_s",
    "compute_time_s",
    "comm_total_s",
    "comm_exposed_s",
    "bubble_time_s",
    "memory_per_gpu_bytes",
    "feasible",
)


def sweep_csv(series: SweepSeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_CSV_COLUMNS)
    for point in series.points:
        cfg = point.config
        m = point.metrics
        b = point.breakdown
        writer.writerow(
            [
                series.axis,
                format_number(point.axis_value),
                point.label,
                cfg.data_parallel,
                cfg.tensor_parallel,
                cfg.pipeline_parallel,
                cfg.microbatch,
                cfg.grad_accum,
                format_number(m.wps_global),
                format_number(m.wps_per_gpu),
                format_number(point.wps_ideal) if point.wps_ideal is not None else "",
                format_number(m.mfu),
                format_number(m.exposed_comm_fraction),
                format_number(m.power_per_gpu),
                format_number(m.tokens_per_watt),
                format_number(b.step_time),
                format_number(b.compute_time),
                format_number(b.comm_total),
                format_number(b.comm_exposed),
                format_number(b.bubble_time),
                format_number(m.memory_per_gpu_bytes),
                str(m.feasible).lower(),
            ]
        )
    return out.getvalue()


PLAN_CSV_COLUMNS = (
    "rank",
    "dp_shard",
    "tp",
    "pp",
    "microbatch",
    "grad_accum",
    "wps_global",
    "mfu",
    "exposed_comm_fraction",
    "power_per_gpu_w",
    "tokens_per_watt",
    "step_time_s",
    "memory_per_gpu_bytes",
    "feasible",
)


def plan_csv(result: PlanResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(PLAN_CSV_COLUMNS)
    for rank, entry in enumerate(result.entries, start=1):
        cfg = entry.config
        m = entry.metrics
        writer.writerow(
            [
                rank,
                cfg.data_parallel,
                cfg.tensor_parallel,
                cfg.pipeline_parallel,
                cfg.microbatch,
                cfg.grad_accum,
                format_number(m.wps_global),
                format_number(m.mfu),
                format_number(m.exposed_comm_fraction),
                format_number(m.power_per_gpu),
                format_number(m.tokens_per_watt),
                format_number(entry.breakdown.step_time),
                format_number(m.memory_per_gpu_bytes),
                str(m.feasible).lower(),
            ]
        )
    return out.getvalue()


CALIBRATION_CSV_HEADER = ("kind", "group_size", "message_bytes", "bus_bandwidth_bytes_per_s")


def read_calibration_csv(text: str) -> list[MeasuredBandwidthPoint]:
    """Parse measured bus-bandwidth points from calibration CSV text."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("calibration CSV is empty")
    header = tuple(cell.strip() for cell in rows[0])
    if header != CALIBRATION_CSV_HEADER:
        raise ValueError(
            f"calibration CSV header must be {','.join(CALIBRATION_CSV_HEADER)}"
        )
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 columns")
        kind = CollectiveKind(row[0].strip())
        points.append(
            MeasuredBandwidthPoint(
                kind=kind,
                group_size=int(row[1]),
                message_bytes=float(row[2]),
                bus_bandwidth=float(row[3]),
            )
        )
    return points


def simulate_table(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    breakdown: StepBreakdown,
    metrics: MetricsReport,
) -> str:
    """Aligned key/value report for terminal output."""
    rows = [
        ("layout", f"dp={config.data_parallel} tp={config.tensor_parallel} "
                   f"pp={config.pipeline_parallel} microbatch={config.microbatch} "
                   f"grad_accum={config.grad_accum}"),
        ("local batch", str(local_batch_size(workload, config))),
        ("step time", f"{format_number(breakdown.step_time)} s"),
        ("compute time", f"{format_number(breakdown.compute_time)} s"),
        ("comm total", f"{format_number(breakdown.comm_total)} s"),
        ("comm exposed", f"{format_number(breakdown.comm_exposed)} s"),
        ("bubble time", f"{format_number(breakdown.bubble_time)} s"),
        ("exposed fraction", format_number(metrics.exposed_comm_fraction)),
        ("wps global", format_number(metrics.wps_global)),
        ("wps per gpu", format_number(metrics.wps_per_gpu)),
        ("mfu", format_number(metrics.mfu)),
        ("power per gpu", f"{format_number(metrics.power_per_gpu)} W"),
        ("tokens per watt", format_number(metrics.tokens_per_watt)),
        ("memory per gpu", f"{format_number(metrics.memory_per_gpu_bytes / 2**30)} GiB"),
        ("memory feasible", str(breakdown.feasible).lower()),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows) + "\n"


def plan_table(result: PlanResult) -> str:
    if not result.entries:
        return "no feasible configuration\n"
    header = ("rank", "dp", "tp", "pp", "micro", "accum", "wps_global", "mfu", "power_w", "step_s")
    rows = [header]
    for rank, entry in enumerate(result.entries, start=1):
        cfg = entry.config
        m = entry.metrics
        rows.append(
            (
                str(rank),
                str(cfg.data_parallel),
                str(cfg.tensor_parallel),
                str(cfg.pipeline_parallel),
                str(cfg.microbatch),
                str(cfg.grad_accum),
                format_number(m.wps_global),
                format_number(m.mfu),
                format_number(m.power_per_gpu),
                format_number(entry.breakdown.step_time),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines) + "\n"


def sweep_table(series: SweepSeries) -> str:
    header = ("axis_value", "label", "wps_global", "wps_ideal", "mfu", "exposed_frac", "step_s")
    rows = [header]
    for point in series.points:
        m = point.metrics
        rows.append(
            (
                format_number(point.axis_value),
                point.label,
                format_number(m.wps_global),
                format_number(point.wps_ideal) if point.wps_ideal is not None else "-",
                format_number(m.mfu),
                format_number(m.exposed_comm_fraction),
                format_number(point.breakdown.step_time),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    body = "\n".join(lines) + "\n"
    if series.notices:
        body += "".join(f"note: {notice}\n" for notice in series.notices)
    return body
