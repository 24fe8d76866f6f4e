"""Derived performance metrics: throughput, MFU, power, energy efficiency.

MFU counts true model FLOPs (backward = 2x forward, no efficiency
derating) against the hardware peak, so it reflects both kernel
efficiency and exposure.  Power follows a linear-in-MFU model anchored
at a reference utilization and clamped to the idle/peak envelope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import StepBreakdown
from .hardware import ClusterTopology, GpuSpec
from .parallelism import ParallelismConfig, local_batch_size
from .workload import TrainingWorkload, step_flops

POWER_SLOPE_DEFAULT = 0.158
POWER_MFU_REFERENCE = 0.40


@dataclass(frozen=True)
class MetricsReport:
    """Step-level performance metrics for one simulated configuration."""

    wps_global: float
    wps_per_gpu: float
    mfu: float
    observed_flops_per_gpu: float
    power_per_gpu: float
    tokens_per_watt: float
    memory_per_gpu_bytes: float
    exposed_comm_fraction: float
    feasible: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.mfu <= 1.0:
            raise ValueError("mfu must be in [0, 1]")
        for fname in (
            "wps_global",
            "wps_per_gpu",
            "observed_flops_per_gpu",
            "power_per_gpu",
            "tokens_per_watt",
            "memory_per_gpu_bytes",
            "exposed_comm_fraction",
        ):
            if getattr(self, fname) < 0.0:
                raise ValueError(f"{fname} must be >= 0")


def power_draw(
    mfu: float,
    gpu: GpuSpec,
    slope: float = POWER_SLOPE_DEFAULT,
    mfu_reference: float = POWER_MFU_REFERENCE,
) -> float:
    """Average per-GPU power in watts as a linear function of MFU.

        P = power_peak * (1 - slope * (1 - mfu / mfu_reference))

    clamped to [power_idle, power_peak].  At the reference utilization
    the draw is the board peak; each relative drop in utilization costs
    `slope` times that drop in relative power, which is why heavily
    communication-bound steps still burn nearly full power.
    """
    if not 0.0 <= mfu <= 1.0:
        raise ValueError("mfu must be in [0, 1]")
    raw = gpu.power_peak * (1.0 - slope * (1.0 - mfu / mfu_reference))
    return min(gpu.power_peak, max(gpu.power_idle, raw))


def compute_metrics(
    breakdown: StepBreakdown,
    workload: TrainingWorkload,
    config: ParallelismConfig,
    topology: ClusterTopology,
    power_slope: float = POWER_SLOPE_DEFAULT,
) -> MetricsReport:
    """Convert a step breakdown into throughput, MFU, power, and memory."""
    step_time = breakdown.step_time
    if step_time <= 0.0:
        raise ValueError("step_time must be positive")
    gpu = topology.node.gpu
    world = topology.world_size

    tokens_per_step = workload.global_batch * workload.seq_len
    wps_global = tokens_per_step / step_time
    wps_per_gpu = wps_global / world

    local = local_batch_size(workload, config)
    device_flops = (
        step_flops(workload, local, config.tensor_parallel)
        / config.pipeline_parallel
        * config.grad_accum
    )
    observed = device_flops / step_time
    mfu = observed / gpu.peak_flops
    power = power_draw(mfu, gpu, slope=power_slope)
    tokens_per_watt = wps_global / (power * world)

    return MetricsReport(
        wps_global=wps_global,
        wps_per_gpu=wps_per_gpu,
        mfu=mfu,
        observed_flops_per_gpu=observed,
        power_per_gpu=power,
        tokens_per_watt=tokens_per_watt,
        memory_per_gpu_bytes=breakdown.memory.total,
        exposed_comm_fraction=breakdown.comm_exposed / step_time,
        feasible=breakdown.feasible,
    )
