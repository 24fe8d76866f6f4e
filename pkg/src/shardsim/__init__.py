"""Analytical performance simulator and planner for distributed training.

Predicts step time, exposed communication, throughput, MFU, memory, and
power for transformer training under sharded data parallelism, tensor
parallelism, and pipeline parallelism, and searches layouts for the
best configuration on a described GPU cluster.
"""

from ._version import __version__
from .collectives import (
    AlphaBeta,
    CalibrationFitError,
    CollectiveCostParams,
    CollectiveKind,
    CommOp,
    MeasuredBandwidthPoint,
    RingOrTree,
    collective_time,
    event_oracle,
    event_oracle_tree_allreduce,
    fit_cost_params,
    point_to_point_time,
    ring_allreduce_time,
    ring_time,
    tree_allreduce_time,
)
from .config import RunConfig, parse_run_config
from .engine import (
    PhaseCost,
    SimulationKnobs,
    StepBreakdown,
    compute_time,
    simulate_step,
)
from .hardware import (
    ClusterTopology,
    GpuSpec,
    GroupSpan,
    HARDWARE_PRESET_NAMES,
    LinkPath,
    NodeSpec,
    cluster_preset,
    gpu_preset,
    link_path,
    node_preset,
)
from .metrics import MetricsReport, compute_metrics, power_draw
from .parallelism import (
    ParallelismConfig,
    PipelineSchedule,
    fsdp_layer_ops,
    fsdp_ops,
    local_batch_size,
    num_microbatches,
    pp_schedule,
    tp_layer_ops,
    validate_config,
)
from .planner import (
    PlanConstraints,
    PlanEntry,
    PlanResult,
    SweepPoint,
    SweepSeries,
    plan,
    sweep_axis,
    sweep_strong,
    sweep_weak,
)
from .scaling import (
    ShardScaling,
    ShardingDecision,
    decide_resharding,
    estimate_scale_factors,
    sharding_cost_factor,
)
from .workload import (
    MODEL_PRESET_NAMES,
    MemoryBreakdown,
    TrainingWorkload,
    TransformerArch,
    forward_flops_per_sequence,
    layer_forward_flops,
    layer_param_count,
    memory_per_gpu,
    model_preset,
    param_count,
    stage_flops,
    step_flops,
    total_step_flops,
)

__all__ = [
    "__version__",
    "AlphaBeta",
    "CalibrationFitError",
    "ClusterTopology",
    "CollectiveCostParams",
    "CollectiveKind",
    "CommOp",
    "GpuSpec",
    "GroupSpan",
    "HARDWARE_PRESET_NAMES",
    "LinkPath",
    "MeasuredBandwidthPoint",
    "MemoryBreakdown",
    "MetricsReport",
    "MODEL_PRESET_NAMES",
    "NodeSpec",
    "ParallelismConfig",
    "PhaseCost",
    "PipelineSchedule",
    "PlanConstraints",
    "PlanEntry",
    "PlanResult",
    "RingOrTree",
    "RunConfig",
    "ShardScaling",
    "ShardingDecision",
    "SimulationKnobs",
    "StepBreakdown",
    "SweepPoint",
    "SweepSeries",
    "TrainingWorkload",
    "TransformerArch",
    "cluster_preset",
    "collective_time",
    "compute_metrics",
    "compute_time",
    "decide_resharding",
    "estimate_scale_factors",
    "event_oracle",
    "event_oracle_tree_allreduce",
    "fit_cost_params",
    "forward_flops_per_sequence",
    "fsdp_layer_ops",
    "fsdp_ops",
    "gpu_preset",
    "layer_forward_flops",
    "layer_param_count",
    "link_path",
    "local_batch_size",
    "memory_per_gpu",
    "model_preset",
    "node_preset",
    "num_microbatches",
    "param_count",
    "parse_run_config",
    "plan",
    "point_to_point_time",
    "power_draw",
    "pp_schedule",
    "ring_allreduce_time",
    "ring_time",
    "sharding_cost_factor",
    "simulate_step",
    "stage_flops",
    "step_flops",
    "sweep_axis",
    "sweep_strong",
    "sweep_weak",
    "total_step_flops",
    "tp_layer_ops",
    "tree_allreduce_time",
    "validate_config",
]
