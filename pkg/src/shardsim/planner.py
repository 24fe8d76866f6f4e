"""Enumerate, rank, and sweep parallelism configurations.

The search grid uses power-of-two tensor- and pipeline-parallel degrees
up to 16.  For each (tp, pp) the data-parallel degree is fixed by the
world size, gradient accumulation is the smallest power of two that
makes the batch divisible and the memory fit, and pipelined layouts try
a small ladder of microbatch counts.  Ranking is throughput-first with
an energy-first alternative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .collectives import CollectiveCostParams
from .engine import SimulationKnobs, StepBreakdown, simulate_step
from .hardware import (
    ClusterTopology,
    NodeSpec,
    node_preset,
)
from .metrics import MetricsReport, compute_metrics
from .parallelism import ParallelismConfig, validate_config
from .workload import (
    TrainingWorkload,
    TransformerArch,
    memory_per_gpu,
    model_preset,
    param_count,
)

PARALLEL_DEGREES = (1, 2, 4, 8, 16)

OBJECTIVES = ("throughput", "energy")


@dataclass(frozen=True)
class PlanConstraints:
    """Bounds and objective for the configuration search."""

    max_tensor_parallel: int = 16
    max_pipeline_parallel: int = 16
    objective: str = "throughput"
    max_grad_accum: int = 1024
    memory_cap: float | None = None

    def __post_init__(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.max_tensor_parallel < 1 or self.max_pipeline_parallel < 1:
            raise ValueError("parallelism bounds must be >= 1")
        if self.max_grad_accum < 1:
            raise ValueError("max_grad_accum must be >= 1")


@dataclass(frozen=True)
class PlanEntry:
    """One simulated candidate configuration."""

    config: ParallelismConfig
    breakdown: StepBreakdown
    metrics: MetricsReport


@dataclass(frozen=True)
class PlanResult:
    """Ranked feasible configurations plus search accounting."""

    entries: tuple[PlanEntry, ...]
    enumerated: int
    infeasible: int
    constraints: PlanConstraints

    @property
    def best(self) -> PlanEntry | None:
        return self.entries[0] if self.entries else None


def _rank_key(entry: PlanEntry, objective: str):
    primary = (
        -entry.metrics.wps_global
        if objective == "throughput"
        else -entry.metrics.tokens_per_watt
    )
    cfg = entry.config
    return (
        primary,
        entry.metrics.power_per_gpu,
        cfg.tensor_parallel * cfg.pipeline_parallel,
        cfg.tensor_parallel,
        cfg.pipeline_parallel,
        cfg.microbatch,
    )


def _min_grad_accum(
    workload: TrainingWorkload,
    topology: ClusterTopology,
    dp: int,
    tp: int,
    pp: int,
    constraints: PlanConstraints,
) -> int | None:
    """Smallest power-of-two accumulation that divides the batch and fits."""
    if workload.global_batch % dp:
        return None
    cap = (
        constraints.memory_cap
        if constraints.memory_cap is not None
        else topology.node.gpu.memory_capacity
    )
    accum = 1
    while accum <= constraints.max_grad_accum:
        if workload.global_batch % (dp * accum) == 0:
            local = workload.global_batch // (dp * accum)
            if local >= 1:
                memory = memory_per_gpu(
                    workload,
                    topology.node.gpu,
                    data_parallel=dp,
                    tensor_parallel=tp,
                    pipeline_parallel=pp,
                    local_batch=local,
                )
                if memory.total <= cap:
                    return accum
        accum *= 2
    return None


def _microbatch_candidates(local: int, pp: int) -> list[int]:
    """Microbatch sizes to try, from the microbatch-count ladder."""
    if pp == 1:
        return [local]
    sizes = set()
    for count in (1, 2, 4, 8, pp, 2 * pp, 4 * pp):
        if count >= pp and count <= local and local % count == 0:
            sizes.add(local // count)
    return sorted(sizes, reverse=True)


def plan(
    workload: TrainingWorkload,
    topology: ClusterTopology,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
    constraints: PlanConstraints | None = None,
) -> PlanResult:
    """Search the parallelism grid and rank the feasible configurations.

    An empty entries tuple is the explicit "no feasible configuration"
    answer; the enumerated/infeasible counters always satisfy
    enumerated = len(entries) + infeasible.
    """
    cons = constraints if constraints is not None else PlanConstraints()
    world = topology.world_size
    arch = workload.arch
    cap = (
        cons.memory_cap
        if cons.memory_cap is not None
        else topology.node.gpu.memory_capacity
    )

    entries: list[PlanEntry] = []
    enumerated = 0
    infeasible = 0
    for tp in PARALLEL_DEGREES:
        if tp > cons.max_tensor_parallel or tp > world:
            continue
        for pp in PARALLEL_DEGREES:
            if pp > cons.max_pipeline_parallel or tp * pp > world:
                continue
            enumerated += 1
            if tp > 1 and (
                arch.num_heads % tp or arch.ffn_dim % tp or arch.vocab_size % tp
            ):
                infeasible += 1
                continue
            if arch.num_layers % pp or world % (tp * pp):
                infeasible += 1
                continue
            dp = world // (tp * pp)
            accum = _min_grad_accum(workload, topology, dp, tp, pp, cons)
            if accum is None:
                infeasible += 1
                continue
            local = workload.global_batch // (dp * accum)
            candidates = _microbatch_candidates(local, pp)
            if not candidates:
                infeasible += 1
                continue
            # The (tp, pp) cell was counted once; extra microbatch
            # variants extend the enumeration count.
            enumerated += len(candidates) - 1
            for microbatch in candidates:
                config = ParallelismConfig(
                    data_parallel=dp,
                    tensor_parallel=tp,
                    pipeline_parallel=pp,
                    microbatch=microbatch,
                    grad_accum=accum,
                )
                if validate_config(workload, config, topology):
                    infeasible += 1
                    continue
                breakdown = simulate_step(workload, config, topology, cost_params, knobs)
                if breakdown.memory.total > cap:
                    infeasible += 1
                    continue
                metrics = compute_metrics(breakdown, workload, config, topology)
                entries.append(PlanEntry(config=config, breakdown=breakdown, metrics=metrics))

    entries.sort(key=lambda e: _rank_key(e, cons.objective))
    return PlanResult(
        entries=tuple(entries),
        enumerated=enumerated,
        infeasible=infeasible,
        constraints=cons,
    )


@dataclass(frozen=True)
class SweepPoint:
    """One sweep sample: the axis value and the simulated outcome there."""

    axis_value: float
    label: str
    config: ParallelismConfig
    breakdown: StepBreakdown
    metrics: MetricsReport
    wps_ideal: float | None = None


@dataclass(frozen=True)
class SweepSeries:
    """Sweep results along one axis, in strictly increasing axis order."""

    axis: str
    points: tuple[SweepPoint, ...]
    notices: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        values = [point.axis_value for point in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("axis values must be strictly increasing")


def sweep_weak(
    arch: TransformerArch,
    seq_len: int,
    local_batch: int,
    node_spec: NodeSpec,
    node_counts: Sequence[int],
    *,
    param_bytes: int = 2,
    tensor_parallel: int = 1,
    pipeline_parallel: int = 1,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
) -> SweepSeries:
    """Scale the cluster with fixed per-device work.

    The global batch grows with the data-parallel degree so every rank
    keeps `local_batch` sequences per step.  Each point also carries the
    linear-scaling reference wps_ideal extrapolated from the first point.
    """
    points: list[SweepPoint] = []
    notices: list[str] = []
    base_wps: float | None = None
    base_world: int | None = None
    for nodes in sorted(set(node_counts)):
        topology = ClusterTopology(node=node_spec, num_nodes=nodes)
        world = topology.world_size
        if world % (tensor_parallel * pipeline_parallel):
            notices.append(f"skipped {nodes} nodes: world size not divisible by tp*pp")
            continue
        dp = world // (tensor_parallel * pipeline_parallel)
        workload = TrainingWorkload(
            arch=arch,
            global_batch=local_batch * dp,
            seq_len=seq_len,
            param_bytes=param_bytes,
        )
        config = ParallelismConfig(
            data_parallel=dp,
            tensor_parallel=tensor_parallel,
            pipeline_parallel=pipeline_parallel,
            microbatch=local_batch if pipeline_parallel == 1 else 1,
        )
        violations = validate_config(workload, config, topology)
        if violations:
            notices.append(f"skipped {nodes} nodes: " + "; ".join(violations))
            continue
        breakdown = simulate_step(workload, config, topology, cost_params, knobs)
        metrics = compute_metrics(breakdown, workload, config, topology)
        if base_wps is None:
            base_wps = metrics.wps_global
            base_world = world
        ideal = base_wps * (world / base_world)
        points.append(
            SweepPoint(
                axis_value=float(world),
                label=f"{world} gpus",
                config=config,
                breakdown=breakdown,
                metrics=metrics,
                wps_ideal=ideal,
            )
        )
    return SweepSeries(axis="world", points=tuple(points), notices=tuple(notices))


def sweep_strong(
    arch: TransformerArch,
    global_batch: int,
    seq_len: int,
    node_spec: NodeSpec,
    node_counts: Sequence[int],
    *,
    param_bytes: int = 2,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
    constraints: PlanConstraints | None = None,
) -> SweepSeries:
    """Scale the cluster under a fixed global batch, planning each point."""
    workload_proto = TrainingWorkload(
        arch=arch, global_batch=global_batch, seq_len=seq_len, param_bytes=param_bytes
    )
    points: list[SweepPoint] = []
    notices: list[str] = []
    base_wps: float | None = None
    base_world: int | None = None
    for nodes in sorted(set(node_counts)):
        topology = ClusterTopology(node=node_spec, num_nodes=nodes)
        result = plan(workload_proto, topology, cost_params, knobs, constraints)
        best = result.best
        if best is None:
            notices.append(f"skipped {nodes} nodes: no feasible configuration")
            continue
        world = topology.world_size
        if base_wps is None:
            base_wps = best.metrics.wps_global
            base_world = world
        ideal = base_wps * (world / base_world)
        points.append(
            SweepPoint(
                axis_value=float(world),
                label=f"{world} gpus",
                config=best.config,
                breakdown=best.breakdown,
                metrics=best.metrics,
                wps_ideal=ideal,
            )
        )
    return SweepSeries(axis="batch", points=tuple(points), notices=tuple(notices))


def _axis_point(
    value: float,
    label: str,
    workload: TrainingWorkload,
    topology: ClusterTopology,
    parallelism: ParallelismConfig | None,
    cost_params: CollectiveCostParams | None,
    knobs: SimulationKnobs | None,
    constraints: PlanConstraints | None,
    notices: list[str],
) -> SweepPoint | None:
    if parallelism is not None:
        violations = validate_config(workload, parallelism, topology)
        if violations:
            notices.append(f"skipped {label}: " + "; ".join(violations))
            return None
        breakdown = simulate_step(workload, parallelism, topology, cost_params, knobs)
        metrics = compute_metrics(breakdown, workload, parallelism, topology)
        return SweepPoint(
            axis_value=value,
            label=label,
            config=parallelism,
            breakdown=breakdown,
            metrics=metrics,
        )
    result = plan(workload, topology, cost_params, knobs, constraints)
    best = result.best
    if best is None:
        notices.append(f"skipped {label}: no feasible configuration")
        return None
    return SweepPoint(
        axis_value=value,
        label=label,
        config=best.config,
        breakdown=best.breakdown,
        metrics=best.metrics,
    )


def sweep_axis(
    axis: str,
    values: Sequence[object],
    *,
    arch: TransformerArch,
    global_batch: int,
    seq_len: int,
    node_spec: NodeSpec,
    num_nodes: int,
    parallelism: ParallelismConfig | None = None,
    param_bytes: int = 2,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
    constraints: PlanConstraints | None = None,
) -> SweepSeries:
    """Vary one workload or hardware axis with everything else fixed.

    axis "model" takes architecture preset names (ordered by parameter
    count), "seqlen" takes sequence lengths, and "hw" takes hardware
    preset names (ordered by peak FLOP/s).  With a parallelism config
    the same layout is simulated at every point; otherwise each point is
    re-planned.
    """
    if axis not in ("model", "seqlen", "hw"):
        raise ValueError("axis must be one of 'model', 'seqlen', 'hw'")
    notices: list[str] = []
    raw_points: list[SweepPoint] = []
    for value in values:
        if axis == "model":
            point_arch = model_preset(str(value))
            workload = TrainingWorkload(
                arch=point_arch,
                global_batch=global_batch,
                seq_len=seq_len,
                param_bytes=param_bytes,
            )
            topology = ClusterTopology(node=node_spec, num_nodes=num_nodes)
            axis_value = float(param_count(point_arch))
            label = str(value)
        elif axis == "seqlen":
            workload = TrainingWorkload(
                arch=arch,
                global_batch=global_batch,
                seq_len=int(value),
                param_bytes=param_bytes,
            )
            topology = ClusterTopology(node=node_spec, num_nodes=num_nodes)
            axis_value = float(int(value))
            label = f"seq {value}"
        else:
            point_node = node_preset(str(value))
            workload = TrainingWorkload(
                arch=arch,
                global_batch=global_batch,
                seq_len=seq_len,
                param_bytes=param_bytes,
            )
            topology = ClusterTopology(node=point_node, num_nodes=num_nodes)
            axis_value = float(point_node.gpu.peak_flops)
            label = str(value)
        point = _axis_point(
            axis_value,
            label,
            workload,
            topology,
            parallelism,
            cost_params,
            knobs,
            constraints,
            notices,
        )
        if point is not None:
            raw_points.append(point)
    raw_points.sort(key=lambda p: p.axis_value)
    return SweepSeries(axis=axis, points=tuple(raw_points), notices=tuple(notices))
