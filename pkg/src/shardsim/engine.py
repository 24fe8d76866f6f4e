"""Step-time simulation: compose compute and communication with overlap.

The model is layer-sequential per grad-accumulation microstep.  Forward:
each layer's parameter AllGather is prefetched during the compute of the
preceding layers (window = prefetch_depth layers), so its exposed time is

    exposed_i = max(0, t_gather - min(i, prefetch_depth) * t_layer_fwd)

and layer 0 is always fully exposed.  Tensor-parallel AllReduces block by
default (tp_overlap raises the hidden share).  Backward mirrors forward
with twice the per-layer compute: the gradient ReduceScatter of layer i
overlaps backward compute of the layers after it, and the shallowest
layer's ReduceScatter is fully exposed.  Pipeline point-to-point sends
hide behind the compute of neighbouring microbatches; the fill-and-drain
bubble adds bubble_fraction * (compute + exposed) idle time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .collectives import CollectiveCostParams, collective_time
from .hardware import ClusterTopology, GpuSpec
from .parallelism import (
    ParallelismConfig,
    fsdp_layer_ops,
    local_batch_size,
    pp_schedule,
    tp_layer_ops,
    validate_config,
)
from .workload import (
    MemoryBreakdown,
    TrainingWorkload,
    forward_flops_per_sequence,
    layer_forward_flops,
    memory_per_gpu,
)


@dataclass(frozen=True)
class SimulationKnobs:
    """Tunable model assumptions.

    compute_efficiency is the kernel-level ceiling on achievable FLOP/s
    (end-to-end MFU comes out lower once exposure is added).
    batch_scaling_exponent models sublinear compute cost in batch size:
    compute time scales as batch^exponent, 1.0 meaning linear.
    regather_backward switches parameter sharding to the aggressive mode
    that regathers every layer in the backward pass as well.
    """

    compute_efficiency: float = 0.65
    prefetch_depth: int = 1
    tp_overlap: float = 0.0
    batch_scaling_exponent: float = 1.0
    regather_backward: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.compute_efficiency <= 1.0:
            raise ValueError("compute_efficiency must be in (0, 1]")
        if self.prefetch_depth < 0:
            raise ValueError("prefetch_depth must be >= 0")
        if not 0.0 <= self.tp_overlap <= 1.0:
            raise ValueError("tp_overlap must be in [0, 1]")
        if not 0.0 < self.batch_scaling_exponent <= 1.0:
            raise ValueError("batch_scaling_exponent must be in (0, 1]")


@dataclass(frozen=True)
class PhaseCost:
    """One timeline phase: its compute, communication, and exposed share."""

    phase: str
    compute: float
    comm: float
    exposed: float


@dataclass(frozen=True)
class StepBreakdown:
    """Simulated wall-clock decomposition of one optimizer step.

    step_time is derived, so the identity
    step_time = compute_time + comm_exposed + bubble_time holds exactly.
    """

    compute_time: float
    comm_total: float
    comm_exposed: float
    bubble_time: float
    per_phase: tuple[PhaseCost, ...]
    memory: MemoryBreakdown
    step_time: float = field(init=False)

    def __post_init__(self) -> None:
        for fname in ("compute_time", "comm_total", "comm_exposed", "bubble_time"):
            value = getattr(self, fname)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{fname} must be finite and >= 0")
        if self.comm_exposed > self.comm_total * (1.0 + 1e-12):
            raise ValueError("comm_exposed cannot exceed comm_total")
        object.__setattr__(
            self, "step_time", self.compute_time + self.comm_exposed + self.bubble_time
        )

    @property
    def feasible(self) -> bool:
        return self.memory.feasible


def _batch_scale(batch: int, exponent: float) -> float:
    return float(batch) ** exponent


def microstep_compute_time(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    gpu: GpuSpec,
    knobs: SimulationKnobs,
) -> float:
    """Per-device compute seconds for one grad-accumulation microstep.

    Roofline style: forward + backward = 3x forward FLOPs, split across
    tensor and pipeline groups, at the efficiency-derated peak.
    """
    local = local_batch_size(workload, config)
    dense_fwd = forward_flops_per_sequence(workload.arch, workload.seq_len)
    scale = _batch_scale(local, knobs.batch_scaling_exponent)
    shards = config.tensor_parallel * config.pipeline_parallel
    return 3.0 * dense_fwd * scale / shards / (gpu.peak_flops * knobs.compute_efficiency)


def compute_time(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    gpu: GpuSpec,
    knobs: SimulationKnobs,
) -> float:
    """Per-device compute seconds for a full optimizer step."""
    return config.grad_accum * microstep_compute_time(workload, config, gpu, knobs)


def _prefetch_exposed(
    op_time: float, window: float, layers: int, depth: int
) -> float:
    """Total exposed time of one per-layer collective under prefetch.

    Layer i's transfer overlaps with up to min(i, depth) layer windows of
    compute; whatever does not fit is exposed.  Layer 0 has no preceding
    window and is fully exposed.
    """
    if op_time <= 0.0 or layers <= 0:
        return 0.0
    exposed = 0.0
    for i in range(layers):
        exposed += max(0.0, op_time - min(i, depth) * window)
    return exposed


def simulate_step(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    topology: ClusterTopology,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
) -> StepBreakdown:
    """Simulate one steady-state optimizer step on every device.

    Requires a validated config; raises ValueError listing violations
    otherwise.  Memory infeasibility is reported in the result, not
    raised: the predicted times remain meaningful for what-if analysis.
    """
    params = cost_params if cost_params is not None else CollectiveCostParams()
    k = knobs if knobs is not None else SimulationKnobs()
    violations = validate_config(workload, config, topology)
    if violations:
        raise ValueError("invalid configuration: " + "; ".join(violations))

    arch = workload.arch
    gpu = topology.node.gpu
    dp = config.data_parallel
    tp = config.tensor_parallel
    pp = config.pipeline_parallel
    accum = config.grad_accum
    local = local_batch_size(workload, config)
    layers_per_stage = arch.num_layers // pp

    sched = pp_schedule(workload, config, topology)
    # Per-layer overlap windows follow the batch that actually flows
    # through a stage at once: the whole local batch without a pipeline,
    # one microbatch with it.
    window_batch = local if pp == 1 else config.microbatch
    eff_peak = gpu.peak_flops * k.compute_efficiency
    t_layer_fwd = (
        layer_forward_flops(arch, workload.seq_len)
        * _batch_scale(window_batch, k.batch_scaling_exponent)
        / tp
        / eff_peak
    )
    t_layer_bwd = 2.0 * t_layer_fwd

    micro_compute = microstep_compute_time(workload, config, gpu, k)

    # Sharded-DP collectives: gather each layer every microstep forward,
    # reduce gradients once per step after the last accumulation.
    t_gather = 0.0
    t_reduce = 0.0
    if dp > 1:
        gather_op, reduce_op = fsdp_layer_ops(workload, config, topology)
        t_gather = collective_time(gather_op, params, topology)
        t_reduce = collective_time(reduce_op, params, topology)
    fwd_gather_exposed = _prefetch_exposed(
        t_gather, t_layer_fwd, layers_per_stage, k.prefetch_depth
    )
    bwd_gather_exposed = 0.0
    if k.regather_backward:
        bwd_gather_exposed = _prefetch_exposed(
            t_gather, t_layer_bwd, layers_per_stage, k.prefetch_depth
        )
    reduce_exposed = _prefetch_exposed(
        t_reduce, t_layer_bwd, layers_per_stage, k.prefetch_depth
    )

    # Tensor-parallel activation AllReduces: blocking, 2 forward + 2
    # backward per layer per microstep.
    t_allreduce = 0.0
    tp_ops = tp_layer_ops(workload, config, topology)
    if tp_ops:
        t_allreduce = collective_time(tp_ops[0], params, topology)
    tp_comm_micro = 4.0 * layers_per_stage * t_allreduce
    tp_exposed_micro = tp_comm_micro * (1.0 - k.tp_overlap)

    # Pipeline point-to-point: a mid-stage device forwards and returns
    # every microbatch; each send hides behind the compute of the
    # adjacent microbatch at that stage.
    p2p_comm_micro = 0.0
    p2p_exposed_micro = 0.0
    if sched.send_op is not None:
        t_send = collective_time(sched.send_op, params, topology)
        m = sched.num_microbatches
        fwd_window = (micro_compute / 3.0) / m
        bwd_window = (2.0 * micro_compute / 3.0) / m
        p2p_comm_micro = 2.0 * m * t_send
        p2p_exposed_micro = m * max(0.0, t_send - fwd_window) + m * max(
            0.0, t_send - bwd_window
        )

    gather_multiplier = 2.0 if k.regather_backward else 1.0
    step_compute = accum * micro_compute
    comm_total = (
        accum
        * (
            gather_multiplier * layers_per_stage * t_gather
            + tp_comm_micro
            + p2p_comm_micro
        )
        + layers_per_stage * t_reduce
    )
    raw_exposed = (
        accum * (fwd_gather_exposed + bwd_gather_exposed + tp_exposed_micro + p2p_exposed_micro)
        + reduce_exposed
    )
    # Communication cannot hide more than the compute that runs beside it.
    comm_exposed = min(comm_total, max(raw_exposed, comm_total - step_compute))
    bubble_time = sched.bubble_fraction * (step_compute + comm_exposed)

    fwd_tp_comm = accum * 2.0 * layers_per_stage * t_allreduce
    fwd_tp_exposed = fwd_tp_comm * (1.0 - k.tp_overlap)
    per_phase = (
        PhaseCost(
            phase="forward",
            compute=step_compute / 3.0,
            comm=accum * layers_per_stage * t_gather + fwd_tp_comm,
            exposed=accum * fwd_gather_exposed + fwd_tp_exposed,
        ),
        PhaseCost(
            phase="backward",
            compute=2.0 * step_compute / 3.0,
            comm=(
                (accum * layers_per_stage * t_gather if k.regather_backward else 0.0)
                + fwd_tp_comm
                + layers_per_stage * t_reduce
            ),
            exposed=accum * bwd_gather_exposed + fwd_tp_exposed + reduce_exposed,
        ),
        PhaseCost(
            phase="pipeline",
            compute=0.0,
            comm=accum * p2p_comm_micro,
            exposed=accum * p2p_exposed_micro,
        ),
    )

    memory = memory_per_gpu(
        workload,
        gpu,
        data_parallel=dp,
        tensor_parallel=tp,
        pipeline_parallel=pp,
        local_batch=local,
    )
    return StepBreakdown(
        compute_time=step_compute,
        comm_total=comm_total,
        comm_exposed=comm_exposed,
        bubble_time=bubble_time,
        per_phase=per_phase,
        memory=memory,
    )
