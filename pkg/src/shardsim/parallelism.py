"""Parallelism layout: degrees, rank placement, and the comm ops each implies.

Placement order is tensor-parallel innermost (fastest-varying ranks), then
data-parallel, then pipeline-parallel outermost.  A group is intra-node when
it fits inside one node under that order:

    tp group intra-node   iff tp <= gpus_per_node
    dp group intra-node   iff tp * dp <= gpus_per_node
    pp neighbours intra   iff tp * dp < gpus_per_node
"""

from __future__ import annotations

from dataclasses import dataclass

from .collectives import CollectiveKind, CommOp
from .hardware import ClusterTopology, GroupSpan
from .workload import TrainingWorkload, layer_param_count


@dataclass(frozen=True)
class ParallelismConfig:
    """Degrees of each parallelism axis plus batch splitting.

    data_parallel ranks shard gradients and optimizer state and gather
    parameters layer by layer; tensor_parallel splits matmuls within a
    layer; pipeline_parallel splits the layer stack into stages executed
    over num_microbatches per grad-accumulation microstep; grad_accum
    repeats the forward/backward before the optimizer step.
    """

    data_parallel: int = 1
    tensor_parallel: int = 1
    pipeline_parallel: int = 1
    microbatch: int = 1
    grad_accum: int = 1

    def __post_init__(self) -> None:
        for fname in ("data_parallel", "tensor_parallel", "pipeline_parallel", "microbatch", "grad_accum"):
            value = getattr(self, fname)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{fname} must be an integer >= 1")

    @property
    def world_size(self) -> int:
        return self.data_parallel * self.tensor_parallel * self.pipeline_parallel


def local_batch_size(workload: TrainingWorkload, config: ParallelismConfig) -> int:
    """Sequences one data-parallel rank processes per grad-accum microstep."""
    return workload.global_batch // (config.data_parallel * config.grad_accum)


def num_microbatches(workload: TrainingWorkload, config: ParallelismConfig) -> int:
    """Pipeline microbatches per grad-accum microstep."""
    return local_batch_size(workload, config) // config.microbatch


def validate_config(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    topology: ClusterTopology,
) -> list[str]:
    """Return human-readable violations, each prefixed with a field path.

    An empty list means the layout is well-formed (it may still be
    memory-infeasible; that is a simulation result, not a violation).
    """
    violations: list[str] = []
    arch = workload.arch
    dp = config.data_parallel
    tp = config.tensor_parallel
    pp = config.pipeline_parallel

    if config.world_size != topology.world_size:
        violations.append(
            f"config: product mismatch: dp*tp*pp = {config.world_size} "
            f"does not equal the cluster world size {topology.world_size}"
        )
    if tp > 1:
        if arch.num_heads % tp:
            violations.append(
                f"config/tensor_parallel: {tp} does not divide num_heads {arch.num_heads}"
            )
        if arch.ffn_dim % tp:
            violations.append(
                f"config/tensor_parallel: {tp} does not divide ffn_dim {arch.ffn_dim}"
            )
        if arch.vocab_size % tp:
            violations.append(
                f"config/tensor_parallel: {tp} does not divide vocab_size {arch.vocab_size}"
            )
    if arch.num_layers % pp:
        violations.append(
            f"config/pipeline_parallel: {pp} does not divide num_layers {arch.num_layers}"
        )
    if workload.global_batch % (dp * config.grad_accum):
        violations.append(
            f"workload/global_batch: {workload.global_batch} is not divisible by "
            f"data_parallel * grad_accum = {dp * config.grad_accum}"
        )
    else:
        local = local_batch_size(workload, config)
        if local % config.microbatch:
            violations.append(
                f"config/microbatch: {config.microbatch} does not divide "
                f"the per-rank microstep batch {local}"
            )
        elif pp > 1 and num_microbatches(workload, config) < pp:
            violations.append(
                f"config/microbatch: only {num_microbatches(workload, config)} pipeline "
                f"microbatches for {pp} stages; need at least one per stage"
            )
    return violations


def tp_span(config: ParallelismConfig, topology: ClusterTopology) -> GroupSpan:
    per_node = topology.node.gpus_per_node
    return GroupSpan.INTRA_NODE if config.tensor_parallel <= per_node else GroupSpan.CROSS_NODE


def dp_span(config: ParallelismConfig, topology: ClusterTopology) -> GroupSpan:
    per_node = topology.node.gpus_per_node
    if config.tensor_parallel * config.data_parallel <= per_node:
        return GroupSpan.INTRA_NODE
    return GroupSpan.CROSS_NODE


def pp_span(config: ParallelismConfig, topology: ClusterTopology) -> GroupSpan:
    per_node = topology.node.gpus_per_node
    if config.tensor_parallel * config.data_parallel < per_node:
        return GroupSpan.INTRA_NODE
    return GroupSpan.CROSS_NODE


def fsdp_layer_ops(
    workload: TrainingWorkload, config: ParallelismConfig, topology: ClusterTopology
) -> tuple[CommOp, CommOp]:
    """Per-layer sharded-DP ops: (forward AllGather, gradient ReduceScatter).

    Each rank holds 1/dp of every layer; the full layer is gathered before
    its forward (and reused in backward without regathering), and its
    gradient is reduce-scattered once per optimizer step.  Payloads are the
    layer's parameter bytes after tensor/pipeline splitting.
    """
    dp = config.data_parallel
    span = dp_span(config, topology)
    layer_bytes = (
        workload.param_bytes * layer_param_count(workload.arch) / config.tensor_parallel
    )
    gather = CommOp(
        kind=CollectiveKind.ALL_GATHER,
        payload_bytes=layer_bytes,
        group_size=dp,
        span=span,
    )
    scatter = CommOp(
        kind=CollectiveKind.REDUCE_SCATTER,
        payload_bytes=layer_bytes,
        group_size=dp,
        span=span,
    )
    return gather, scatter


def fsdp_total_param_bytes(workload: TrainingWorkload, config: ParallelismConfig) -> float:
    """Parameter bytes one rank gathers for a full forward pass.

    Covers the sharded transformer stack (embeddings stay replicated),
    after tensor and pipeline splitting; equals the sum of the per-layer
    AllGather payloads.
    """
    layer_bytes = workload.param_bytes * layer_param_count(workload.arch)
    layers_per_stage = workload.arch.num_layers // config.pipeline_parallel
    return layers_per_stage * layer_bytes / config.tensor_parallel


def fsdp_ops(
    workload: TrainingWorkload,
    config: ParallelismConfig,
    topology: ClusterTopology,
    regather_backward: bool = False,
) -> list[CommOp]:
    """All sharded-DP collectives one device issues per optimizer step.

    One forward AllGather and one gradient ReduceScatter per resident
    layer; regather_backward adds the backward-pass AllGathers of the
    aggressive sharding mode.  Empty without data-parallel sharding.
    """
    if config.data_parallel == 1:
        return []
    gather, scatter = fsdp_layer_ops(workload, config, topology)
    layers_per_stage = workload.arch.num_layers // config.pipeline_parallel
    ops = [gather] * layers_per_stage
    if regather_backward:
        ops += [gather] * layers_per_stage
    ops += [scatter] * layers_per_stage
    return ops


def tp_layer_ops(
    workload: TrainingWorkload, config: ParallelismConfig, topology: ClusterTopology
) -> list[CommOp]:
    """Per-layer tensor-parallel AllReduces for one grad-accum microstep.

    Two in forward (after attention and after the FFN) and two in backward,
    each over the layer's full activation for the rank's microstep batch:
    local_batch * seq * hidden * param_bytes.
    """
    tp = config.tensor_parallel
    if tp == 1:
        return []
    local = local_batch_size(workload, config)
    payload = (
        float(local)
        * workload.seq_len
        * workload.arch.hidden_dim
        * workload.param_bytes
    )
    op = CommOp(
        kind=CollectiveKind.ALL_REDUCE,
        payload_bytes=payload,
        group_size=tp,
        span=tp_span(config, topology),
    )
    return [op] * 4


@dataclass(frozen=True)
class PipelineSchedule:
    """Synchronous pipeline schedule summary for one grad-accum microstep."""

    stages: int
    num_microbatches: int
    bubble_fraction: float
    sends_per_device: int
    send_op: CommOp | None


def pp_schedule(
    workload: TrainingWorkload, config: ParallelismConfig, topology: ClusterTopology
) -> PipelineSchedule:
    """Fill-and-drain pipeline schedule: bubble fraction and P2P traffic.

    With p stages and m microbatches the bubble occupies (p-1)/(m+p-1) of
    the microstep.  A mid-pipeline device forwards activations and returns
    gradients for every microbatch: 2m point-to-point sends of
    microbatch * seq * hidden * param_bytes each.
    """
    pp = config.pipeline_parallel
    if pp == 1:
        return PipelineSchedule(
            stages=1, num_microbatches=1, bubble_fraction=0.0, sends_per_device=0, send_op=None
        )
    m = num_microbatches(workload, config)
    bubble = (pp - 1) / (m + pp - 1)
    payload = (
        float(config.microbatch)
        * workload.seq_len
        * workload.arch.hidden_dim
        * workload.param_bytes
    )
    send = CommOp(
        kind=CollectiveKind.POINT_TO_POINT,
        payload_bytes=payload,
        group_size=2,
        span=pp_span(config, topology),
    )
    return PipelineSchedule(
        stages=pp,
        num_microbatches=m,
        bubble_fraction=bubble,
        sends_per_device=2 * m,
        send_op=send,
    )
