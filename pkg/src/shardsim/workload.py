"""Transformer training workloads: shapes, parameter counts, FLOPs, memory.

All parameter and FLOP counts are exact integers so that sharded totals can
be checked for conservation without floating-point slop.  Attention score and
value FLOPs assume a causal mask, so only the lower triangle of the
seq x seq interaction is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hardware import GpuSpec


@dataclass(frozen=True)
class TransformerArch:
    """Shape of a decoder-only transformer."""

    name: str
    num_layers: int
    hidden_dim: int
    num_heads: int
    ffn_dim: int
    vocab_size: int
    max_seq_len: int = 4096

    def __post_init__(self) -> None:
        for fname in ("num_layers", "hidden_dim", "num_heads", "ffn_dim", "vocab_size", "max_seq_len"):
            if getattr(self, fname) <= 0:
                raise ValueError(f"{fname} must be positive")
        if self.hidden_dim % self.num_heads != 0:
            raise ValueError("hidden_dim must be divisible by num_heads")

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.num_heads


@dataclass(frozen=True)
class TrainingWorkload:
    """A training job: architecture plus batch geometry and dtypes."""

    arch: TransformerArch
    global_batch: int
    seq_len: int
    param_bytes: int = 2
    # Adam in fp32: fp32 master weights + two moments, 12 bytes per param.
    optimizer_bytes_per_param: int = 12

    def __post_init__(self) -> None:
        if self.global_batch <= 0:
            raise ValueError("global_batch must be positive")
        if self.seq_len <= 0:
            raise ValueError("seq_len must be positive")
        if self.seq_len > self.arch.max_seq_len:
            raise ValueError("seq_len exceeds the architecture's max_seq_len")
        if self.param_bytes not in (2, 4):
            raise ValueError("param_bytes must be 2 (half) or 4 (single)")
        if self.optimizer_bytes_per_param <= 0:
            raise ValueError("optimizer_bytes_per_param must be positive")


def _arch(name: str, layers: int, hidden: int, heads: int, ffn: int) -> TransformerArch:
    # Presets allow long-context what-if runs beyond the shapes' native
    # training length; seq_len is still checked against this ceiling.
    return TransformerArch(
        name=name,
        num_layers=layers,
        hidden_dim=hidden,
        num_heads=heads,
        ffn_dim=ffn,
        vocab_size=32000,
        max_seq_len=8192,
    )


MODEL_PRESETS: dict[str, TransformerArch] = {
    "1b": _arch("1b", 22, 2048, 32, 5632),
    "7b": _arch("7b", 32, 4096, 32, 11008),
    "13b": _arch("13b", 40, 5120, 40, 13824),
    "70b": _arch("70b", 80, 8192, 64, 28672),
}

MODEL_PRESET_NAMES = tuple(sorted(MODEL_PRESETS))


def model_preset(name: str) -> TransformerArch:
    try:
        return MODEL_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown model preset {name!r}; choose from {MODEL_PRESET_NAMES}") from None


def layer_param_count(arch: TransformerArch) -> int:
    """Parameters in one transformer layer.

    Attention q,k,v,o projections 4h^2, gated FFN (gate, up, down) 3hf,
    and two RMSNorm weight vectors 2h.
    """
    h = arch.hidden_dim
    f = arch.ffn_dim
    return 4 * h * h + 3 * h * f + 2 * h


def param_count(arch: TransformerArch) -> int:
    """Total parameters with the embedding tied to the LM head."""
    h = arch.hidden_dim
    embed = arch.vocab_size * h
    final_norm = h
    return embed + arch.num_layers * layer_param_count(arch) + final_norm


def layer_forward_flops(arch: TransformerArch, seq_len: int) -> int:
    """Forward FLOPs for one layer on one sequence.

        projections   2s * 4h^2      = 8sh^2
        attention     2 * 2s^2h / 2  = 2s^2h   (causal mask halves the work)
        gated FFN     2s * 3hf       = 6shf

    Matmul of (m x k) @ (k x n) costs 2mkn.
    """
    s = seq_len
    h = arch.hidden_dim
    f = arch.ffn_dim
    return 8 * s * h * h + 2 * s * s * h + 6 * s * h * f


def forward_flops_per_sequence(arch: TransformerArch, seq_len: int) -> int:
    """Forward FLOPs for one sequence through the full network.

    Layers plus the LM head projection 2shV.  Embedding lookup is a copy,
    not a matmul, and is not counted.
    """
    head = 2 * seq_len * arch.hidden_dim * arch.vocab_size
    return arch.num_layers * layer_forward_flops(arch, seq_len) + head


def step_flops(workload: TrainingWorkload, local_batch: int, tensor_parallel: int = 1) -> int:
    """FLOPs one device executes per microstep (forward + backward).

    Backward costs twice the forward.  Tensor parallelism splits every
    matmul's inner or outer dimension, so the per-device count is the
    dense count divided by the group size; divisibility of heads, ffn_dim
    and vocab_size keeps the division exact.
    """
    if local_batch < 0:
        raise ValueError("local_batch must be >= 0")
    tp = tensor_parallel
    if tp < 1:
        raise ValueError("tensor_parallel must be >= 1")
    arch = workload.arch
    if tp > 1:
        if arch.num_heads % tp or arch.ffn_dim % tp or arch.vocab_size % tp:
            raise ValueError("tensor_parallel must divide num_heads, ffn_dim and vocab_size")
    s = workload.seq_len
    h = arch.hidden_dim
    f = arch.ffn_dim
    # h = heads * head_dim and tp | heads, so 8sh^2/tp and 2s^2h/tp are exact.
    per_layer = 8 * s * h * h // tp + 2 * s * s * h // tp + 6 * s * h * (f // tp)
    head = 2 * s * h * (arch.vocab_size // tp)
    fwd = arch.num_layers * per_layer + head
    return 3 * fwd * local_batch


def stage_flops(
    workload: TrainingWorkload,
    local_batch: int,
    tensor_parallel: int,
    pipeline_parallel: int,
    stage_index: int,
) -> int:
    """FLOPs one pipeline-stage device executes per microstep, exactly.

    Stages hold num_layers / pipeline_parallel layers each; the LM head
    runs on the last stage.  Summing over all stages and tensor ranks
    reconstructs the dense count exactly, which is what makes
    cross-factorization conservation checks meaningful.
    """
    arch = workload.arch
    tp = tensor_parallel
    pp = pipeline_parallel
    if not 0 <= stage_index < pp:
        raise ValueError("stage_index out of range")
    if arch.num_layers % pp:
        raise ValueError("pipeline_parallel must divide num_layers")
    if tp > 1 and (arch.num_heads % tp or arch.ffn_dim % tp or arch.vocab_size % tp):
        raise ValueError("tensor_parallel must divide num_heads, ffn_dim and vocab_size")
    s = workload.seq_len
    h = arch.hidden_dim
    per_layer = 8 * s * h * h // tp + 2 * s * s * h // tp + 6 * s * h * (arch.ffn_dim // tp)
    fwd = (arch.num_layers // pp) * per_layer
    if stage_index == pp - 1:
        fwd += 2 * s * h * (arch.vocab_size // tp)
    return 3 * fwd * local_batch


def total_step_flops(workload: TrainingWorkload) -> int:
    """True model FLOPs for a full optimizer step over the global batch."""
    return 3 * forward_flops_per_sequence(workload.arch, workload.seq_len) * workload.global_batch


@dataclass(frozen=True)
class MemoryBreakdown:
    """Per-GPU memory in bytes, and whether it fits."""

    params: float
    grads: float
    optimizer: float
    activations: float
    total: float = field(init=False)
    capacity: float = 0.0
    feasible: bool = field(init=False)

    def __post_init__(self) -> None:
        total = self.params + self.grads + self.optimizer + self.activations
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "feasible", total <= self.capacity)


def memory_per_gpu(
    workload: TrainingWorkload,
    gpu: GpuSpec,
    data_parallel: int,
    tensor_parallel: int = 1,
    pipeline_parallel: int = 1,
    local_batch: int = 1,
) -> MemoryBreakdown:
    """Memory footprint on one GPU under sharded data parallelism.

    The gathered model is resident (parameters are materialized for
    compute and not resharded mid-pass), while gradients and optimizer
    state are sharded across the data-parallel group.  Tensor and
    pipeline parallelism split everything.  Activations are counted for
    the full per-rank microstep batch (a fill-and-drain pipeline holds
    all in-flight microbatches) at the standard half-precision estimate
    of 34 * hidden bytes per token per layer.
    """
    arch = workload.arch
    p = param_count(arch)
    tp = tensor_parallel
    pp = pipeline_parallel
    dp = data_parallel
    if min(tp, pp, dp, local_batch) < 1:
        raise ValueError("parallel degrees and local_batch must be >= 1")
    model_shard = p / (tp * pp)
    params = workload.param_bytes * model_shard
    grads = workload.param_bytes * model_shard / dp
    optimizer = workload.optimizer_bytes_per_param * model_shard / dp
    tokens = local_batch * workload.seq_len
    activations = 34.0 * arch.hidden_dim * tokens * arch.num_layers / (pp * tp)
    return MemoryBreakdown(
        params=params,
        grads=grads,
        optimizer=optimizer,
        activations=activations,
        capacity=gpu.memory_capacity,
    )
