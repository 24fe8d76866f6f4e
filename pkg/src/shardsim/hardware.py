"""Cluster hardware description: GPU generations, node shapes, link paths.

A cluster is a homogeneous collection of nodes, each holding `gpus_per_node`
identical GPUs on a shared intra-node fabric, with one network pipe per node
to the rest of the cluster. The per-rank share of that pipe is
`internode_bandwidth / gpus_per_node`, which is the bandwidth bottleneck for
any collective whose group spans node boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class GroupSpan(str, Enum):
    """Whether a communication group fits inside one node or crosses nodes."""

    INTRA_NODE = "intra_node"
    CROSS_NODE = "cross_node"


@dataclass(frozen=True)
class GpuSpec:
    """Peak capabilities of one GPU.

    Attributes:
        name: generation label ("h100", ...).
        peak_flops: dense peak throughput at training precision, FLOP/s.
        hbm_bandwidth: device memory bandwidth, bytes/s.
        memory_capacity: device memory size, bytes.
        power_peak: board power at full utilization, watts.
        power_idle: board power floor, watts.
    """

    name: str
    peak_flops: float
    hbm_bandwidth: float
    memory_capacity: float
    power_peak: float
    power_idle: float

    def __post_init__(self) -> None:
        if self.peak_flops <= 0 or self.hbm_bandwidth <= 0:
            raise ValueError("peak_flops and hbm_bandwidth must be positive")
        if self.memory_capacity < 2**30:
            raise ValueError("memory_capacity must be at least 1 GiB")
        if not (0 < self.power_idle < self.power_peak):
            raise ValueError("require 0 < power_idle < power_peak")


@dataclass(frozen=True)
class NodeSpec:
    """One server: identical GPUs on a shared intra-node fabric.

    Attributes:
        gpu: the GPU spec, identical across the node.
        gpus_per_node: device count per node.
        intranode_bandwidth: per-rank link bandwidth inside the node, bytes/s.
        internode_bandwidth: total network bandwidth per node, bytes/s.
        intranode_latency: per-hop latency inside the node, seconds.
        internode_latency: per-hop latency across nodes, seconds.
    """

    gpu: GpuSpec
    gpus_per_node: int
    intranode_bandwidth: float
    internode_bandwidth: float
    intranode_latency: float
    internode_latency: float

    def __post_init__(self) -> None:
        if self.gpus_per_node < 1:
            raise ValueError("gpus_per_node must be >= 1")
        if self.intranode_bandwidth <= 0 or self.internode_bandwidth <= 0:
            raise ValueError("bandwidths must be positive")
        if self.intranode_latency < 0 or self.internode_latency < 0:
            raise ValueError("latencies must be nonnegative")
        # A node's internal fabric must not be slower than its per-rank share
        # of the network pipe, otherwise the span model is meaningless.
        if self.intranode_bandwidth < self.internode_bandwidth / self.gpus_per_node:
            raise ValueError(
                "intranode_bandwidth must be >= internode_bandwidth / gpus_per_node"
            )

    @property
    def cross_node_rank_bandwidth(self) -> float:
        """Per-rank share of the node's network pipe, bytes/s."""
        return self.internode_bandwidth / self.gpus_per_node


@dataclass(frozen=True)
class ClusterTopology:
    """A homogeneous cluster of `num_nodes` nodes."""

    node: NodeSpec
    num_nodes: int

    def __post_init__(self) -> None:
        if self.num_nodes < 1:
            raise ValueError("num_nodes must be >= 1")

    @property
    def world_size(self) -> int:
        return self.num_nodes * self.node.gpus_per_node

    @property
    def gpu(self) -> GpuSpec:
        return self.node.gpu


@dataclass(frozen=True)
class LinkPath:
    """Bottleneck link parameters seen by one rank of a group."""

    bandwidth: float  # bytes/s
    latency: float  # seconds per hop


# Hop latency defaults (seconds). These are calibration knobs; microbenchmark
# fits should replace them for serious use.
_INTRA_LATENCY = 2.0e-6
_INTER_LATENCY = 5.0e-6

_GPU_PRESETS = {
    "v100": GpuSpec(
        name="v100",
        peak_flops=125e12,
        hbm_bandwidth=900e9,
        memory_capacity=32e9,
        power_peak=300.0,
        power_idle=180.0,
    ),
    "a100": GpuSpec(
        name="a100",
        peak_flops=312e12,
        hbm_bandwidth=2e12,
        memory_capacity=80e9,
        power_peak=400.0,
        power_idle=240.0,
    ),
    "h100": GpuSpec(
        name="h100",
        peak_flops=990e12,
        hbm_bandwidth=3.35e12,
        memory_capacity=80e9,
        power_peak=700.0,
        power_idle=420.0,
    ),
}

# (intranode per-rank, internode per-node) bandwidths in bytes/s.
_NODE_LINKS = {
    "v100": (300e9, 100e9),
    "a100": (600e9, 200e9),
    "h100": (900e9, 400e9),
}

HARDWARE_PRESET_NAMES = tuple(sorted(_GPU_PRESETS))


def gpu_preset(name: str) -> GpuSpec:
    """Return the GPU spec for a generation preset.

    Args:
        name: one of "v100", "a100", "h100" (case-insensitive).

    Raises:
        KeyError: unknown preset name.
    """
    key = name.lower()
    if key not in _GPU_PRESETS:
        raise KeyError(f"unknown hardware preset {name!r}; known: {', '.join(HARDWARE_PRESET_NAMES)}")
    return _GPU_PRESETS[key]


def node_preset(name: str) -> NodeSpec:
    """Return the 8-GPU node preset for a GPU generation.

    Args:
        name: one of "v100", "a100", "h100" (case-insensitive).

    Raises:
        KeyError: unknown preset name.
    """
    key = name.lower()
    if key not in _GPU_PRESETS:
        raise KeyError(f"unknown hardware preset {name!r}; known: {', '.join(HARDWARE_PRESET_NAMES)}")
    intra, inter = _NODE_LINKS[key]
    return NodeSpec(
        gpu=_GPU_PRESETS[key],
        gpus_per_node=8,
        intranode_bandwidth=intra,
        internode_bandwidth=inter,
        intranode_latency=_INTRA_LATENCY,
        internode_latency=_INTER_LATENCY,
    )


def cluster_preset(name: str, num_nodes: int) -> ClusterTopology:
    return ClusterTopology(node=node_preset(name), num_nodes=num_nodes)


def link_path(topology: ClusterTopology, group_size: int, span: GroupSpan) -> LinkPath:
    """Bottleneck (bandwidth, latency) for one rank of a communication group.

    Intra-node groups ride the node fabric; any group that spans nodes is
    limited by the per-rank share of the node's network pipe.

    A singleton group performs no communication; callers must not time
    collectives over it. The returned bandwidth is +inf as a sentinel.
    """
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if group_size == 1:
        return LinkPath(bandwidth=math.inf, latency=0.0)
    node = topology.node
    if span is GroupSpan.INTRA_NODE:
        if group_size > node.gpus_per_node:
            raise ValueError(
                f"intra-node group of {group_size} exceeds gpus_per_node={node.gpus_per_node}"
            )
        return LinkPath(bandwidth=node.intranode_bandwidth, latency=node.intranode_latency)
    if group_size > topology.world_size:
        raise ValueError(f"group of {group_size} exceeds world size {topology.world_size}")
    return LinkPath(bandwidth=node.cross_node_rank_bandwidth, latency=node.internode_latency)
