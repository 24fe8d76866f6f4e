"""Hardware presets and link-path selection."""

from __future__ import annotations

import math

import pytest

from shardsim import (
    ClusterTopology,
    GpuSpec,
    GroupSpan,
    cluster_preset,
    gpu_preset,
    link_path,
    node_preset,
)
from shardsim.hardware import HARDWARE_PRESET_NAMES


def test_preset_names_sorted_and_complete():
    assert HARDWARE_PRESET_NAMES == ("a100", "h100", "v100")


def test_h100_preset_values():
    gpu = gpu_preset("h100")
    assert gpu.peak_flops == 990e12
    assert gpu.hbm_bandwidth == 3.35e12
    assert gpu.memory_capacity == 80e9
    assert gpu.power_peak == 700.0
    assert gpu.power_idle == pytest.approx(0.6 * 700.0)


def test_preset_lookup_case_insensitive():
    assert gpu_preset("H100") == gpu_preset("h100")


def test_unknown_preset_raises_keyerror():
    with pytest.raises(KeyError):
        gpu_preset("b200")


def test_node_preset_shape(h100_node):
    assert h100_node.gpus_per_node == 8
    assert h100_node.intranode_bandwidth == 900e9
    assert h100_node.internode_bandwidth == 400e9


def test_cross_node_rank_bandwidth_is_node_pipe_share(h100_node):
    assert h100_node.cross_node_rank_bandwidth == pytest.approx(400e9 / 8)


def test_world_size(four_nodes):
    assert four_nodes.world_size == 32
    assert four_nodes.gpu.name == "h100"


def test_intra_node_link(one_node):
    path = link_path(one_node, group_size=8, span=GroupSpan.INTRA_NODE)
    assert path.bandwidth == 900e9
    assert path.latency == pytest.approx(2.0e-6)


def test_cross_node_link_divides_network_pipe(four_nodes):
    path = link_path(four_nodes, group_size=16, span=GroupSpan.CROSS_NODE)
    assert path.bandwidth == pytest.approx(50e9)
    assert path.latency == pytest.approx(5.0e-6)


def test_singleton_group_sentinel(one_node):
    path = link_path(one_node, group_size=1, span=GroupSpan.INTRA_NODE)
    assert math.isinf(path.bandwidth)
    assert path.latency == 0.0


def test_intra_group_larger_than_node_rejected(one_node):
    with pytest.raises(ValueError):
        link_path(one_node, group_size=16, span=GroupSpan.INTRA_NODE)


def test_group_larger_than_world_rejected(one_node):
    with pytest.raises(ValueError):
        link_path(one_node, group_size=9, span=GroupSpan.CROSS_NODE)


@pytest.mark.parametrize("name", HARDWARE_PRESET_NAMES)
def test_cross_node_share_never_beats_intranode(name):
    node = node_preset(name)
    assert node.cross_node_rank_bandwidth < node.intranode_bandwidth


def test_generations_ordered_by_peak_flops():
    peaks = [gpu_preset(n).peak_flops for n in ("v100", "a100", "h100")]
    assert peaks == sorted(peaks)


def test_gpu_spec_rejects_nonpositive_rates():
    with pytest.raises(ValueError):
        GpuSpec(
            name="bad",
            peak_flops=0.0,
            hbm_bandwidth=1e12,
            memory_capacity=1e9,
            power_peak=100.0,
            power_idle=60.0,
        )


def test_cluster_preset_rejects_zero_nodes():
    with pytest.raises(ValueError):
        cluster_preset("h100", 0)


def test_cluster_topology_is_homogeneous(h100_node):
    topo = ClusterTopology(node=h100_node, num_nodes=3)
    assert topo.world_size == 24
