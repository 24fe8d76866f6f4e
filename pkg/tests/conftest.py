"""Shared fixtures: a reference cluster, workload, and default knobs."""

from __future__ import annotations

import pytest

from shardsim import (
    ClusterTopology,
    CollectiveCostParams,
    SimulationKnobs,
    TrainingWorkload,
    cluster_preset,
    model_preset,
    node_preset,
)


@pytest.fixture(scope="session")
def h100_node():
    return node_preset("h100")


@pytest.fixture(scope="session")
def one_node(h100_node) -> ClusterTopology:
    return ClusterTopology(node=h100_node, num_nodes=1)


@pytest.fixture(scope="session")
def four_nodes(h100_node) -> ClusterTopology:
    return ClusterTopology(node=h100_node, num_nodes=4)


@pytest.fixture(scope="session")
def arch_7b():
    return model_preset("7b")


@pytest.fixture()
def workload_7b(arch_7b) -> TrainingWorkload:
    return TrainingWorkload(arch=arch_7b, global_batch=256, seq_len=4096, param_bytes=2)


@pytest.fixture(scope="session")
def default_params() -> CollectiveCostParams:
    return CollectiveCostParams()


@pytest.fixture(scope="session")
def default_knobs() -> SimulationKnobs:
    return SimulationKnobs()


def cluster(name: str, num_nodes: int) -> ClusterTopology:
    return cluster_preset(name, num_nodes)
