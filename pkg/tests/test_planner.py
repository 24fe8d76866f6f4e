"""Configuration search and scaling sweeps."""

from __future__ import annotations

import pytest

from shardsim import (
    ParallelismConfig,
    PlanConstraints,
    TrainingWorkload,
    cluster_preset,
    node_preset,
    plan,
    sweep_axis,
    sweep_strong,
    sweep_weak,
)
from shardsim.planner import SweepPoint, SweepSeries


# --------------------------------------------------------------------------
# Plan search
# --------------------------------------------------------------------------


def test_plan_counters_are_consistent(workload_7b):
    topo = cluster_preset("h100", 4)
    result = plan(workload_7b, topo)
    assert result.enumerated == len(result.entries) + result.infeasible
    assert result.entries  # a 7B model on 4 nodes has feasible layouts


def test_plan_is_deterministic(workload_7b):
    topo = cluster_preset("h100", 4)
    assert plan(workload_7b, topo) == plan(workload_7b, topo)


def test_top_entry_dominates_on_throughput(workload_7b):
    topo = cluster_preset("h100", 4)
    result = plan(workload_7b, topo)
    best = result.best
    assert all(best.metrics.wps_global >= e.metrics.wps_global for e in result.entries)


def test_every_entry_matches_the_world_size(workload_7b):
    topo = cluster_preset("h100", 4)
    for entry in plan(workload_7b, topo).entries:
        assert entry.config.world_size == topo.world_size


def test_single_node_prefers_pure_data_parallelism(arch_7b):
    topo = cluster_preset("h100", 1)
    workload = TrainingWorkload(arch=arch_7b, global_batch=64, seq_len=4096)
    best = plan(workload, topo).best
    assert best.config.tensor_parallel == 1
    assert best.config.pipeline_parallel == 1


def test_energy_objective_ranks_by_tokens_per_watt(workload_7b):
    topo = cluster_preset("h100", 4)
    result = plan(workload_7b, topo, constraints=PlanConstraints(objective="energy"))
    best = result.best
    assert all(
        best.metrics.tokens_per_watt >= e.metrics.tokens_per_watt for e in result.entries
    )


def test_impossible_constraints_yield_empty_plan(workload_7b):
    topo = cluster_preset("h100", 4)
    result = plan(workload_7b, topo, constraints=PlanConstraints(memory_cap=1.0))
    assert result.entries == ()
    assert result.best is None
    assert result.enumerated == result.infeasible


def test_parallelism_bounds_are_respected(workload_7b):
    topo = cluster_preset("h100", 4)
    cons = PlanConstraints(max_tensor_parallel=2, max_pipeline_parallel=1)
    for entry in plan(workload_7b, topo, constraints=cons).entries:
        assert entry.config.tensor_parallel <= 2
        assert entry.config.pipeline_parallel == 1


def test_grad_accum_is_a_power_of_two(workload_7b):
    topo = cluster_preset("h100", 4)
    for entry in plan(workload_7b, topo).entries:
        accum = entry.config.grad_accum
        assert accum & (accum - 1) == 0


def test_constraints_validation():
    with pytest.raises(ValueError):
        PlanConstraints(objective="latency")
    with pytest.raises(ValueError):
        PlanConstraints(max_tensor_parallel=0)


# --------------------------------------------------------------------------
# Weak scaling sweep
# --------------------------------------------------------------------------


def test_weak_sweep_shape(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (1, 2, 4, 8))
    assert series.axis == "world"
    assert [p.axis_value for p in series.points] == [8.0, 16.0, 32.0, 64.0]
    assert [p.label for p in series.points] == ["8 gpus", "16 gpus", "32 gpus", "64 gpus"]
    assert series.notices == ()


def test_weak_sweep_keeps_per_rank_batch_fixed(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (1, 4))
    for point in series.points:
        dp = point.config.data_parallel
        assert point.config.microbatch == 2
        assert dp == point.axis_value  # pure sharded DP


def test_weak_sweep_never_beats_linear_scaling(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (1, 2, 4, 16, 64))
    for point in series.points:
        assert point.metrics.wps_global <= point.wps_ideal * (1 + 1e-12)


def test_weak_sweep_first_point_is_its_own_ideal(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (2, 8))
    first = series.points[0]
    assert first.wps_ideal == pytest.approx(first.metrics.wps_global)


def test_weak_sweep_exposure_grows_with_world(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (1, 4, 16, 64))
    fracs = [p.metrics.exposed_comm_fraction for p in series.points]
    assert all(a <= b for a, b in zip(fracs, fracs[1:]))


def test_weak_sweep_skips_indivisible_worlds(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (1, 2), tensor_parallel=16)
    assert [p.axis_value for p in series.points] == [16.0]
    assert len(series.notices) == 1
    assert "skipped 1 nodes" in series.notices[0]


def test_weak_sweep_with_model_parallel_layout(arch_7b, h100_node):
    series = sweep_weak(arch_7b, 4096, 2, h100_node, (2, 4), tensor_parallel=2)
    for point in series.points:
        assert point.config.tensor_parallel == 2
        assert point.config.data_parallel * 2 == point.axis_value


# --------------------------------------------------------------------------
# Strong scaling sweep
# --------------------------------------------------------------------------


def test_strong_sweep_single_point(arch_7b, h100_node):
    series = sweep_strong(arch_7b, 64, 4096, h100_node, (4,))
    assert series.axis == "batch"
    assert len(series.points) == 1
    assert series.points[0].config.world_size == 32


def test_strong_sweep_replans_each_size(arch_7b, h100_node):
    series = sweep_strong(arch_7b, 64, 4096, h100_node, (2, 4, 8))
    assert len(series.points) == 3
    for point in series.points:
        assert point.config.world_size == int(point.axis_value)


def test_strong_sweep_mfu_decreases(arch_7b, h100_node):
    series = sweep_strong(arch_7b, 32, 4096, h100_node, (2, 8, 32))
    mfus = [p.metrics.mfu for p in series.points]
    assert all(a > b for a, b in zip(mfus, mfus[1:]))


def test_strong_sweep_tokens_per_watt_decreases(arch_7b, h100_node):
    series = sweep_strong(arch_7b, 32, 4096, h100_node, (2, 8, 32))
    tpw = [p.metrics.tokens_per_watt for p in series.points]
    assert all(a > b for a, b in zip(tpw, tpw[1:]))


# --------------------------------------------------------------------------
# Axis sweeps
# --------------------------------------------------------------------------


def test_seqlen_axis_dilutes_exposure(arch_7b, h100_node):
    series = sweep_axis(
        "seqlen",
        [2048, 4096, 8192],
        arch=arch_7b,
        global_batch=256,
        seq_len=4096,
        node_spec=h100_node,
        num_nodes=16,
        parallelism=ParallelismConfig(data_parallel=128, grad_accum=2),
    )
    assert [p.axis_value for p in series.points] == [2048.0, 4096.0, 8192.0]
    assert [p.label for p in series.points] == ["seq 2048", "seq 4096", "seq 8192"]
    fracs = [p.metrics.exposed_comm_fraction for p in series.points]
    assert all(a > b for a, b in zip(fracs, fracs[1:]))


def test_model_axis_orders_by_parameter_count(h100_node, arch_7b):
    series = sweep_axis(
        "model",
        ["7b", "1b", "13b"],
        arch=arch_7b,
        global_batch=256,
        seq_len=4096,
        node_spec=h100_node,
        num_nodes=8,
    )
    values = [p.axis_value for p in series.points]
    assert values == sorted(values)
    assert [p.label for p in series.points] == ["1b", "7b", "13b"]
    comm = [p.breakdown.comm_total for p in series.points]
    assert all(a < b for a, b in zip(comm, comm[1:]))


def test_hardware_axis_orders_by_peak_and_shows_mfu_drop(arch_7b):
    series = sweep_axis(
        "hw",
        ["h100", "a100"],
        arch=arch_7b,
        global_batch=256,
        seq_len=4096,
        node_spec=node_preset("h100"),
        num_nodes=16,
        parallelism=ParallelismConfig(data_parallel=128, grad_accum=2),
    )
    assert [p.label for p in series.points] == ["a100", "h100"]
    a100, h100 = series.points
    assert a100.metrics.mfu > h100.metrics.mfu
    assert a100.metrics.exposed_comm_fraction < h100.metrics.exposed_comm_fraction


def test_axis_sweep_with_fixed_parallelism_simulates_in_place(arch_7b, h100_node):
    config = ParallelismConfig(data_parallel=64, grad_accum=1)
    series = sweep_axis(
        "seqlen",
        [2048, 4096],
        arch=arch_7b,
        global_batch=128,
        seq_len=4096,
        node_spec=h100_node,
        num_nodes=8,
        parallelism=config,
    )
    for point in series.points:
        assert point.config == config


def test_unknown_axis_rejected(arch_7b, h100_node):
    with pytest.raises(ValueError):
        sweep_axis(
            "dura",
            [1],
            arch=arch_7b,
            global_batch=64,
            seq_len=4096,
            node_spec=h100_node,
            num_nodes=1,
        )


def test_sweep_series_requires_increasing_axis(workload_7b):
    with pytest.raises(ValueError):
        SweepSeries(axis="world", points=(_dummy_point(2.0), _dummy_point(1.0)))


def _dummy_point(value: float) -> SweepPoint:
    topo = cluster_preset("h100", 1)
    arch = __import__("shardsim").model_preset("7b")
    workload = TrainingWorkload(arch=arch, global_batch=8, seq_len=4096)
    config = ParallelismConfig(data_parallel=8)
    from shardsim import compute_metrics, simulate_step

    breakdown = simulate_step(workload, config, topo)
    metrics = compute_metrics(breakdown, workload, config, topo)
    return SweepPoint(
        axis_value=value, label=str(value), config=config, breakdown=breakdown, metrics=metrics
    )
