"""End-to-end acceptance gate.

One test per top-level claim the package makes, each printing a single
PASS/FAIL line with the measured quantity (run with -s to see them all).
Exact math is checked exactly; scaling behavior is checked as trends with
stated tolerances on the default fixture (H100 preset, the 7B model
preset, compute_efficiency 0.65, prefetch_depth 1, unit batch exponent).
"""

from __future__ import annotations

import json
import random

import pytest
from fastapi.testclient import TestClient

from shardsim import (
    CollectiveKind,
    CommOp,
    GroupSpan,
    ParallelismConfig,
    TrainingWorkload,
    cluster_preset,
    compute_metrics,
    decide_resharding,
    fit_cost_params,
    memory_per_gpu,
    model_preset,
    node_preset,
    param_count,
    plan,
    sharding_cost_factor,
    simulate_step,
    stage_flops,
    sweep_strong,
    sweep_weak,
    total_step_flops,
    validate_config,
)
from shardsim.cli import main
from shardsim.collectives import (
    MeasuredBandwidthPoint,
    event_oracle,
    event_oracle_tree_allreduce,
    ring_time,
    tree_allreduce_time,
)
from shardsim.service import create_app

KIB = 1024.0
MIB = 1024.0**2
GIB = 1024.0**3


def _report(ok: bool, label: str, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {label} ({detail})")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def weak_ladder():
    """Pure sharded-DP 7B ladder, local batch 2, 8 to 2048 GPUs."""
    arch = model_preset("7b")
    node = node_preset("h100")
    series = sweep_weak(arch, 4096, 2, node, tuple(2**i for i in range(9)))
    assert len(series.points) == 9 and not series.notices
    return series


def test_collective_closed_forms_match_event_oracle():
    bandwidth, latency = 900e9, 2e-6
    worst = 0.0
    for g in range(2, 65):
        for payload in (KIB, MIB, GIB):
            for kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
                closed = ring_time(payload, g, bandwidth, latency)
                op = CommOp(kind=kind, payload_bytes=payload, group_size=g, span=GroupSpan.INTRA_NODE)
                replay = event_oracle(op, bandwidth, latency)
                worst = max(worst, abs(closed - replay) / replay)
            closed = tree_allreduce_time(payload, g, bandwidth, latency)
            replay = event_oracle_tree_allreduce(payload, g, bandwidth, latency)
            worst = max(worst, abs(closed - replay) / replay)
    _report(worst < 1e-9, "collective closed forms match event oracle",
            f"max rel err {worst:.2e} over groups 2-64 x 1KiB/1MiB/1GiB")


def test_flop_conservation_across_factorizations():
    mismatches = 0
    checked = 0
    for preset in ("7b", "13b"):
        arch = model_preset(preset)
        workload = TrainingWorkload(arch=arch, global_batch=256, seq_len=4096, param_bytes=2)
        dense = total_step_flops(workload)
        for a in range(9):
            for b in range(9 - a):
                tp, pp = 2**a, 2**b
                dp = 256 // (tp * pp)
                if arch.num_heads % tp or arch.ffn_dim % tp or arch.vocab_size % tp:
                    continue
                if arch.num_layers % pp:
                    continue
                local = workload.global_batch // dp
                cluster = dp * tp * sum(
                    stage_flops(workload, local, tp, pp, i) for i in range(pp)
                )
                checked += 1
                mismatches += cluster != dense
    _report(mismatches == 0 and checked > 20, "step FLOPs conserved across factorizations",
            f"{checked} (tp,pp,dp) splits of 256 GPUs x 7b/13b, {mismatches} mismatches")


def test_param_count_matches_enumeration_and_7b_target():
    worst_gap = 0
    for preset in ("1b", "7b", "13b", "70b"):
        arch = model_preset(preset)
        per_layer = 4 * arch.hidden_dim**2 + 3 * arch.hidden_dim * arch.ffn_dim + 2 * arch.hidden_dim
        enumerated = (
            arch.vocab_size * arch.hidden_dim
            + arch.num_layers * per_layer
            + arch.hidden_dim
        )
        worst_gap = max(worst_gap, abs(param_count(arch) - enumerated))
    rel = abs(param_count(model_preset("7b")) - 6.74e9) / 6.74e9
    _report(worst_gap == 0 and rel < 0.02, "param count matches enumeration, 7B near 6.74e9",
            f"enumeration gap {worst_gap}, 7B off by {rel:.4f}")


def test_sharding_cost_factor_identity_and_substitutions():
    identity_exact = all(sharding_cost_factor(p, p, 1.0, 1.0, 0.0) == 1.0 for p in (1, 2, 4, 8, 64))
    case_a = sharding_cost_factor(1, 2, 1.5, 2.0, 0.0)
    case_b = sharding_cost_factor(1, 2, 2.0, 4.0, 0.3)
    ok = identity_exact and abs(case_a - 4.0 / 3.0) < 1e-12 and abs(case_b - 0.2) < 1e-12
    _report(ok, "cost factor identity and reference substitutions",
            f"c(p,p)=1 exact, {case_a:.12f} vs 4/3, {case_b:.12f} vs 0.2")


def test_weak_scaling_throughput_decline(weak_ladder):
    fracs = [p.metrics.exposed_comm_fraction for p in weak_ladder.points]
    monotone = all(a <= b for a, b in zip(fracs, fracs[1:]))
    wps = {int(p.axis_value): p.metrics.wps_per_gpu for p in weak_ladder.points}
    drop = 1.0 - wps[2048] / wps[128]
    _report(monotone and 0.20 <= drop <= 0.55, "weak scaling declines within band",
            f"exposed fraction monotone={monotone}, per-GPU WPS drop 128->2048 = {drop:.4f}")


def test_communication_bound_crossover_location(weak_ladder):
    crossover = next(
        (int(p.axis_value) for p in weak_ladder.points if p.metrics.exposed_comm_fraction > 0.25),
        None,
    )
    ok = crossover is not None and 64 <= crossover <= 512
    _report(ok, "communication-bound crossover in expected range",
            f"first world size with exposed fraction > 0.25: {crossover}")


def test_model_parallel_helps_at_scale_not_on_one_node():
    arch = model_preset("7b")
    workload = TrainingWorkload(arch=arch, global_batch=512, seq_len=4096, param_bytes=2)
    result = plan(workload, cluster_preset("h100", 32))
    pure = [
        e for e in result.entries
        if e.config.tensor_parallel == 1 and e.config.pipeline_parallel == 1
    ]
    model_parallel = [
        e for e in result.entries
        if e.config.tensor_parallel * e.config.pipeline_parallel in (2, 4)
    ]
    best_mp = max(e.metrics.wps_global for e in model_parallel)
    beats = bool(pure) and best_mp > pure[0].metrics.wps_global

    small = TrainingWorkload(arch=arch, global_batch=16, seq_len=4096, param_bytes=2)
    one_node = plan(small, cluster_preset("h100", 1)).entries[0]
    local_best = one_node.config.tensor_parallel == 1 and one_node.config.pipeline_parallel == 1
    _report(beats and local_best, "model parallelism wins at 256 GPUs, loses on one node",
            f"best tp*pp in {{2,4}} wps {best_mp:.0f} vs pure {pure[0].metrics.wps_global:.0f}; "
            f"1-node top tp={one_node.config.tensor_parallel} pp={one_node.config.pipeline_parallel}")


def test_strong_scaling_mfu_collapse():
    series = sweep_strong(model_preset("7b"), 32, 4096, node_preset("h100"), (2, 4, 8, 16, 32))
    mfus = [p.metrics.mfu for p in series.points]
    strict = all(a > b for a, b in zip(mfus, mfus[1:]))
    ratio = mfus[-1] / mfus[0]
    _report(strict and ratio < 0.6, "strong scaling collapses MFU",
            f"MFU {mfus[0]:.4f} -> {mfus[-1]:.4f} over 2->32 nodes, ratio {ratio:.4f}")


def test_faster_hardware_is_more_communication_bound():
    arch = model_preset("7b")
    workload = TrainingWorkload(arch=arch, global_batch=256, seq_len=4096, param_bytes=2)
    config = ParallelismConfig(data_parallel=128, tensor_parallel=1, pipeline_parallel=1, microbatch=2)
    results = {}
    for name in ("a100", "h100"):
        topology = cluster_preset(name, 16)
        breakdown = simulate_step(workload, config, topology)
        metrics = compute_metrics(breakdown, workload, config, topology)
        results[name] = metrics
    ok = (
        results["h100"].mfu < results["a100"].mfu
        and results["h100"].exposed_comm_fraction > results["a100"].exposed_comm_fraction
    )
    _report(ok, "newer hardware trades MFU for exposed communication",
            f"a100 mfu {results['a100'].mfu:.4f}/frac {results['a100'].exposed_comm_fraction:.4f}, "
            f"h100 mfu {results['h100'].mfu:.4f}/frac {results['h100'].exposed_comm_fraction:.4f}")


def test_longer_context_dilutes_communication():
    arch = model_preset("7b")
    config = ParallelismConfig(data_parallel=128, tensor_parallel=1, pipeline_parallel=1, microbatch=2)
    topology = cluster_preset("h100", 16)
    fracs = []
    for seq_len in (2048, 4096, 8192):
        workload = TrainingWorkload(arch=arch, global_batch=256, seq_len=seq_len, param_bytes=2)
        breakdown = simulate_step(workload, config, topology)
        fracs.append(compute_metrics(breakdown, workload, config, topology).exposed_comm_fraction)
    strict = all(a > b for a, b in zip(fracs, fracs[1:]))
    _report(strict, "longer sequences dilute exposed communication",
            "fractions " + " -> ".join(f"{f:.5f}" for f in fracs))


def test_memory_savings_diminish_with_shard_count():
    arch = model_preset("7b")
    workload = TrainingWorkload(arch=arch, global_batch=256, seq_len=4096, param_bytes=2)
    gpu = node_preset("h100").gpu
    totals = {dp: memory_per_gpu(workload, gpu, dp, local_batch=1).total for dp in
              (1, 2, 4, 8, 16, 32, 64, 128, 256)}
    gaps = [totals[dp] - totals[2 * dp] for dp in (1, 2, 4, 8, 16, 32, 64, 128)]
    strict = all(a > b for a, b in zip(gaps, gaps[1:]))
    opt_ratio = (
        memory_per_gpu(workload, gpu, 8, local_batch=1).optimizer
        / memory_per_gpu(workload, gpu, 1, local_batch=1).optimizer
    )
    _report(strict and opt_ratio == 1.0 / 8.0, "memory savings diminish with shard count",
            f"gap ratios strictly decreasing={strict}, optimizer dp8/dp1 = {opt_ratio}")


def test_power_stays_flat_while_mfu_swings(weak_ladder):
    powers = [p.metrics.power_per_gpu for p in weak_ladder.points]
    mfus = [p.metrics.mfu for p in weak_ladder.points]
    power_var = (max(powers) - min(powers)) / max(powers)
    mfu_var = (max(mfus) - min(mfus)) / max(mfus)
    _report(power_var <= 0.10 and mfu_var > 0.30, "power nearly constant while MFU swings",
            f"power varies {power_var:.4f}, MFU varies {mfu_var:.4f}")


def _calibration_points(alpha: float, beta: float, noise: float, seed: int):
    rng = random.Random(seed)
    points = []
    for kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER, CollectiveKind.ALL_REDUCE):
        for g in (2, 4, 8, 16, 32):
            for size in (64e3, 1e6, 16e6, 256e6):
                if kind is CollectiveKind.ALL_REDUCE:
                    t = tree_allreduce_time(size, g, beta, alpha)
                    busbw = 2.0 * size * (g - 1) / g / t
                else:
                    t = ring_time(size, g, beta, alpha)
                    busbw = size * (g - 1) / g / t
                busbw *= 1.0 + noise * rng.gauss(0.0, 1.0)
                points.append(MeasuredBandwidthPoint(
                    kind=kind, group_size=g, message_bytes=size, bus_bandwidth=busbw))
    return points


def test_calibration_recovers_link_parameters():
    true_alpha, true_beta = 3.0e-6, 240e9

    clean = fit_cost_params(_calibration_points(true_alpha, true_beta, 0.0, 0))
    clean_err = max(
        max(abs(ab.alpha - true_alpha) / true_alpha, abs(ab.beta - true_beta) / true_beta)
        for ab in clean.values()
    )
    noisy = fit_cost_params(_calibration_points(true_alpha, true_beta, 0.002, 20240817))
    noisy_err = max(
        max(abs(ab.alpha - true_alpha) / true_alpha, abs(ab.beta - true_beta) / true_beta)
        for ab in noisy.values()
    )
    _report(clean_err < 1e-9 and noisy_err < 0.05, "calibration recovers alpha/beta",
            f"noiseless err {clean_err:.2e}, 0.2%-noise err {noisy_err:.4f}")


def test_cost_factor_agrees_with_simulated_direction():
    arch = model_preset("7b")
    workload = TrainingWorkload(arch=arch, global_batch=512, seq_len=4096, param_bytes=2)
    cases = []
    for nodes in (8, 16, 32, 64):
        topology = cluster_preset("h100", nodes)
        world = topology.world_size
        base_dp = min(world, 512)
        baseline = ParallelismConfig(
            data_parallel=base_dp,
            tensor_parallel=1,
            pipeline_parallel=1,
            microbatch=512 // base_dp,
            grad_accum=max(1, world // 512),
        )
        assert not validate_config(workload, baseline, topology)
        for tp in (1, 2, 4, 8):
            for pp in (1, 2, 4, 8):
                if world % (tp * pp):
                    continue
                dp = world // (tp * pp)
                if 512 % dp:
                    continue
                local = 512 // dp
                candidate = ParallelismConfig(
                    data_parallel=dp,
                    tensor_parallel=tp,
                    pipeline_parallel=pp,
                    microbatch=local if pp == 1 else max(1, local // pp),
                )
                if candidate == baseline or validate_config(workload, candidate, topology):
                    continue
                cases.append((topology, baseline, candidate))
    sample = random.Random(311).sample(cases, 50)
    agreed = sum(
        decide_resharding(workload, topology, baseline, candidate).agrees
        for topology, baseline, candidate in sample
    )
    _report(agreed >= 45, "cost factor sign matches simulated direction",
            f"{agreed}/50 sampled resharding moves agree (population {len(cases)})")


def test_cli_and_service_emit_identical_bytes(tmp_path, capsys):
    raw = {
        "hardware": {"preset": "h100", "num_nodes": 4},
        "model": {"preset": "7b"},
        "workload": {"global_batch": 256, "seq_len": 4096},
        "parallelism": {"dp_shard": 32},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(raw))
    assert main(["simulate", "--config", str(path)]) == 0
    cli_bytes = capsys.readouterr().out
    http_bytes = TestClient(create_app()).post("/api/simulate", json=raw).text
    _report(cli_bytes == http_bytes, "CLI and HTTP service are byte-identical",
            f"{len(cli_bytes)} bytes each" if cli_bytes == http_bytes else "outputs differ")
