"""Shared request execution for the CLI and the HTTP service.

Both front ends funnel through these helpers, so a given configuration
produces the same response envelope (and therefore byte-identical JSON)
no matter which path requested it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .collectives import CollectiveCostParams, MeasuredBandwidthPoint, fit_cost_params
from .config import RunConfig
from .engine import simulate_step
from .hardware import HARDWARE_PRESET_NAMES, node_preset
from .jsonio import (
    arch_dict,
    breakdown_dict,
    config_dict,
    decision_dict,
    envelope,
    knobs_dict,
    metrics_dict,
    node_dict,
    plan_dict,
    sweep_dict,
)
from .metrics import compute_metrics
from .planner import (
    PlanConstraints,
    SweepSeries,
    plan,
    sweep_axis,
    sweep_strong,
    sweep_weak,
)
from .scaling import decide_resharding
from .workload import MODEL_PRESET_NAMES, model_preset

SWEEP_AXES = ("world", "batch", "model", "seqlen", "hw")

# Conservative per-point simulation estimate when a sweep has to re-plan
# each point over the full parallelism grid.
PLANNED_POINT_COST = 100


def run_simulation(rc: RunConfig):
    """Run one simulation; returns (StepBreakdown, MetricsReport)."""
    if rc.parallelism is None:
        raise ValueError("simulate requires a parallelism block")
    breakdown = simulate_step(
        rc.workload, rc.parallelism, rc.topology, rc.cost_params, rc.knobs
    )
    metrics = compute_metrics(breakdown, rc.workload, rc.parallelism, rc.topology)
    return breakdown, metrics


def simulation_envelope_from(rc: RunConfig, breakdown, metrics) -> dict:
    payload = {
        "config": config_dict(rc.parallelism, rc.workload),
        "breakdown": breakdown_dict(breakdown),
        "metrics": metrics_dict(metrics),
    }
    return envelope("simulation", payload)


def simulate_envelope(rc: RunConfig) -> dict:
    """Run one simulation and wrap it in the standard response."""
    breakdown, metrics = run_simulation(rc)
    return simulation_envelope_from(rc, breakdown, metrics)


def run_plan(rc: RunConfig, constraints: PlanConstraints | None = None):
    """Enumerate and rank parallelism layouts; returns a PlanResult."""
    return plan(rc.workload, rc.topology, rc.cost_params, rc.knobs, constraints)


def plan_envelope_from(rc: RunConfig, result) -> dict:
    return envelope("plan", plan_dict(result, rc.workload))


def plan_envelope(rc: RunConfig, constraints: PlanConstraints | None = None) -> dict:
    return plan_envelope_from(rc, run_plan(rc, constraints))


@dataclass(frozen=True)
class SweepRequest:
    """A parsed sweep specification."""

    axis: str
    node_counts: tuple[int, ...] = ()
    values: tuple[object, ...] = ()
    local_batch: int = 2


def parse_sweep_request(raw: object) -> tuple[SweepRequest | None, list[str]]:
    """Validate the sweep block of a request; never raises on user input."""
    violations: list[str] = []
    if not isinstance(raw, dict):
        return None, ["/sweep: must be an object"]
    axis = raw.get("axis")
    if axis not in SWEEP_AXES:
        return None, [f"/sweep/axis: must be one of {list(SWEEP_AXES)}"]
    node_counts: tuple[int, ...] = ()
    values: tuple[object, ...] = ()
    local_batch = raw.get("local_batch", 2)
    if not isinstance(local_batch, int) or local_batch < 1:
        violations.append("/sweep/local_batch: must be an integer >= 1")
    if axis in ("world", "batch"):
        nodes = raw.get("nodes")
        if (
            not isinstance(nodes, list)
            or not nodes
            or not all(isinstance(n, int) and n >= 1 for n in nodes)
        ):
            violations.append("/sweep/nodes: must be a non-empty list of node counts")
        else:
            node_counts = tuple(nodes)
    else:
        raw_values = raw.get("values")
        if not isinstance(raw_values, list) or not raw_values:
            violations.append("/sweep/values: must be a non-empty list")
        elif axis == "seqlen":
            if all(isinstance(v, int) and v >= 1 for v in raw_values):
                values = tuple(raw_values)
            else:
                violations.append("/sweep/values: sequence lengths must be integers >= 1")
        elif axis == "model":
            bad = [v for v in raw_values if v not in MODEL_PRESET_NAMES]
            if bad:
                violations.append(
                    f"/sweep/values: unknown model presets {bad}; "
                    f"choose from {list(MODEL_PRESET_NAMES)}"
                )
            else:
                values = tuple(raw_values)
        else:
            bad = [v for v in raw_values if v not in HARDWARE_PRESET_NAMES]
            if bad:
                violations.append(
                    f"/sweep/values: unknown hardware presets {bad}; "
                    f"choose from {list(HARDWARE_PRESET_NAMES)}"
                )
            else:
                values = tuple(raw_values)
    if violations:
        return None, violations
    return (
        SweepRequest(
            axis=axis, node_counts=node_counts, values=values, local_batch=local_batch
        ),
        [],
    )


def estimated_sweep_cost(rc: RunConfig, request: SweepRequest) -> int:
    """Rough count of simulations the sweep will run (for request caps)."""
    if request.axis == "world":
        return len(request.node_counts)
    if request.axis == "batch":
        return len(request.node_counts) * PLANNED_POINT_COST
    per_point = 1 if rc.parallelism is not None else PLANNED_POINT_COST
    return len(request.values) * per_point


def run_sweep(
    rc: RunConfig,
    request: SweepRequest,
    constraints: PlanConstraints | None = None,
) -> SweepSeries:
    """Execute a parsed sweep request against a parsed run config."""
    arch = rc.workload.arch
    node_spec = rc.topology.node
    if request.axis == "world":
        tp = rc.parallelism.tensor_parallel if rc.parallelism else 1
        pp = rc.parallelism.pipeline_parallel if rc.parallelism else 1
        return sweep_weak(
            arch,
            rc.workload.seq_len,
            request.local_batch,
            node_spec,
            request.node_counts,
            param_bytes=rc.workload.param_bytes,
            tensor_parallel=tp,
            pipeline_parallel=pp,
            cost_params=rc.cost_params,
            knobs=rc.knobs,
        )
    if request.axis == "batch":
        return sweep_strong(
            arch,
            rc.workload.global_batch,
            rc.workload.seq_len,
            node_spec,
            request.node_counts,
            param_bytes=rc.workload.param_bytes,
            cost_params=rc.cost_params,
            knobs=rc.knobs,
            constraints=constraints,
        )
    return sweep_axis(
        request.axis,
        request.values,
        arch=arch,
        global_batch=rc.workload.global_batch,
        seq_len=rc.workload.seq_len,
        node_spec=node_spec,
        num_nodes=rc.topology.num_nodes,
        parallelism=rc.parallelism,
        param_bytes=rc.workload.param_bytes,
        cost_params=rc.cost_params,
        knobs=rc.knobs,
        constraints=constraints,
    )


def sweep_envelope(series: SweepSeries) -> dict:
    return envelope("sweep", sweep_dict(series))


def decide_envelope(rc_from: RunConfig, rc_to: RunConfig) -> dict:
    """Evaluate the resharding decision between two parsed configs."""
    if rc_from.parallelism is None or rc_to.parallelism is None:
        raise ValueError("decide requires parallelism blocks in both configs")
    if rc_from.workload != rc_to.workload:
        return envelope(
            None, None, ["/workload: both configurations must share the same workload"]
        )
    if rc_from.topology != rc_to.topology:
        return envelope(
            None, None, ["/hardware: both configurations must share the same topology"]
        )
    decision = decide_resharding(
        rc_from.workload,
        rc_from.topology,
        rc_from.parallelism,
        rc_to.parallelism,
        rc_from.cost_params,
        rc_from.knobs,
    )
    return envelope("decision", decision_dict(decision))


def presets_envelope() -> dict:
    from .engine import SimulationKnobs

    payload = {
        "hardware": {name: node_dict(node_preset(name)) for name in HARDWARE_PRESET_NAMES},
        "models": {name: arch_dict(model_preset(name)) for name in MODEL_PRESET_NAMES},
        "knobs": knobs_dict(SimulationKnobs()),
        "cost_params": CollectiveCostParams().to_json(),
    }
    return envelope("presets", payload)


def calibrate_envelope(points: Sequence[MeasuredBandwidthPoint]) -> dict:
    params = CollectiveCostParams(fitted=fit_cost_params(points), calibrated=True)
    return envelope("cost_params", params.to_json())


def violations_envelope(violations: Sequence[str]) -> dict:
    return envelope(None, None, violations)
