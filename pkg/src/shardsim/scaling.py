"""Sharding cost model: does raising the model-parallel factor pay off?

The cost factor compares a source layout at parallelism factor p (GPUs
per model replica, tp * pp) with a target at p' on the same cluster and
global batch:

    c = ((p'/p) / s_b) * ((p'/p) / s_c - ell)

where s_b scales per-replica computation, s_c scales the communication
plus pipeline-idle burden, and ell credits the share of that burden the
target hides under compute.  c > 1 predicts a throughput improvement.

The scale factors are estimated from two simulations.  With N = total
communication + bubble and Z = exposed communication + bubble:

    s_b = (p'/p) * compute'/compute
    s_c = (p'/p) * N'/N
    ell = max(0, (ovl - ovl') / (1 - ovl')) * (p'/p) / s_c,
          ovl = (N - Z)/N

so (p'/p)/s_b and (p'/p)/s_c are the direct compute and burden ratios,
and in the ell > 0 branch the parenthesized term collapses to Z/Z', the
ratio of time the step actually loses.  Under linear batch scaling the
per-device compute is invariant across layouts at fixed global batch,
making c literally the ratio of lost time and aligning sign(c - 1) with
the simulated throughput direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .collectives import CollectiveCostParams
from .engine import SimulationKnobs, StepBreakdown, simulate_step
from .hardware import ClusterTopology
from .metrics import compute_metrics
from .parallelism import ParallelismConfig
from .workload import TrainingWorkload


@dataclass(frozen=True)
class ShardScaling:
    """Scale factors relating a source layout to a target layout."""

    p: int
    p_prime: int
    s_b: float
    s_c: float
    ell: float
    c: float

    def __post_init__(self) -> None:
        if self.p < 1 or self.p_prime < 1:
            raise ValueError("parallelism factors must be >= 1")
        if self.s_b <= 0.0:
            raise ValueError("s_b must be > 0")
        if self.s_c <= 0.0:
            raise ValueError("s_c must be > 0")
        if self.ell < 0.0:
            raise ValueError("ell must be >= 0")
        ratio = self.p_prime / self.p
        if self.ell > ratio / self.s_c + 1e-12:
            raise ValueError("ell cannot exceed the scaled communication term")


def sharding_cost_factor(p: int, p_prime: int, s_b: float, s_c: float, ell: float) -> float:
    """Evaluate the cost factor c for given scale factors.

    c = ((p'/p)/s_b) * ((p'/p)/s_c - ell); c > 1 means the target layout
    is predicted to improve throughput.
    """
    if p < 1 or p_prime < 1:
        raise ValueError("parallelism factors must be >= 1")
    if s_b <= 0.0 or s_c <= 0.0:
        raise ValueError("scale factors must be > 0")
    ratio = p_prime / p
    comm_term = 0.0 if math.isinf(s_c) else ratio / s_c
    if ell < 0.0 or ell > comm_term + 1e-12:
        raise ValueError("ell must lie in [0, (p'/p)/s_c]")
    return (ratio / s_b) * (comm_term - ell)


def _burden(breakdown: StepBreakdown) -> tuple[float, float]:
    """(total, exposed) communication-plus-bubble burden of a step."""
    total = breakdown.comm_total + breakdown.bubble_time
    exposed = breakdown.comm_exposed + breakdown.bubble_time
    return total, exposed


def scale_factors_from_breakdowns(
    p: int, p_prime: int, source: StepBreakdown, target: StepBreakdown
) -> ShardScaling:
    """Derive (s_b, s_c, ell, c) from two already-simulated steps."""
    ratio = p_prime / p
    s_b = ratio * target.compute_time / source.compute_time

    n_src, z_src = _burden(source)
    n_tgt, z_tgt = _burden(target)
    if n_src == 0.0 and n_tgt == 0.0:
        s_c = ratio
        ell = 0.0
    elif n_src == 0.0:
        s_c = math.inf
        ell = 0.0
    else:
        s_c = ratio * n_tgt / n_src
        overlap_src = (n_src - z_src) / n_src
        overlap_tgt = (n_tgt - z_tgt) / n_tgt if n_tgt > 0.0 else 1.0
        if overlap_src > overlap_tgt:
            ell = (overlap_src - overlap_tgt) / (1.0 - overlap_tgt) * ratio / s_c
        else:
            ell = 0.0

    c = sharding_cost_factor(p, p_prime, s_b, s_c, ell)
    return ShardScaling(p=p, p_prime=p_prime, s_b=s_b, s_c=s_c, ell=ell, c=c)


def estimate_scale_factors(
    workload: TrainingWorkload,
    topology: ClusterTopology,
    config_p: ParallelismConfig,
    config_p_prime: ParallelismConfig,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
) -> ShardScaling:
    """Estimate (s_b, s_c, ell) by simulating both layouts.

    Both configs must target the same topology and the same global batch
    (they do here by construction: the workload carries the batch).
    """
    p = config_p.tensor_parallel * config_p.pipeline_parallel
    p_prime = config_p_prime.tensor_parallel * config_p_prime.pipeline_parallel
    source = simulate_step(workload, config_p, topology, cost_params, knobs)
    target = simulate_step(workload, config_p_prime, topology, cost_params, knobs)
    return scale_factors_from_breakdowns(p, p_prime, source, target)


@dataclass(frozen=True)
class ShardingDecision:
    """Cost-model verdict next to the directly simulated outcome."""

    scaling: ShardScaling
    improves: bool
    simulated_wps_ratio: float
    agrees: bool


def decide_resharding(
    workload: TrainingWorkload,
    topology: ClusterTopology,
    config_p: ParallelismConfig,
    config_p_prime: ParallelismConfig,
    cost_params: CollectiveCostParams | None = None,
    knobs: SimulationKnobs | None = None,
) -> ShardingDecision:
    """Compare the cost-factor prediction with the simulated ratio."""
    p = config_p.tensor_parallel * config_p.pipeline_parallel
    p_prime = config_p_prime.tensor_parallel * config_p_prime.pipeline_parallel
    source = simulate_step(workload, config_p, topology, cost_params, knobs)
    target = simulate_step(workload, config_p_prime, topology, cost_params, knobs)
    scaling = scale_factors_from_breakdowns(p, p_prime, source, target)
    source_metrics = compute_metrics(source, workload, config_p, topology)
    target_metrics = compute_metrics(target, workload, config_p_prime, topology)
    ratio = target_metrics.wps_global / source_metrics.wps_global

    def _sign(x: float) -> int:
        return (x > 0.0) - (x < 0.0)

    improves = scaling.c > 1.0
    agrees = _sign(scaling.c - 1.0) == _sign(ratio - 1.0)
    return ShardingDecision(
        scaling=scaling,
        improves=improves,
        simulated_wps_ratio=ratio,
        agrees=agrees,
    )
