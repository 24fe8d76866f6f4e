"""Alpha-beta cost model for the collectives used in sharded training.

Closed forms (payload S bytes, group size g, per-rank bottleneck bandwidth B
bytes/s, per-hop latency a seconds):

    ring AllGather / ReduceScatter   t = (g-1) * (a + (S/g)/B)
    ring AllReduce                   t = 2*(g-1) * (a + (S/g)/B)
    tree AllReduce                   t = 2*ceil(log2(g))*a + 2*S/B
    PointToPoint                     t = a + S/B

S is always the full gathered/reduced size, not the per-rank shard. The ring
forms are latency-bound at scale ((g-1) hops); the pipelined tree pays
latency per level but its bandwidth term is independent of g.

Bus bandwidth reporting follows the usual microbenchmark conventions:

    AllGather / ReduceScatter        busbw = S*(g-1)/g / t
    AllReduce                        busbw = 2*S*(g-1)/g / t
    PointToPoint                     busbw = S / t

`event_oracle` replays the same schedules step by step (chunk-level for
rings, per-edge fluid transfers for the pipelined tree) and returns the
critical-path completion time; it exists to validate the closed forms and
has no performance ambitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .hardware import ClusterTopology, GroupSpan, link_path


class CollectiveKind(str, Enum):
    ALL_GATHER = "allgather"
    REDUCE_SCATTER = "reducescatter"
    ALL_REDUCE = "allreduce"
    POINT_TO_POINT = "pointtopoint"


class RingOrTree(str, Enum):
    RING = "ring"
    TREE = "tree"


@dataclass(frozen=True)
class CommOp:
    """One collective to be timed.

    payload_bytes is the full gathered/reduced size (see module docstring).
    blocking marks ops the compute stream waits on at issue time; the engine
    may still hide blocking ops behind earlier compute via prefetch.
    """

    kind: CollectiveKind
    payload_bytes: float
    group_size: int
    span: GroupSpan
    blocking: bool = True

    def __post_init__(self) -> None:
        if self.payload_bytes < 0:
            raise ValueError("payload_bytes must be nonnegative")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.kind is CollectiveKind.POINT_TO_POINT and self.group_size != 2:
            raise ValueError("PointToPoint requires group_size == 2")


@dataclass(frozen=True)
class MeasuredBandwidthPoint:
    """One calibration measurement from a collectives microbenchmark."""

    kind: CollectiveKind
    group_size: int
    message_bytes: float
    bus_bandwidth: float  # bytes/s, busbw convention above

    def __post_init__(self) -> None:
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if self.message_bytes <= 0 or self.bus_bandwidth <= 0:
            raise ValueError("message_bytes and bus_bandwidth must be positive")


@dataclass(frozen=True)
class AlphaBeta:
    """Explicit fitted link parameters for one collective kind."""

    alpha: float  # seconds per schedule step
    beta: float  # effective bytes/s

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta <= 0:
            raise ValueError("require alpha >= 0 and beta > 0")


@dataclass
class CollectiveCostParams:
    """Tunable cost-model parameters.

    With no overrides, bandwidth comes from the topology link path scaled by
    `bandwidth_efficiency`, and latency from the link path hop latency. A
    fitted AlphaBeta for a kind replaces both. A measured curve for a kind
    replaces the analytic bandwidth term entirely (latency is considered
    baked into the measurements).

    Defaults ship uncalibrated; fit them from microbenchmarks when accuracy
    matters (`calibrated` records which of the two you are using).
    """

    bandwidth_efficiency: float = 0.8
    allreduce_intra: RingOrTree = RingOrTree.RING
    allreduce_cross: RingOrTree = RingOrTree.TREE
    fitted: dict[CollectiveKind, AlphaBeta] = field(default_factory=dict)
    curves: dict[CollectiveKind, list[MeasuredBandwidthPoint]] = field(default_factory=dict)
    calibrated: bool = False

    def __post_init__(self) -> None:
        if not (0 < self.bandwidth_efficiency <= 1):
            raise ValueError("bandwidth_efficiency must be in (0, 1]")
        for kind, points in self.curves.items():
            seen = set()
            for p in points:
                key = (p.group_size, p.message_bytes)
                if key in seen:
                    raise ValueError(f"duplicate curve point {key} for {kind.value}")
                seen.add(key)

    def to_json(self) -> dict:
        return {
            "bandwidth_efficiency": self.bandwidth_efficiency,
            "allreduce_intra": self.allreduce_intra.value,
            "allreduce_cross": self.allreduce_cross.value,
            "fitted": {
                kind.value: {"alpha": ab.alpha, "beta": ab.beta}
                for kind, ab in sorted(self.fitted.items(), key=lambda kv: kv[0].value)
            },
            "curves": {
                kind.value: [
                    {
                        "group_size": p.group_size,
                        "message_bytes": p.message_bytes,
                        "bus_bandwidth": p.bus_bandwidth,
                    }
                    for p in points
                ]
                for kind, points in sorted(self.curves.items(), key=lambda kv: kv[0].value)
            },
            "calibrated": self.calibrated,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CollectiveCostParams":
        fitted = {
            CollectiveKind(k): AlphaBeta(alpha=v["alpha"], beta=v["beta"])
            for k, v in data.get("fitted", {}).items()
        }
        curves = {
            CollectiveKind(k): [
                MeasuredBandwidthPoint(
                    kind=CollectiveKind(k),
                    group_size=int(p["group_size"]),
                    message_bytes=float(p["message_bytes"]),
                    bus_bandwidth=float(p["bus_bandwidth"]),
                )
                for p in pts
            ]
            for k, pts in data.get("curves", {}).items()
        }
        return cls(
            bandwidth_efficiency=float(data.get("bandwidth_efficiency", 0.8)),
            allreduce_intra=RingOrTree(data.get("allreduce_intra", "ring")),
            allreduce_cross=RingOrTree(data.get("allreduce_cross", "tree")),
            fitted=fitted,
            curves=curves,
            calibrated=bool(data.get("calibrated", False)),
        )


class CalibrationFitError(ValueError):
    """Raised when calibration inputs cannot pin down (alpha, beta)."""


def ring_time(payload_bytes: float, group_size: int, bandwidth: float, latency: float) -> float:
    """Single-pass ring schedule: AllGather or ReduceScatter.

    (g-1) steps, each moving one 1/g chunk per rank.
    """
    if group_size <= 1:
        return 0.0
    return (group_size - 1) * (latency + (payload_bytes / group_size) / bandwidth)


def ring_allreduce_time(
    payload_bytes: float, group_size: int, bandwidth: float, latency: float
) -> float:
    """Two-pass ring AllReduce: reduce-scatter pass then all-gather pass."""
    if group_size <= 1:
        return 0.0
    return 2.0 * (group_size - 1) * (latency + (payload_bytes / group_size) / bandwidth)


def tree_allreduce_time(
    payload_bytes: float, group_size: int, bandwidth: float, latency: float
) -> float:
    """Pipelined binary-tree AllReduce: reduce up, broadcast down.

    Latency is paid per tree level in each direction; the payload streams, so
    the bandwidth term does not grow with the group.
    """
    if group_size <= 1:
        return 0.0
    depth = math.ceil(math.log2(group_size))
    return 2.0 * depth * latency + 2.0 * payload_bytes / bandwidth


def point_to_point_time(payload_bytes: float, bandwidth: float, latency: float) -> float:
    return latency + payload_bytes / bandwidth


def bus_bandwidth(kind: CollectiveKind, payload_bytes: float, group_size: int, time_s: float) -> float:
    """Convert a completion time to the microbenchmark busbw convention."""
    if time_s <= 0:
        raise ValueError("time must be positive")
    g = group_size
    if kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
        return payload_bytes * (g - 1) / g / time_s
    if kind is CollectiveKind.ALL_REDUCE:
        return 2.0 * payload_bytes * (g - 1) / g / time_s
    return payload_bytes / time_s


def _time_from_curve(
    kind: CollectiveKind, payload_bytes: float, group_size: int, points: Sequence[MeasuredBandwidthPoint]
) -> float:
    busbw = interpolate_bus_bandwidth(points, group_size, payload_bytes)
    g = group_size
    if kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
        return payload_bytes * (g - 1) / g / busbw
    if kind is CollectiveKind.ALL_REDUCE:
        return 2.0 * payload_bytes * (g - 1) / g / busbw
    return payload_bytes / busbw


def interpolate_bus_bandwidth(
    points: Sequence[MeasuredBandwidthPoint], group_size: int, message_bytes: float
) -> float:
    """Bilinear interpolation in log(message_bytes) x group_size, clamped.

    Rows are the distinct measured group sizes; within a row interpolation is
    linear in log message size. Queries outside the measured range clamp to
    the nearest edge.
    """
    if not points:
        raise ValueError("empty measurement set")
    rows: dict[int, list[MeasuredBandwidthPoint]] = {}
    for p in points:
        rows.setdefault(p.group_size, []).append(p)

    def row_value(row: list[MeasuredBandwidthPoint], s: float) -> float:
        row = sorted(row, key=lambda p: p.message_bytes)
        if len(row) == 1 or s <= row[0].message_bytes:
            return row[0].bus_bandwidth
        if s >= row[-1].message_bytes:
            return row[-1].bus_bandwidth
        ls = math.log(s)
        for lo, hi in zip(row, row[1:]):
            if lo.message_bytes <= s <= hi.message_bytes:
                l0, l1 = math.log(lo.message_bytes), math.log(hi.message_bytes)
                w = 0.0 if l1 == l0 else (ls - l0) / (l1 - l0)
                return lo.bus_bandwidth + w * (hi.bus_bandwidth - lo.bus_bandwidth)
        raise AssertionError("unreachable")

    sizes = sorted(rows)
    if group_size <= sizes[0]:
        return row_value(rows[sizes[0]], message_bytes)
    if group_size >= sizes[-1]:
        return row_value(rows[sizes[-1]], message_bytes)
    for g0, g1 in zip(sizes, sizes[1:]):
        if g0 <= group_size <= g1:
            v0 = row_value(rows[g0], message_bytes)
            v1 = row_value(rows[g1], message_bytes)
            w = (group_size - g0) / (g1 - g0)
            return v0 + w * (v1 - v0)
    raise AssertionError("unreachable")


def collective_time(
    op: CommOp,
    params: CollectiveCostParams,
    topology: ClusterTopology,
) -> float:
    """Time one collective under the cost model.

    Dispatch: AllGather/ReduceScatter always use the ring form; AllReduce
    uses `params.allreduce_intra` or `params.allreduce_cross` depending on
    span; PointToPoint is a single transfer. Measured curves, then fitted
    (alpha, beta), then topology-derived defaults, in that priority order.
    """
    if op.group_size == 1:
        return 0.0

    curve = params.curves.get(op.kind)
    if curve:
        return _time_from_curve(op.kind, op.payload_bytes, op.group_size, curve)

    fitted = params.fitted.get(op.kind)
    if fitted is not None:
        bandwidth, latency = fitted.beta, fitted.alpha
    else:
        path = link_path(topology, op.group_size, op.span)
        bandwidth = path.bandwidth * params.bandwidth_efficiency
        latency = path.latency

    if op.kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
        return ring_time(op.payload_bytes, op.group_size, bandwidth, latency)
    if op.kind is CollectiveKind.ALL_REDUCE:
        algo = (
            params.allreduce_intra if op.span is GroupSpan.INTRA_NODE else params.allreduce_cross
        )
        if algo is RingOrTree.RING:
            return ring_allreduce_time(op.payload_bytes, op.group_size, bandwidth, latency)
        return tree_allreduce_time(op.payload_bytes, op.group_size, bandwidth, latency)
    return point_to_point_time(op.payload_bytes, bandwidth, latency)


# --------------------------------------------------------------------------
# Event-level replay oracle
# --------------------------------------------------------------------------


def _ring_event_playback(
    payload_bytes: float,
    group_size: int,
    bandwidth: float,
    latency: float,
    reduce_then_gather: bool,
) -> float:
    """Chunk-level ring schedule replay.

    Every rank holds one chunk per ring slot; at step t, rank r forwards the
    chunk for slot (r - t) mod g to rank (r + 1) mod g. Steps are
    synchronous: the step lasts latency + chunk/bandwidth for every rank.
    Completion bookkeeping is checked, not assumed.
    """
    g = group_size
    if g <= 1:
        return 0.0
    chunk = payload_bytes / g
    step_time = latency + chunk / bandwidth
    passes = 2 if reduce_then_gather else 1

    # held[r] = set of chunk slots rank r currently has (gather semantics).
    held = [{r} for r in range(g)]
    clock = [0.0] * g
    steps_per_pass = g - 1
    for pass_idx in range(passes):
        for t in range(steps_per_pass):
            # All transfers in a step run concurrently: each rank sends one
            # chunk and receives one chunk. A transfer starts only once both
            # endpoints finished their previous step, so finishes are computed
            # against a start-of-step snapshot, not mid-step updates.
            start = list(clock)
            for r in range(g):
                slot = (r - t - pass_idx * steps_per_pass) % g
                dst = (r + 1) % g
                held[dst].add(slot)
                finish = max(start[r], start[dst]) + step_time
                clock[r] = max(clock[r], finish)
                clock[dst] = max(clock[dst], finish)
    if not reduce_then_gather:
        full = set(range(g))
        if any(h != full for h in held):
            raise AssertionError("ring playback failed to deliver all chunks")
    return max(clock)


def _tree_event_playback(
    payload_bytes: float, group_size: int, bandwidth: float, latency: float
) -> float:
    """Replay the synchronous recursive-halving tree AllReduce.

    Reduce pass: in each round the active set pairs up (odd rank of each
    pair streams into the even one) and halves; rounds are lock-step, so
    the stream front advances one hop latency per round. The payload is
    pipelined, so it drains through a single link (payload/bandwidth) once
    the front arrives at the root. Broadcast pass retraces the schedule.
    """
    g = group_size
    if g <= 1:
        return 0.0
    active = list(range(g))
    front_clock = 0.0
    merged: set[int] = set()
    while len(active) > 1:
        receivers = active[0::2]
        senders = active[1::2]
        front_clock += latency
        merged.update(senders)
        active = receivers
    if active != [0] or len(merged) != g - 1:
        raise AssertionError("halving schedule failed to reduce to the root")
    stream = payload_bytes / bandwidth
    up_done = front_clock + stream
    # Broadcast down retraces the same rounds; same critical path.
    down_done = front_clock + stream
    return up_done + down_done


def event_oracle(op: CommOp, bandwidth: float, latency: float) -> float:
    """Replay `op`'s schedule as explicit events and return completion time.

    Ring schedules are replayed chunk by chunk; the tree AllReduce is
    replayed as a fluid stream over an explicit depth-ceil(log2 g) tree.
    Intended for validating the closed forms on small groups.
    """
    if op.group_size == 1:
        return 0.0
    if op.kind is CollectiveKind.ALL_GATHER or op.kind is CollectiveKind.REDUCE_SCATTER:
        return _ring_event_playback(op.payload_bytes, op.group_size, bandwidth, latency, False)
    if op.kind is CollectiveKind.ALL_REDUCE:
        return _ring_event_playback(op.payload_bytes, op.group_size, bandwidth, latency, True)
    return point_to_point_time(op.payload_bytes, bandwidth, latency)


def event_oracle_tree_allreduce(payload_bytes: float, group_size: int, bandwidth: float, latency: float) -> float:
    """Tree AllReduce variant of the event replay (see `event_oracle`)."""
    return _tree_event_playback(payload_bytes, group_size, bandwidth, latency)


# --------------------------------------------------------------------------
# Calibration fit
# --------------------------------------------------------------------------


def _schedule_coefficients(kind: CollectiveKind, group_size: int, message_bytes: float) -> tuple[float, float]:
    """(latency steps, wire bytes per bottleneck link) for the default algorithm."""
    g = group_size
    if kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
        return g - 1.0, message_bytes * (g - 1) / g
    if kind is CollectiveKind.ALL_REDUCE:
        # Fits the pipelined tree, the cross-node default.
        return 2.0 * math.ceil(math.log2(g)), 2.0 * message_bytes
    return 1.0, message_bytes


def measured_time(point: MeasuredBandwidthPoint) -> float:
    """Completion time implied by a busbw measurement."""
    g = point.group_size
    if point.kind in (CollectiveKind.ALL_GATHER, CollectiveKind.REDUCE_SCATTER):
        return point.message_bytes * (g - 1) / g / point.bus_bandwidth
    if point.kind is CollectiveKind.ALL_REDUCE:
        return 2.0 * point.message_bytes * (g - 1) / g / point.bus_bandwidth
    return point.message_bytes / point.bus_bandwidth


def fit_cost_params(points: Sequence[MeasuredBandwidthPoint]) -> dict[CollectiveKind, AlphaBeta]:
    """Least-squares (alpha, beta) per collective kind from busbw measurements.

    The model is linear in (alpha, 1/beta):

        t(g, S) = steps(g) * alpha + wire(g, S) / beta

    Args:
        points: measurements; each kind needs >= 2 points with distinct
            message sizes, and enough spread to separate the latency and
            bandwidth terms.

    Raises:
        CalibrationFitError: fewer than 2 usable points for a kind, or a
            degenerate (collinear) design matrix.
    """
    by_kind: dict[CollectiveKind, list[MeasuredBandwidthPoint]] = {}
    for p in points:
        by_kind.setdefault(p.kind, []).append(p)
    if not by_kind:
        raise CalibrationFitError("no measurements given")

    out: dict[CollectiveKind, AlphaBeta] = {}
    for kind, pts in by_kind.items():
        if len({p.message_bytes for p in pts}) < 2:
            raise CalibrationFitError(
                f"{kind.value}: need >= 2 points with distinct message sizes, got {len(pts)}"
            )
        rows = []
        times = []
        for p in pts:
            steps, wire = _schedule_coefficients(kind, p.group_size, p.message_bytes)
            rows.append((steps, wire))
            times.append(measured_time(p))
        design = np.array(rows, dtype=float)
        target = np.array(times, dtype=float)
        # Column scaling keeps the normal equations well conditioned; the
        # raw columns differ by ~12 orders of magnitude.
        scale = design.max(axis=0)
        if (scale == 0).any() or np.linalg.matrix_rank(design / scale) < 2:
            raise CalibrationFitError(
                f"{kind.value}: degenerate calibration inputs; vary group size "
                "and message size so latency and bandwidth separate"
            )
        coef, *_ = np.linalg.lstsq(design / scale, target, rcond=None)
        coef = coef / scale
        alpha, inv_beta = float(coef[0]), float(coef[1])
        if inv_beta <= 0:
            raise CalibrationFitError(f"{kind.value}: fit produced nonpositive bandwidth")
        out[kind] = AlphaBeta(alpha=max(alpha, 0.0), beta=1.0 / inv_beta)
    return out
