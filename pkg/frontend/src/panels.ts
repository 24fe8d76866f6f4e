/**
 * View models for the three panels: metric cards and the step-time
 * bar for a single simulation, the pinned-comparison table, and the
 * sweep charts.
 *
 * Every `value` field here is the untouched number from the API
 * payload; formatting lives in `text` fields next to it. Nothing in
 * this module computes a metric.
 */

import { buildLineChart, buildStackedBar } from "./charts.js";
import type { ChartSeries, LineChartGeometry, StackedBarGeometry } from "./charts.js";
import {
  formatBytes,
  formatCount,
  formatPercent,
  formatSeconds,
  formatWatts,
} from "./format.js";
import type { PinnedScenario } from "./scenario.js";
import type { SimulationPayload, SweepPayload } from "./types.js";

export interface MetricCard {
  key: string;
  label: string;
  /** Raw payload value, exactly as served. */
  value: number | boolean;
  /** Display form of the same value. */
  text: string;
}

/** Cards for a single simulation response. */
export function buildMetricCards(simulation: SimulationPayload): MetricCard[] {
  const m = simulation.metrics;
  const b = simulation.breakdown;
  return [
    { key: "step_time_s", label: "Step time", value: b.step_time_s, text: formatSeconds(b.step_time_s) },
    { key: "wps_global", label: "Words/s (cluster)", value: m.wps_global, text: formatCount(m.wps_global) },
    { key: "wps_per_gpu", label: "Words/s per GPU", value: m.wps_per_gpu, text: formatCount(m.wps_per_gpu) },
    { key: "mfu", label: "MFU", value: m.mfu, text: formatPercent(m.mfu) },
    {
      key: "exposed_comm_fraction",
      label: "Exposed comm",
      value: m.exposed_comm_fraction,
      text: formatPercent(m.exposed_comm_fraction),
    },
    {
      key: "power_per_gpu_w",
      label: "Power per GPU",
      value: m.power_per_gpu_w,
      text: formatWatts(m.power_per_gpu_w),
    },
    {
      key: "tokens_per_watt",
      label: "Tokens per watt",
      value: m.tokens_per_watt,
      text: m.tokens_per_watt.toFixed(2),
    },
    {
      key: "memory_per_gpu_bytes",
      label: "Memory per GPU",
      value: m.memory_per_gpu_bytes,
      text: formatBytes(m.memory_per_gpu_bytes),
    },
    {
      key: "feasible",
      label: "Fits in memory",
      value: b.feasible,
      text: b.feasible ? "yes" : "no",
    },
  ];
}

/** Stacked step-time bar: compute, exposed communication, bubble. */
export function buildStepTimeBar(simulation: SimulationPayload): StackedBarGeometry {
  const b = simulation.breakdown;
  return buildStackedBar([
    { key: "compute", label: "compute", value: b.compute_time_s },
    { key: "exposed", label: "exposed comm", value: b.comm_exposed_s },
    { key: "bubble", label: "pipeline bubble", value: b.bubble_time_s },
  ]);
}

export interface ComparisonCell {
  value: number | boolean | string;
  text: string;
}

export interface ComparisonRow {
  key: string;
  title: string;
  parallelism: string;
  cells: Record<string, ComparisonCell>;
}

export const COMPARISON_COLUMNS = [
  "wps_global",
  "mfu",
  "exposed_comm_fraction",
  "step_time_s",
  "tokens_per_watt",
  "feasible",
] as const;

/** One table row per pinned scenario, best throughput first. */
export function buildComparisonTable(pins: readonly PinnedScenario[]): ComparisonRow[] {
  const rows = pins.map((pin) => {
    const sim = pin.response.simulation;
    const m = sim.metrics;
    const b = sim.breakdown;
    const cfg = sim.config;
    const cells: Record<string, ComparisonCell> = {
      wps_global: { value: m.wps_global, text: formatCount(m.wps_global) },
      mfu: { value: m.mfu, text: formatPercent(m.mfu) },
      exposed_comm_fraction: {
        value: m.exposed_comm_fraction,
        text: formatPercent(m.exposed_comm_fraction),
      },
      step_time_s: { value: b.step_time_s, text: formatSeconds(b.step_time_s) },
      tokens_per_watt: { value: m.tokens_per_watt, text: m.tokens_per_watt.toFixed(2) },
      feasible: { value: b.feasible, text: b.feasible ? "yes" : "no" },
    };
    return {
      key: pin.key,
      title: pin.title,
      parallelism: `dp${cfg.dp_shard} tp${cfg.tp} pp${cfg.pp}`,
      cells,
      wps: m.wps_global,
    };
  });
  rows.sort((a, b) => b.wps - a.wps);
  return rows.map(({ wps, ...row }) => row);
}

export interface SweepChart {
  key: string;
  title: string;
  geometry: LineChartGeometry;
}

/**
 * The four sweep charts. The throughput chart carries the payload's
 * linear-scaling reference as a second, dashed series.
 */
export function buildSweepCharts(sweep: SweepPayload): SweepChart[] {
  const labels = sweep.points.map((p) => p.label);
  const wpsSeries: ChartSeries[] = [
    { name: "simulated", values: sweep.points.map((p) => p.metrics.wps_global) },
  ];
  if (sweep.points.some((p) => p.wps_ideal !== null)) {
    wpsSeries.push({
      name: "ideal scaling",
      values: sweep.points.map((p) => p.wps_ideal ?? NaN),
      reference: true,
    });
  }
  return [
    { key: "wps", title: "Words/s (cluster)", geometry: buildLineChart(labels, wpsSeries) },
    {
      key: "mfu",
      title: "MFU",
      geometry: buildLineChart(labels, [
        { name: "mfu", values: sweep.points.map((p) => p.metrics.mfu) },
      ]),
    },
    {
      key: "exposed",
      title: "Exposed comm fraction",
      geometry: buildLineChart(labels, [
        { name: "exposed", values: sweep.points.map((p) => p.metrics.exposed_comm_fraction) },
      ]),
    },
    {
      key: "tokens_per_watt",
      title: "Tokens per watt",
      geometry: buildLineChart(labels, [
        { name: "tokens/W", values: sweep.points.map((p) => p.metrics.tokens_per_watt) },
      ]),
    },
  ];
}
