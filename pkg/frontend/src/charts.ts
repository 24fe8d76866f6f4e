/**
 * Chart geometry as pure functions.
 *
 * Each builder turns payload numbers into an SVG view model:
 * pixel coordinates, polyline point strings, tick labels. Rendering
 * is a separate, trivial step in main.ts, so tests can assert chart
 * geometry (for example, that the ideal-scaling line sits above the
 * simulated one) without a browser.
 */

import { formatShort } from "./format.js";

export interface ChartSeries {
  name: string;
  values: number[];
  /** Dashed reference line (for example ideal scaling). */
  reference?: boolean;
}

export interface ChartPoint {
  x: number;
  y: number;
  value: number;
}

export interface SeriesGeometry {
  name: string;
  reference: boolean;
  points: ChartPoint[];
  /** SVG polyline "x,y x,y ..." string. */
  path: string;
}

export interface AxisTick {
  pos: number;
  label: string;
}

export interface LineChartGeometry {
  width: number;
  height: number;
  plot: { left: number; top: number; right: number; bottom: number };
  series: SeriesGeometry[];
  xTicks: AxisTick[];
  yTicks: AxisTick[];
  yMax: number;
}

export interface LineChartOptions {
  width?: number;
  height?: number;
  margin?: { left: number; top: number; right: number; bottom: number };
}

const DEFAULTS = {
  width: 520,
  height: 280,
  margin: { left: 64, top: 16, right: 16, bottom: 36 },
};

/**
 * Lay out one or more series against a shared categorical x axis.
 *
 * Points are spaced evenly by index (sweep ladders are typically
 * geometric, so a linear value axis would crush the small end) and
 * labeled with the payload's own labels. The y axis is linear from
 * zero to the max across all series, so bigger values are always
 * higher on screen (smaller pixel y).
 */
export function buildLineChart(
  labels: string[],
  series: ChartSeries[],
  options: LineChartOptions = {},
): LineChartGeometry {
  const width = options.width ?? DEFAULTS.width;
  const height = options.height ?? DEFAULTS.height;
  const margin = options.margin ?? DEFAULTS.margin;
  const plot = {
    left: margin.left,
    top: margin.top,
    right: width - margin.right,
    bottom: height - margin.bottom,
  };
  const plotWidth = plot.right - plot.left;
  const plotHeight = plot.bottom - plot.top;

  let yMax = 0;
  for (const s of series) {
    for (const v of s.values) {
      if (Number.isFinite(v) && v > yMax) {
        yMax = v;
      }
    }
  }
  if (yMax <= 0) {
    yMax = 1;
  }

  const n = labels.length;
  const xAt = (i: number) => (n <= 1 ? plot.left + plotWidth / 2 : plot.left + (plotWidth * i) / (n - 1));
  const yAt = (v: number) => plot.bottom - (plotHeight * v) / yMax;

  const geom: SeriesGeometry[] = series.map((s) => {
    const points = s.values.map((v, i) => ({ x: xAt(i), y: yAt(v), value: v }));
    return {
      name: s.name,
      reference: s.reference ?? false,
      points,
      path: points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" "),
    };
  });

  const xTicks: AxisTick[] = labels.map((label, i) => ({ pos: xAt(i), label }));
  const yTickCount = 4;
  const yTicks: AxisTick[] = [];
  for (let i = 0; i <= yTickCount; i += 1) {
    const v = (yMax * i) / yTickCount;
    yTicks.push({ pos: yAt(v), label: formatShort(v) });
  }

  return { width, height, plot, series: geom, xTicks, yTicks, yMax };
}

export interface BarSegment {
  key: string;
  label: string;
  value: number;
  /** Pixel offset from the top of the bar area. */
  y: number;
  /** Pixel height, proportional to value / total. */
  height: number;
}

export interface StackedBarGeometry {
  width: number;
  height: number;
  total: number;
  segments: BarSegment[];
}

/**
 * Stack time segments into a single vertical bar.
 *
 * Heights are proportional to each segment's share of the summed
 * total; a zero-valued segment gets exactly zero height.
 */
export function buildStackedBar(
  segments: Array<{ key: string; label: string; value: number }>,
  options: { width?: number; height?: number } = {},
): StackedBarGeometry {
  const width = options.width ?? 120;
  const height = options.height ?? 220;
  const total = segments.reduce((acc, s) => acc + Math.max(s.value, 0), 0);
  let y = 0;
  const laidOut: BarSegment[] = segments.map((s) => {
    const share = total > 0 ? Math.max(s.value, 0) / total : 0;
    const segHeight = share * height;
    const placed = { key: s.key, label: s.label, value: s.value, y, height: segHeight };
    y += segHeight;
    return placed;
  });
  return { width, height, total, segments: laidOut };
}
