/**
 * Display formatting for metric values.
 *
 * These functions produce the human-readable text shown on cards and
 * axes. They never feed back into any computation; the raw payload
 * numbers are always kept alongside the formatted strings.
 */

/** 1234567.8 -> "1,234,568". */
export function formatCount(value: number): string {
  if (!Number.isFinite(value)) {
    return "n/a";
  }
  return Math.round(value).toLocaleString("en-US");
}

/** 0.5123 -> "51.2%". */
export function formatPercent(value: number, decimals = 1): string {
  if (!Number.isFinite(value)) {
    return "n/a";
  }
  return `${(value * 100).toFixed(decimals)}%`;
}

/** 42949672960 -> "40.0 GiB". */
export function formatBytes(value: number): string {
  if (!Number.isFinite(value) || value < 0) {
    return "n/a";
  }
  const units = ["B", "KiB", "MiB", "GiB", "TiB"];
  let scaled = value;
  let unit = 0;
  while (scaled >= 1024 && unit < units.length - 1) {
    scaled /= 1024;
    unit += 1;
  }
  const digits = scaled >= 100 || unit === 0 ? 0 : 1;
  return `${scaled.toFixed(digits)} ${units[unit]}`;
}

/** 2.7749 -> "2.775 s"; 0.00123 -> "1.23 ms". */
export function formatSeconds(value: number): string {
  if (!Number.isFinite(value)) {
    return "n/a";
  }
  if (value === 0) {
    return "0 s";
  }
  if (value < 1e-3) {
    return `${(value * 1e6).toPrecision(3)} us`;
  }
  if (value < 1) {
    return `${(value * 1e3).toPrecision(3)} ms`;
  }
  return `${value.toFixed(3)} s`;
}

/** 512.3 -> "512 W". */
export function formatWatts(value: number): string {
  if (!Number.isFinite(value)) {
    return "n/a";
  }
  return `${value.toFixed(0)} W`;
}

/** Short form for chart axes: 3592936 -> "3.6M", 2048 -> "2.0K". */
export function formatShort(value: number): string {
  if (!Number.isFinite(value)) {
    return "n/a";
  }
  const abs = Math.abs(value);
  if (abs >= 1e9) {
    return `${(value / 1e9).toFixed(1)}B`;
  }
  if (abs >= 1e6) {
    return `${(value / 1e6).toFixed(1)}M`;
  }
  if (abs >= 1e3) {
    return `${(value / 1e3).toFixed(1)}K`;
  }
  if (abs >= 10 || value === Math.round(value)) {
    return value.toFixed(0);
  }
  return value.toPrecision(2);
}
