/**
 * Sweep CSV export, byte-identical to the one the service's CLI twin
 * writes for the same payload.
 *
 * The backend renders every float with 6 significant digits ("%.6g")
 * both in JSON and CSV, so rebuilding the CSV from the JSON payload
 * reproduces the exact same text as long as we match that format.
 */

import type { SweepPayload } from "./types.js";

export const SWEEP_CSV_COLUMNS = [
  "axis",
  "axis_value",
  "label",
  "dp_shard",
  "tp",
  "pp",
  "microbatch",
  "grad_accum",
  "wps_global",
  "wps_per_gpu",
  "wps_ideal",
  "mfu",
  "exposed_comm_fraction",
  "power_per_gpu_w",
  "tokens_per_watt",
  "step_time_s",
  "compute_time_s",
  "comm_total_s",
  "comm_exposed_s",
  "bubble_time_s",
  "memory_per_gpu_bytes",
  "feasible",
] as const;

/**
 * Format a number the way the backend does: 6 significant digits,
 * trailing zeros stripped, scientific notation outside [1e-4, 1e6)
 * with a two-digit exponent. Null (the JSON form of non-finite)
 * becomes the empty string.
 */
export function formatG6(value: number | null): string {
  if (value === null || !Number.isFinite(value)) {
    return "";
  }
  if (value === 0) {
    return "0";
  }
  const negative = value < 0;
  // d.dddddE±x with exactly 6 significant digits; rounding carries
  // (9.9999995 -> 1.00000e+1) are already resolved in this string.
  const exp5 = Math.abs(value).toExponential(5);
  const [mantissa, expText] = exp5.split("e");
  const exponent = Number(expText);
  const digits = (mantissa ?? "").replace(".", "");
  let text: string;
  if (exponent >= -4 && exponent < 6) {
    if (exponent >= 0) {
      const intPart = digits.slice(0, exponent + 1);
      const fracPart = digits.slice(exponent + 1).replace(/0+$/, "");
      text = fracPart.length > 0 ? `${intPart}.${fracPart}` : intPart;
    } else {
      const fracPart = ("0".repeat(-exponent - 1) + digits).replace(/0+$/, "");
      text = `0.${fracPart}`;
    }
  } else {
    const trimmed = digits.replace(/0+$/, "");
    const head = trimmed.slice(0, 1) || "0";
    const tail = trimmed.slice(1);
    const sign = exponent < 0 ? "-" : "+";
    const expDigits = String(Math.abs(exponent)).padStart(2, "0");
    text = `${head}${tail.length > 0 ? "." + tail : ""}e${sign}${expDigits}`;
  }
  return negative ? `-${text}` : text;
}

/** Quote a CSV field only when it needs it, like the csv module does. */
function csvField(text: string): string {
  if (/[",\r\n]/.test(text)) {
    return `"${text.replace(/"/g, '""')}"`;
  }
  return text;
}

/** Rebuild the sweep CSV from the JSON payload. */
export function sweepCsv(sweep: SweepPayload): string {
  const lines = [SWEEP_CSV_COLUMNS.join(",")];
  for (const point of sweep.points) {
    const cfg = point.config;
    const m = point.metrics;
    const b = point.breakdown;
    const row = [
      sweep.axis,
      formatG6(point.axis_value),
      point.label,
      String(cfg.dp_shard),
      String(cfg.tp),
      String(cfg.pp),
      String(cfg.microbatch),
      String(cfg.grad_accum),
      formatG6(m.wps_global),
      formatG6(m.wps_per_gpu),
      formatG6(point.wps_ideal),
      formatG6(m.mfu),
      formatG6(m.exposed_comm_fraction),
      formatG6(m.power_per_gpu_w),
      formatG6(m.tokens_per_watt),
      formatG6(b.step_time_s),
      formatG6(b.compute_time_s),
      formatG6(b.comm_total_s),
      formatG6(b.comm_exposed_s),
      formatG6(b.bubble_time_s),
      formatG6(m.memory_per_gpu_bytes),
      String(b.feasible),
    ];
    lines.push(row.map(csvField).join(","));
  }
  return lines.join("\n") + "\n";
}
