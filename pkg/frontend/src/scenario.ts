/**
 * Scenario state: the config form, preset what-if scenarios, and the
 * pinned-comparison list.
 *
 * Pinning keeps at most MAX_PINNED scenarios side by side; each pin
 * stores the exact response payload it was simulated with, so the
 * comparison table always shows server numbers, never recomputations.
 */

import type { RunConfigRequest, SimulateResponse, SweepBlock, SweepRequest } from "./types.js";
import { GPUS_PER_NODE } from "./validation.js";

export const MAX_PINNED = 8;

/** Flat form model mirrored by the input elements. */
export interface ScenarioForm {
  hardwarePreset: string;
  numNodes: number;
  /** 1 uses a single-GPU custom node instead of the 8-GPU preset node. */
  gpusPerNode: number;
  modelPreset: string;
  globalBatch: number;
  seqLen: number;
  dpShard: number;
  tp: number;
  pp: number;
  gradAccum: number;
}

export interface PresetScenario {
  key: string;
  title: string;
  summary: string;
  form: ScenarioForm;
}

/**
 * Built-in what-if starting points. The middle two target the regimes
 * where the interesting decisions live: communication-bound pure data
 * parallelism, and the scale where model parallelism starts to win.
 */
export const PRESET_SCENARIOS: PresetScenario[] = [
  {
    key: "single-gpu",
    title: "Single GPU",
    summary: "One H100, 1B model. No communication at all; the exposed bar is zero.",
    form: {
      hardwarePreset: "h100",
      numNodes: 1,
      gpusPerNode: 1,
      modelPreset: "1b",
      globalBatch: 4,
      seqLen: 2048,
      dpShard: 1,
      tp: 1,
      pp: 1,
      gradAccum: 1,
    },
  },
  {
    key: "dp-4nodes",
    title: "Sharded DP, 4 nodes",
    summary: "7B across 32 GPUs, pure sharded data parallelism with gradient accumulation.",
    form: {
      hardwarePreset: "h100",
      numNodes: 4,
      gpusPerNode: GPUS_PER_NODE,
      modelPreset: "7b",
      globalBatch: 256,
      seqLen: 4096,
      dpShard: 32,
      tp: 1,
      pp: 1,
      gradAccum: 4,
    },
  },
  {
    key: "mp-32nodes",
    title: "Model parallel, 32 nodes",
    summary: "7B on 256 GPUs at global batch 512; tensor parallelism beats pure sharded DP here.",
    form: {
      hardwarePreset: "h100",
      numNodes: 32,
      gpusPerNode: GPUS_PER_NODE,
      modelPreset: "7b",
      globalBatch: 512,
      seqLen: 4096,
      dpShard: 128,
      tp: 2,
      pp: 1,
      gradAccum: 1,
    },
  },
];

/** A custom one-GPU-per-node H100-class box for the single-GPU scenario. */
const SINGLE_GPU_NODE = {
  gpu: {
    name: "h100",
    peak_flops: 990e12,
    hbm_bandwidth: 3.35e12,
    memory_capacity: 80e9,
    power_peak: 700,
    power_idle: 420,
  },
  gpus_per_node: 1,
  intranode_bandwidth: 900e9,
  internode_bandwidth: 400e9,
  intranode_latency: 2e-6,
  internode_latency: 5e-6,
};

/** Serialize the form into the exact POST /api/simulate body. */
export function toSimulateRequest(form: ScenarioForm): RunConfigRequest {
  const hardware =
    form.gpusPerNode === GPUS_PER_NODE
      ? { preset: form.hardwarePreset, num_nodes: form.numNodes }
      : { num_nodes: form.numNodes, ...SINGLE_GPU_NODE };
  return {
    hardware,
    model: { preset: form.modelPreset },
    workload: { global_batch: form.globalBatch, seq_len: form.seqLen },
    parallelism: {
      dp_shard: form.dpShard,
      tp: form.tp,
      pp: form.pp,
      grad_accum: form.gradAccum,
    },
  };
}

/**
 * Serialize the sweep-explorer state: the same config blocks as a
 * simulate request, with the sweep block alongside them.
 */
export function toSweepRequest(form: ScenarioForm, sweep: SweepBlock): SweepRequest {
  return { ...toSimulateRequest(form), sweep };
}

export interface PinnedScenario {
  key: string;
  title: string;
  form: ScenarioForm;
  response: SimulateResponse;
}

export type PinOutcome = { ok: true } | { ok: false; reason: string };

/** Bounded pin list plus last responses keyed by scenario. */
export class ScenarioStore {
  private pins: PinnedScenario[] = [];
  private readonly responses = new Map<string, SimulateResponse>();

  get pinned(): readonly PinnedScenario[] {
    return this.pins;
  }

  recordResponse(key: string, response: SimulateResponse): void {
    this.responses.set(key, response);
  }

  lastResponse(key: string): SimulateResponse | undefined {
    return this.responses.get(key);
  }

  pin(title: string, form: ScenarioForm, response: SimulateResponse): PinOutcome {
    if (this.pins.length >= MAX_PINNED) {
      return { ok: false, reason: `at most ${MAX_PINNED} pinned scenarios; unpin one first` };
    }
    const key = `pin-${Date.now()}-${this.pins.length}`;
    this.pins = [...this.pins, { key, title, form: { ...form }, response }];
    return { ok: true };
  }

  unpin(key: string): void {
    this.pins = this.pins.filter((p) => p.key !== key);
  }
}
