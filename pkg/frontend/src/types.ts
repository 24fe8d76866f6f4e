/**
 * Wire types for the shardsim HTTP API.
 *
 * These mirror the service's JSON payloads field for field. The UI never
 * recomputes any of these numbers; it only formats and plots them.
 */

// ── Request side ──────────────────────────────────────────────────────────

export interface HardwareBlock {
  preset?: string;
  num_nodes: number;
  gpu?: GpuBlock;
  gpus_per_node?: number;
  intranode_bandwidth?: number;
  internode_bandwidth?: number;
  intranode_latency?: number;
  internode_latency?: number;
}

export interface GpuBlock {
  name: string;
  peak_flops: number;
  hbm_bandwidth: number;
  memory_capacity: number;
  power_peak: number;
  power_idle: number;
}

export interface ModelBlock {
  preset?: string;
  num_layers?: number;
  hidden_dim?: number;
  num_heads?: number;
  ffn_dim?: number;
  vocab_size?: number;
  max_seq_len?: number;
}

export interface WorkloadBlock {
  global_batch: number;
  seq_len: number;
  param_bytes?: number;
}

export interface ParallelismBlock {
  dp_shard: number;
  tp?: number;
  pp?: number;
  grad_accum?: number;
  microbatches?: number;
}

export interface KnobsBlock {
  compute_efficiency?: number;
  prefetch_depth?: number;
  tp_overlap?: number;
  batch_scaling_exponent?: number;
  regather_backward?: boolean;
}

/** Body of POST /api/simulate and the config half of /api/sweep. */
export interface RunConfigRequest {
  hardware: HardwareBlock;
  model: ModelBlock;
  workload: WorkloadBlock;
  parallelism?: ParallelismBlock;
  knobs?: KnobsBlock;
}

export type SweepAxis = "world" | "batch" | "model" | "seqlen" | "hw";

export interface SweepBlock {
  axis: SweepAxis;
  nodes?: number[];
  values?: Array<number | string>;
  local_batch?: number;
}

export interface SweepRequest extends RunConfigRequest {
  sweep: SweepBlock;
}

// ── Response side ─────────────────────────────────────────────────────────

/** Every response carries the engine version and an error list. */
export interface Envelope {
  engine_version: string;
  errors: string[];
}

export interface ConfigPayload {
  dp_shard: number;
  tp: number;
  pp: number;
  microbatch: number;
  grad_accum: number;
  parallelism_factor: number;
  world_size: number;
  /** Present when the payload was built next to a workload. */
  local_batch?: number;
  microbatches?: number;
}

export interface PhasePayload {
  phase: string;
  compute_s: number;
  comm_s: number;
  exposed_s: number;
}

export interface MemoryPayload {
  params_bytes: number;
  grads_bytes: number;
  optimizer_bytes: number;
  activations_bytes: number;
  total_bytes: number;
  capacity_bytes: number;
  feasible: boolean;
}

export interface BreakdownPayload {
  compute_time_s: number;
  comm_total_s: number;
  comm_exposed_s: number;
  bubble_time_s: number;
  step_time_s: number;
  per_phase: PhasePayload[];
  memory: MemoryPayload;
  feasible: boolean;
}

export interface MetricsPayload {
  wps_global: number;
  wps_per_gpu: number;
  mfu: number;
  observed_flops_per_gpu: number;
  power_per_gpu_w: number;
  tokens_per_watt: number;
  memory_per_gpu_bytes: number;
  exposed_comm_fraction: number;
}

export interface SimulationPayload {
  config: ConfigPayload;
  breakdown: BreakdownPayload;
  metrics: MetricsPayload;
}

export interface SimulateResponse extends Envelope {
  simulation: SimulationPayload;
}

export interface PlanEntryPayload {
  rank: number;
  config: ConfigPayload;
  breakdown: BreakdownPayload;
  metrics: MetricsPayload;
}

export interface PlanPayload {
  objective: string;
  world_size: number;
  enumerated: number;
  infeasible: number;
  entries: PlanEntryPayload[];
}

export interface PlanResponse extends Envelope {
  plan: PlanPayload;
}

export interface SweepPointPayload {
  axis_value: number;
  label: string;
  wps_ideal: number | null;
  config: ConfigPayload;
  breakdown: BreakdownPayload;
  metrics: MetricsPayload;
}

export interface SweepPayload {
  axis: SweepAxis;
  notices: string[];
  points: SweepPointPayload[];
}

export interface SweepResponse extends Envelope {
  sweep: SweepPayload;
}

export interface DecisionPayload {
  p: number;
  p_prime: number;
  s_b: number;
  s_c: number | null;
  ell: number;
  c: number | null;
  improves: boolean;
  simulated_wps_ratio: number;
  agrees: boolean;
}

export interface DecideResponse extends Envelope {
  decision: DecisionPayload;
}

export interface PresetsPayload {
  hardware: Record<string, HardwareNodePayload>;
  models: Record<string, ModelPresetPayload>;
  knobs: Required<KnobsBlock>;
  cost_params: unknown;
}

export interface HardwareNodePayload {
  gpu: GpuBlock;
  gpus_per_node: number;
  intranode_bandwidth_bytes_per_s: number;
  internode_bandwidth_bytes_per_s: number;
  intranode_latency_s: number;
  internode_latency_s: number;
}

export interface ModelPresetPayload {
  name: string;
  num_layers: number;
  hidden_dim: number;
  num_heads: number;
  ffn_dim: number;
  vocab_size: number;
  max_seq_len: number;
  param_count: number;
}

export interface PresetsResponse extends Envelope {
  presets: PresetsPayload;
}

export interface ErrorResponse extends Envelope {
  // errors is non-empty; no result key is present.
}
