/**
 * Client-side form validation.
 *
 * Advisory only: the service is the authority and re-validates every
 * request. These checks exist so obvious mistakes (product mismatch,
 * non-divisible batches) are flagged inline at the offending field
 * before a request is sent.
 */

import type { ScenarioForm } from "./scenario.js";
import type { ModelPresetPayload } from "./types.js";

export interface FieldError {
  /** Form field the message belongs under. */
  field: keyof ScenarioForm;
  message: string;
}

/** Model shapes the divisibility checks need; keyed by preset name. */
export type ModelShapes = Record<string, Pick<ModelPresetPayload, "num_layers" | "num_heads" | "max_seq_len">>;

/** Shapes of the shipped presets, for offline validation before /api/presets loads. */
export const DEFAULT_MODEL_SHAPES: ModelShapes = {
  "1b": { num_layers: 22, num_heads: 32, max_seq_len: 8192 },
  "7b": { num_layers: 32, num_heads: 32, max_seq_len: 8192 },
  "13b": { num_layers: 40, num_heads: 40, max_seq_len: 8192 },
  "70b": { num_layers: 80, num_heads: 64, max_seq_len: 8192 },
};

export const GPUS_PER_NODE = 8;

function isPositiveInt(value: number): boolean {
  return Number.isInteger(value) && value > 0;
}

export function validateForm(form: ScenarioForm, shapes: ModelShapes = DEFAULT_MODEL_SHAPES): FieldError[] {
  const errors: FieldError[] = [];
  const positives: Array<[keyof ScenarioForm, number]> = [
    ["numNodes", form.numNodes],
    ["gpusPerNode", form.gpusPerNode],
    ["globalBatch", form.globalBatch],
    ["seqLen", form.seqLen],
    ["dpShard", form.dpShard],
    ["tp", form.tp],
    ["pp", form.pp],
    ["gradAccum", form.gradAccum],
  ];
  for (const [field, value] of positives) {
    if (!isPositiveInt(value)) {
      errors.push({ field, message: "must be a positive integer" });
    }
  }
  if (errors.length > 0) {
    return errors; // the arithmetic below assumes sane integers
  }

  const world = form.numNodes * form.gpusPerNode;
  if (form.dpShard * form.tp * form.pp !== world) {
    errors.push({
      field: "dpShard",
      message: `dp×tp×pp must equal world size (${form.dpShard}×${form.tp}×${form.pp} ≠ ${world})`,
    });
  }
  if (form.globalBatch % (form.dpShard * form.gradAccum) !== 0) {
    errors.push({
      field: "globalBatch",
      message: `must be divisible by dp_shard×grad_accum = ${form.dpShard * form.gradAccum}`,
    });
  }

  const shape = shapes[form.modelPreset];
  if (!shape) {
    errors.push({ field: "modelPreset", message: `unknown model preset "${form.modelPreset}"` });
    return errors;
  }
  if (shape.num_heads % form.tp !== 0) {
    errors.push({ field: "tp", message: `must divide the model's ${shape.num_heads} attention heads` });
  }
  if (shape.num_layers % form.pp !== 0) {
    errors.push({ field: "pp", message: `must divide the model's ${shape.num_layers} layers` });
  }
  if (form.seqLen > shape.max_seq_len) {
    errors.push({ field: "seqLen", message: `exceeds the model's maximum context of ${shape.max_seq_len}` });
  }
  return errors;
}

/** The sweep run button stays disabled until this returns true. */
export function canRunSweep(axis: string, nodesText: string, valuesText: string): boolean {
  if (axis === "world" || axis === "batch") {
    return parseNodeLadder(nodesText).length > 0;
  }
  return valuesText.split(",").some((v) => v.trim().length > 0);
}

/** Parse "1, 2, 4" into node counts, dropping anything non-positive. */
export function parseNodeLadder(text: string): number[] {
  return text
    .split(",")
    .map((part) => Number(part.trim()))
    .filter((n) => Number.isInteger(n) && n > 0);
}
