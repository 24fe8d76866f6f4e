/**
 * DOM wiring. All payload interpretation lives in the pure modules
 * (panels, charts, csv, validation); this file only moves values
 * between form inputs, the API client, and the document.
 *
 * The service base URL defaults to the page's own origin and can be
 * pointed elsewhere with ?api=http://host:port.
 */

import { ApiClient } from "./api.js";
import type { LineChartGeometry, StackedBarGeometry } from "./charts.js";
import { sweepCsv } from "./csv.js";
import { formatSeconds } from "./format.js";
import {
  buildComparisonTable,
  buildMetricCards,
  buildStepTimeBar,
  buildSweepCharts,
  COMPARISON_COLUMNS,
} from "./panels.js";
import {
  PRESET_SCENARIOS,
  ScenarioStore,
  toSimulateRequest,
  toSweepRequest,
} from "./scenario.js";
import type { ScenarioForm } from "./scenario.js";
import type { SweepAxis, SweepBlock, SweepResponse } from "./types.js";
import { canRunSweep, parseNodeLadder, validateForm } from "./validation.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const baseUrl = new URLSearchParams(window.location.search).get("api") ?? "";
const client = new ApiClient(baseUrl);
const store = new ScenarioStore();

// ── Small DOM helpers ─────────────────────────────────────────────────────

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

function download(filename: string, text: string, type: string): void {
  const blob = new Blob([text], { type });
  const url = URL.createObjectURL(blob);
  const link = el("a", { href: url, download: filename });
  document.body.append(link);
  link.click();
  link.remove();
  URL.revokeObjectURL(url);
}

// ── Form ──────────────────────────────────────────────────────────────────

const FORM_FIELDS: Array<{ name: keyof ScenarioForm; label: string }> = [
  { name: "hardwarePreset", label: "GPU" },
  { name: "numNodes", label: "Nodes" },
  { name: "gpusPerNode", label: "GPUs per node" },
  { name: "modelPreset", label: "Model" },
  { name: "globalBatch", label: "Global batch (sequences)" },
  { name: "seqLen", label: "Sequence length" },
  { name: "dpShard", label: "Data parallel (sharded)" },
  { name: "tp", label: "Tensor parallel" },
  { name: "pp", label: "Pipeline parallel" },
  { name: "gradAccum", label: "Grad accumulation" },
];

const SELECT_OPTIONS: Partial<Record<keyof ScenarioForm, string[]>> = {
  hardwarePreset: ["a100", "h100", "v100"],
  modelPreset: ["1b", "7b", "13b", "70b"],
};

function buildFormFields(container: HTMLElement): void {
  for (const field of FORM_FIELDS) {
    const options = SELECT_OPTIONS[field.name];
    const input = options
      ? el("select", { id: `field-${field.name}` }, options.map((o) => el("option", { value: o }, [o])))
      : el("input", { id: `field-${field.name}`, type: "number", min: "1", step: "1" });
    container.append(
      el("label", { class: "field" }, [
        el("span", { class: "field-label" }, [field.label]),
        input,
        el("span", { class: "field-error", id: `error-${field.name}` }),
      ]),
    );
  }
}

function readForm(): ScenarioForm {
  const value = (name: keyof ScenarioForm) =>
    byId<HTMLInputElement | HTMLSelectElement>(`field-${name}`).value;
  return {
    hardwarePreset: value("hardwarePreset"),
    numNodes: Number(value("numNodes")),
    gpusPerNode: Number(value("gpusPerNode")),
    modelPreset: value("modelPreset"),
    globalBatch: Number(value("globalBatch")),
    seqLen: Number(value("seqLen")),
    dpShard: Number(value("dpShard")),
    tp: Number(value("tp")),
    pp: Number(value("pp")),
    gradAccum: Number(value("gradAccum")),
  };
}

function writeForm(form: ScenarioForm): void {
  for (const field of FORM_FIELDS) {
    byId<HTMLInputElement>(`field-${field.name}`).value = String(form[field.name]);
  }
}

function clearFieldErrors(): void {
  for (const field of FORM_FIELDS) {
    byId(`error-${field.name}`).textContent = "";
  }
}

function showFieldErrors(form: ScenarioForm): boolean {
  clearFieldErrors();
  const errors = validateForm(form);
  for (const err of errors) {
    byId(`error-${err.field}`).textContent = err.message;
  }
  return errors.length === 0;
}

// ── Rendering ─────────────────────────────────────────────────────────────

function renderBanner(target: HTMLElement, messages: string[]): void {
  clear(target);
  if (messages.length === 0) {
    target.hidden = true;
    return;
  }
  target.hidden = false;
  target.append(el("ul", {}, messages.map((m) => el("li", {}, [m]))));
}

function renderBar(target: HTMLElement, bar: StackedBarGeometry, caption: string): void {
  clear(target);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(bar.width));
  svg.setAttribute("height", String(bar.height));
  svg.setAttribute("role", "img");
  for (const seg of bar.segments) {
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", "20");
    rect.setAttribute("width", String(bar.width - 40));
    rect.setAttribute("y", seg.y.toFixed(1));
    rect.setAttribute("height", seg.height.toFixed(1));
    rect.setAttribute("class", `bar-${seg.key}`);
    svg.append(rect);
  }
  const legend = el(
    "ul",
    { class: "bar-legend" },
    bar.segments.map((seg) =>
      el("li", { class: `bar-${seg.key}` }, [`${seg.label}: ${formatSeconds(seg.value)}`]),
    ),
  );
  target.append(svg, legend, el("p", { class: "bar-caption" }, [caption]));
}

function renderChart(target: HTMLElement, title: string, geom: LineChartGeometry): void {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(geom.width));
  svg.setAttribute("height", String(geom.height));
  svg.setAttribute("role", "img");
  for (const tick of geom.yTicks) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(geom.plot.left));
    line.setAttribute("x2", String(geom.plot.right));
    line.setAttribute("y1", tick.pos.toFixed(1));
    line.setAttribute("y2", tick.pos.toFixed(1));
    line.setAttribute("class", "gridline");
    svg.append(line);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(geom.plot.left - 6));
    label.setAttribute("y", tick.pos.toFixed(1));
    label.setAttribute("class", "tick tick-y");
    label.textContent = tick.label;
    svg.append(label);
  }
  for (const tick of geom.xTicks) {
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", tick.pos.toFixed(1));
    label.setAttribute("y", String(geom.plot.bottom + 16));
    label.setAttribute("class", "tick tick-x");
    label.textContent = tick.label;
    svg.append(label);
  }
  for (const series of geom.series) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", series.path);
    line.setAttribute("class", series.reference ? "series series-reference" : "series");
    svg.append(line);
    if (!series.reference) {
      for (const point of series.points) {
        const dot = document.createElementNS(SVG_NS, "circle");
        dot.setAttribute("cx", point.x.toFixed(1));
        dot.setAttribute("cy", point.y.toFixed(1));
        dot.setAttribute("r", "3");
        dot.setAttribute("class", "series-dot");
        svg.append(dot);
      }
    }
  }
  target.append(el("figure", { class: "chart" }, [el("figcaption", {}, [title]), svg]));
}

function renderSimulation(): void {
  const response = store.lastResponse("current");
  const cardsTarget = byId("cards");
  const barTarget = byId("step-bar");
  clear(cardsTarget);
  clear(barTarget);
  if (!response) {
    return;
  }
  for (const card of buildMetricCards(response.simulation)) {
    cardsTarget.append(
      el("div", { class: "card", "data-key": card.key }, [
        el("span", { class: "card-label" }, [card.label]),
        el("span", { class: "card-value" }, [card.text]),
      ]),
    );
  }
  const bar = buildStepTimeBar(response.simulation);
  renderBar(barTarget, bar, `step time ${formatSeconds(response.simulation.breakdown.step_time_s)}`);
}

function renderPins(): void {
  const target = byId("pins");
  clear(target);
  const rows = buildComparisonTable(store.pinned);
  if (rows.length === 0) {
    target.append(el("p", { class: "hint" }, ["Pin a simulated scenario to compare it here."]));
    return;
  }
  const head = el("tr", {}, [
    el("th", {}, ["scenario"]),
    el("th", {}, ["parallelism"]),
    ...COMPARISON_COLUMNS.map((c) => el("th", {}, [c])),
    el("th", {}, [""]),
  ]);
  const body = rows.map((row) => {
    const unpin = el("button", { type: "button", class: "unpin" }, ["unpin"]);
    unpin.addEventListener("click", () => {
      store.unpin(row.key);
      renderPins();
    });
    return el("tr", {}, [
      el("td", {}, [row.title]),
      el("td", {}, [row.parallelism]),
      ...COMPARISON_COLUMNS.map((c) => el("td", {}, [row.cells[c]?.text ?? ""])),
      el("td", {}, [unpin]),
    ]);
  });
  target.append(el("table", { class: "pins-table" }, [head, ...body]));
}

// ── Panel actions ─────────────────────────────────────────────────────────

let lastSimulateRaw: string | null = null;
let lastSweep: { response: SweepResponse; raw: string } | null = null;

async function runSimulate(): Promise<void> {
  const form = readForm();
  if (!showFieldErrors(form)) {
    return;
  }
  const banner = byId("simulate-errors");
  renderBanner(banner, []);
  const result = await client.simulate(toSimulateRequest(form));
  if (!result.ok) {
    if (!result.aborted) {
      renderBanner(banner, result.errors);
    }
    return;
  }
  lastSimulateRaw = result.raw;
  store.recordResponse("current", result.body);
  renderSimulation();
  byId<HTMLButtonElement>("pin-button").disabled = false;
}

function pinCurrent(): void {
  const response = store.lastResponse("current");
  if (!response) {
    return;
  }
  const form = readForm();
  const cfg = response.simulation.config;
  const title = `${form.modelPreset} dp${cfg.dp_shard} tp${cfg.tp} pp${cfg.pp}`;
  const outcome = store.pin(title, form, response);
  renderBanner(byId("simulate-errors"), outcome.ok ? [] : [outcome.reason]);
  renderPins();
}

function sweepBlockFromInputs(): SweepBlock {
  const axis = byId<HTMLSelectElement>("sweep-axis").value as SweepAxis;
  const nodesText = byId<HTMLInputElement>("sweep-nodes").value;
  const localBatch = Number(byId<HTMLInputElement>("sweep-local-batch").value);
  const block: SweepBlock = { axis };
  if (axis === "world" || axis === "batch") {
    block.nodes = parseNodeLadder(nodesText);
  } else {
    block.values = nodesText
      .split(",")
      .map((v) => v.trim())
      .filter((v) => v.length > 0)
      .map((v) => (axis === "seqlen" ? Number(v) : v));
  }
  if (Number.isInteger(localBatch) && localBatch >= 1) {
    block.local_batch = localBatch;
  }
  return block;
}

function refreshSweepButton(): void {
  const axis = byId<HTMLSelectElement>("sweep-axis").value;
  const nodesText = byId<HTMLInputElement>("sweep-nodes").value;
  byId<HTMLButtonElement>("sweep-run").disabled = !canRunSweep(axis, nodesText, nodesText);
}

async function runSweep(): Promise<void> {
  const form = readForm();
  if (!showFieldErrors(form)) {
    return;
  }
  const banner = byId("sweep-errors");
  renderBanner(banner, []);
  const result = await client.sweep(toSweepRequest(form, sweepBlockFromInputs()));
  if (!result.ok) {
    if (!result.aborted) {
      renderBanner(banner, result.errors);
    }
    return;
  }
  lastSweep = { response: result.body, raw: result.raw };
  const target = byId("sweep-charts");
  clear(target);
  renderBanner(byId("sweep-notices"), result.body.sweep.notices);
  for (const chart of buildSweepCharts(result.body.sweep)) {
    renderChart(target, chart.title, chart.geometry);
  }
  byId<HTMLButtonElement>("sweep-csv").disabled = false;
  byId<HTMLButtonElement>("sweep-json").disabled = false;
}

// ── Boot ──────────────────────────────────────────────────────────────────

function boot(): void {
  buildFormFields(byId("form-fields"));

  const presetsTarget = byId("preset-buttons");
  for (const preset of PRESET_SCENARIOS) {
    const button = el("button", { type: "button", class: "preset", title: preset.summary }, [
      preset.title,
    ]);
    button.addEventListener("click", () => {
      writeForm(preset.form);
      clearFieldErrors();
      void runSimulate();
    });
    presetsTarget.append(button);
  }

  byId("simulate-button").addEventListener("click", () => void runSimulate());
  byId("pin-button").addEventListener("click", pinCurrent);
  byId("sweep-run").addEventListener("click", () => void runSweep());
  byId("sweep-axis").addEventListener("change", refreshSweepButton);
  byId("sweep-nodes").addEventListener("input", refreshSweepButton);
  byId("simulate-json").addEventListener("click", () => {
    if (lastSimulateRaw !== null) {
      download("simulate.json", lastSimulateRaw, "application/json");
    }
  });
  byId("sweep-csv").addEventListener("click", () => {
    if (lastSweep !== null) {
      download("sweep.csv", sweepCsv(lastSweep.response.sweep), "text/csv");
    }
  });
  byId("sweep-json").addEventListener("click", () => {
    if (lastSweep !== null) {
      download("sweep.json", lastSweep.raw, "application/json");
    }
  });

  writeForm(PRESET_SCENARIOS[1]?.form ?? PRESET_SCENARIOS[0]!.form);
  renderPins();
  refreshSweepButton();
}

boot();
