/**
 * Thin client for the shardsim HTTP API.
 *
 * One in-flight request per panel: a resubmit from the same panel aborts
 * the previous request before issuing the new one, so a slow response can
 * never overwrite a newer one. Network failures and HTTP 400s both come
 * back as a normal `ApiResult` with the error list; nothing throws into
 * the UI.
 */

import type {
  DecideResponse,
  Envelope,
  PlanResponse,
  PresetsResponse,
  RunConfigRequest,
  SimulateResponse,
  SweepRequest,
  SweepResponse,
} from "./types.js";

export type ApiResult<T> =
  | { ok: true; body: T; raw: string }
  | { ok: false; errors: string[]; status: number | null; aborted: boolean };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function failure(errors: string[], status: number | null, aborted = false): ApiResult<never> {
  return { ok: false, errors, status, aborted };
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;
  private readonly inflight = new Map<string, AbortController>();

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // Bind so the client works when fetch is the global browser function.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  simulate(config: RunConfigRequest, panel = "simulate"): Promise<ApiResult<SimulateResponse>> {
    return this.post<SimulateResponse>("/api/simulate", config, panel);
  }

  plan(config: RunConfigRequest, panel = "plan"): Promise<ApiResult<PlanResponse>> {
    return this.post<PlanResponse>("/api/plan", config, panel);
  }

  sweep(request: SweepRequest, panel = "sweep"): Promise<ApiResult<SweepResponse>> {
    return this.post<SweepResponse>("/api/sweep", request, panel);
  }

  decide(from: RunConfigRequest, to: RunConfigRequest, panel = "decide"): Promise<ApiResult<DecideResponse>> {
    return this.post<DecideResponse>("/api/decide", { from, to }, panel);
  }

  presets(panel = "presets"): Promise<ApiResult<PresetsResponse>> {
    return this.request<PresetsResponse>("GET", "/api/presets", undefined, panel);
  }

  /** Abort the panel's in-flight request, if any. */
  cancel(panel: string): void {
    this.inflight.get(panel)?.abort();
    this.inflight.delete(panel);
  }

  private post<T extends Envelope>(path: string, body: unknown, panel: string): Promise<ApiResult<T>> {
    return this.request<T>("POST", path, body, panel);
  }

  private async request<T extends Envelope>(
    method: "GET" | "POST",
    path: string,
    body: unknown,
    panel: string,
  ): Promise<ApiResult<T>> {
    this.inflight.get(panel)?.abort();
    const controller = new AbortController();
    this.inflight.set(panel, controller);

    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        signal: controller.signal,
        ...(body === undefined
          ? {}
          : { headers: { "content-type": "application/json" }, body: JSON.stringify(body) }),
      });
    } catch (err) {
      if (controller.signal.aborted) {
        return failure(["request cancelled by a newer submission"], null, true);
      }
      return failure([`service unreachable: ${err instanceof Error ? err.message : String(err)}`], null);
    } finally {
      if (this.inflight.get(panel) === controller) {
        this.inflight.delete(panel);
      }
    }

    const raw = await response.text();
    let parsed: unknown;
    try {
      parsed = JSON.parse(raw);
    } catch {
      return failure([`service returned invalid JSON (HTTP ${response.status})`], response.status);
    }
    const envelope = parsed as T;
    if (!response.ok || (envelope.errors && envelope.errors.length > 0)) {
      const errors = envelope.errors?.length ? envelope.errors : [`HTTP ${response.status}`];
      return failure(errors, response.status);
    }
    return { ok: true, body: envelope, raw };
  }
}
