// Typed client for the console HTTP API. The console computes nothing
// locally: every number it shows comes from these endpoints.

export interface SceneObjectDoc {
  name: string;
  properties: Record<string, string>;
}

export interface BaseTaskDoc {
  id: string;
  instruction: string;
  scene: { image: string; objects: SceneObjectDoc[] };
  behavior_signature: string;
  success_criterion: string;
  demo_count: number;
}

export interface DeltaDoc {
  factor: string;
  visual?: { description: string };
  instruction?: string;
  behavioral?: { description: string };
}

export interface ConditionDoc {
  id: string;
  base_task: string;
  axis: string;
  delta: DeltaDoc;
  notes: string;
  scene_image: string;
}

export interface CompositionDoc {
  id: string;
  base_task: string;
  parts: { axis: string; delta: DeltaDoc }[];
  effective_instruction?: string;
  notes: string;
  scene_image: string;
}

export interface ManifestDoc {
  name: string;
  base_tasks: BaseTaskDoc[];
  conditions: ConditionDoc[];
  compositions: CompositionDoc[];
}

export interface CampaignSummary {
  id: string;
  models: string[];
  trials_per_condition: number;
  max_steps: number;
  scope: string;
  manifest: { name: string; hash: string };
  total_trials: number;
  expected_total: number;
}

export interface ProgressCell {
  model: string;
  condition: string;
  kind: string;
  done: number;
  required: number;
  successes: number;
  overflow: number;
  attempted: boolean;
}

export interface Progress {
  campaign: string;
  models: string[];
  total_trials: number;
  expected_total: number;
  max_steps: number;
  cells: ProgressCell[];
}

export interface ChartRecord {
  model: string;
  group: string;
  key: string;
  successes: number;
  total: number;
}

export type OutcomeName = "success" | "failure" | "irrecoverable" | "timeout";

export interface TrialBody {
  model: string;
  condition: string;
  outcome: OutcomeName;
  steps?: number;
  note?: string;
  overflow?: boolean;
  idempotency_key?: string;
}

export interface ProposalFields {
  visualChange: string | null;
  languageChange: string | null;
}

export interface ProposalResponse {
  base_task: string;
  axis: string;
  drafts: { condition: ConditionDoc }[];
  proposals: ProposalFields[];
  rejected: string[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

export class ConsoleApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const body = await resp.json().catch(() => null);
    if (!resp.ok) {
      const err = body as { code?: string; message?: string; detail?: unknown } | null;
      throw new ApiError(
        resp.status,
        err?.code ?? "HttpError",
        err?.message ?? `HTTP ${resp.status}`,
        err?.detail ?? null,
      );
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  manifest(draft = false): Promise<ManifestDoc> {
    return this.request(`/api/manifest${draft ? "?draft=true" : ""}`);
  }

  campaigns(): Promise<CampaignSummary[]> {
    return this.request("/api/campaigns");
  }

  progress(campaignId: string): Promise<Progress> {
    return this.request(`/api/campaigns/${encodeURIComponent(campaignId)}/progress`);
  }

  aggregates(campaignId: string, group: string): Promise<ChartRecord[]> {
    return this.request(
      `/api/campaigns/${encodeURIComponent(campaignId)}/aggregates?group=${group}`,
    );
  }

  postTrial(campaignId: string, body: TrialBody): Promise<{ seq: number; duplicate: boolean }> {
    return this.request(`/api/campaigns/${encodeURIComponent(campaignId)}/trials`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  propose(baseTask: string, axis: string, count = 3): Promise<ProposalResponse> {
    return this.request("/api/proposals", {
      method: "POST",
      body: JSON.stringify({ base_task: baseTask, axis, count }),
    });
  }

  acceptCondition(
    condition: ConditionDoc,
    commit = false,
  ): Promise<{ id: string; draft: string; committed: boolean }> {
    return this.request("/api/manifest/conditions", {
      method: "POST",
      body: JSON.stringify({ condition, commit }),
    });
  }

  commitDraft(): Promise<{ name: string; conditions: number }> {
    return this.request("/api/manifest/commit", { method: "POST" });
  }
}

// One environment-provided base URL; empty string means same-origin.
export function apiBaseUrl(): string {
  const fromGlobal = (globalThis as { STARGEN_API_BASE?: string }).STARGEN_API_BASE;
  return fromGlobal ?? "";
}
