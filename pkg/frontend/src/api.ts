/** Thin typed client for the trial service; all numbers shown in the
 * UI come from these payloads, never from client-side recomputation. */

import type {
  ApiErrorBody,
  CohortResponse,
  SimulationJob,
  TrialEvent,
  TrialRecord,
} from './types.js';

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

export interface TrialCreateBody {
  config: Record<string, unknown>;
  agents: number;
  n_doses?: number;
  shape?: [number, number];
}

export interface SimulationBody {
  scenario?: string;
  custom?: Record<string, unknown>;
  design?: Record<string, unknown>;
  calibrate?: boolean;
  reps: number;
  seed: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: Parameters<FetchLike>[1] = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const doc = (await resp.json()) as T | ApiErrorBody;
    if (resp.status >= 400) {
      const err = doc as ApiErrorBody;
      throw new ApiRequestError(resp.status, err.code ?? 'error', err.message ?? '', err.field);
    }
    return doc as T;
  }

  createTrial(body: TrialCreateBody): Promise<TrialRecord> {
    return this.request('POST', '/trials', body);
  }

  getTrial(trialId: string): Promise<TrialRecord> {
    return this.request('GET', `/trials/${trialId}`);
  }

  async getEvents(trialId: string): Promise<TrialEvent[]> {
    const doc = await this.request<{ events: TrialEvent[] }>('GET', `/trials/${trialId}/events`);
    return doc.events;
  }

  postCohort(
    trialId: string,
    body: { dose: number | number[]; n: number; t: number; revision: number },
  ): Promise<CohortResponse> {
    return this.request('POST', `/trials/${trialId}/cohorts`, body);
  }

  startSimulation(body: SimulationBody): Promise<SimulationJob> {
    return this.request('POST', '/simulations', body);
  }

  getSimulation(jobId: string): Promise<SimulationJob> {
    return this.request('GET', `/simulations/${jobId}`);
  }

  /** Poll until the job settles; resolves with the terminal job. */
  async waitForSimulation(jobId: string, intervalMs = 250, timeoutMs = 120_000): Promise<SimulationJob> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getSimulation(jobId);
      if (job.status === 'done' || job.status === 'failed') return job;
      if (Date.now() > deadline) throw new Error(`simulation ${jobId} timed out`);
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
