import type {
  BenchmarkInfo,
  ExperimentHandle,
  ExperimentReport,
  RecordPage,
  RequestLogEntry,
  ResolveAction,
  SessionState,
} from './types.js';

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiRequestError';
  }
}

/**
 * Thin client over the promptlens REST API.  Every method issues exactly
 * one HTTP request, so UI actions map one-to-one onto entries in the
 * service request log.
 */
export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    const body = await res.json();
    if (!res.ok) {
      const detail = body?.detail ?? {};
      throw new ApiRequestError(
        res.status,
        detail.code ?? 'unknown',
        detail.message ?? `request failed with ${res.status}`,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request('/health');
  }

  createBenchmark(seed: number, config: Record<string, number>): Promise<BenchmarkInfo> {
    return this.post('/benchmarks', { seed, config });
  }

  listRecords(benchmarkId: string, offset = 0, limit = 100): Promise<RecordPage> {
    return this.request(
      `/benchmarks/${benchmarkId}/records?offset=${offset}&limit=${limit}`,
    );
  }

  createSession(
    benchmarkId: string,
    recordId: string,
    intentionIndex: number,
    mode = 'one_question',
    clarifier = 'oracle',
  ): Promise<SessionState> {
    return this.post('/sessions', {
      benchmark_id: benchmarkId,
      record_id: recordId,
      intention_index: intentionIndex,
      mode,
      clarifier,
    });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${sessionId}`);
  }

  resolve(sessionId: string, action: ResolveAction): Promise<SessionState> {
    return this.post(`/sessions/${sessionId}/resolve`, action);
  }

  paraphrase(sessionId: string): Promise<SessionState> {
    return this.post(`/sessions/${sessionId}/paraphrase`, {});
  }

  createExperiment(
    sessionIds: ReadonlyArray<string>,
    conditions: ReadonlyArray<string>,
    nImages: number,
  ): Promise<ExperimentHandle> {
    return this.post('/experiments', {
      session_ids: sessionIds,
      conditions,
      n_images: nImages,
    });
  }

  getReport(experimentId: string): Promise<ExperimentReport> {
    return this.request(`/experiments/${experimentId}/report`);
  }

  /** Polls the report route until the background run finishes. */
  async waitForReport(
    experimentId: string,
    intervalMs = 250,
    maxAttempts = 400,
  ): Promise<ExperimentReport> {
    for (let attempt = 0; attempt < maxAttempts; attempt++) {
      try {
        return await this.getReport(experimentId);
      } catch (err) {
        if (!(err instanceof ApiRequestError) || err.status !== 409) {
          throw err;
        }
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
    throw new Error(`experiment ${experimentId} did not finish`);
  }

  imageUrl(contentHash: string): string {
    return `${this.base}/images/${contentHash}`;
  }

  debugRequests(): Promise<ReadonlyArray<RequestLogEntry>> {
    return this.request('/debug/requests');
  }
}
