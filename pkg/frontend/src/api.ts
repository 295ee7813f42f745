/**
 * Typed HTTP client for the lowshot labeling service.
 *
 * Every call maps to exactly one endpoint; responses are returned verbatim so
 * callers display server numbers without re-deriving anything client-side.
 */

export type Progress = {
  labels_used: number;
  budget: number;
  iteration: number;
  state: "awaiting_labels" | "complete";
  g: number | null;
  var: number | null;
};

export type BatchItem = {
  id: string;
  score: number;
  predicted: number;
  labeled: boolean;
  /** Optional client-supplied image URL, passed through the service opaquely. */
  asset_url?: string;
  [extra: string]: unknown;
};

export type Batch = {
  items: BatchItem[];
  progress: Progress;
};

export type IterationEstimate = {
  i: number;
  g: number;
  var: number;
  batch_size: number;
};

export type Estimate = {
  g_combined: number;
  var_combined: number;
  per_iteration: IterationEstimate[];
};

export type PoolItem = {
  id: string;
  score: number;
  predicted: number;
  asset_url?: string;
  [extra: string]: unknown;
};

/** Subset of session options the console exposes; the service fills defaults. */
export type SessionConfig = {
  budget: number;
  alpha?: number;
  seed?: number;
  first_batch?: number;
  batch_growth?: number;
  avg_window?: number;
  restrict_domain?: boolean;
};

export type LabelEntry = { id: string; label: 0 | 1 };

/** Error reported by the service as {error, message}, or a transport failure. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let code = "HttpError";
  let message = `request failed with status ${res.status}`;
  try {
    const body = (await res.json()) as { error?: unknown; message?: unknown };
    if (typeof body.error === "string") code = body.error;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic code and message
  }
  throw new ServiceError(res.status, code, message);
}

export class LabelServiceClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  get baseUrl(): string {
    return this.base;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`);
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, payload: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  async healthz(): Promise<{ status: string }> {
    return this.getJson("/healthz");
  }

  /** Create a session; item labels never leave the client's hands. */
  async createSession(items: PoolItem[], config: SessionConfig): Promise<string> {
    const body = await this.postJson<{ session_id: string }>("/sessions", {
      pool: { items },
      config,
    });
    return body.session_id;
  }

  async fetchBatch(sessionId: string): Promise<Batch> {
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}/batch`);
  }

  async submitLabels(sessionId: string, labels: LabelEntry[]): Promise<Progress> {
    const body = await this.postJson<{ progress: Progress }>(
      `/sessions/${encodeURIComponent(sessionId)}/labels`,
      { labels },
    );
    return body.progress;
  }

  async fetchEstimate(sessionId: string): Promise<Estimate> {
    return this.getJson(`/sessions/${encodeURIComponent(sessionId)}/estimate`);
  }

  /** Raw canonical-JSON session document, byte-exact as served. */
  async exportSession(sessionId: string): Promise<string> {
    const res = await this.fetchFn(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}/export`,
    );
    await raiseForStatus(res);
    return res.text();
  }

  /**
   * Import a previously exported document; returns its session id.
   *
   * The document is posted byte-for-byte as received: exported session state
   * contains integers wider than 2^53 (sampler state), which a JSON.parse /
   * JSON.stringify round trip would silently corrupt. The local parse below
   * is a syntax check only and its result is discarded.
   */
  async importSession(doc: string): Promise<string> {
    try {
      JSON.parse(doc);
    } catch (err) {
      throw new ServiceError(0, "ClientError", `not valid JSON: ${String(err)}`);
    }
    const res = await this.fetchFn(`${this.base}/sessions/import`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: doc,
    });
    await raiseForStatus(res);
    const body = (await res.json()) as { session_id: string };
    return body.session_id;
  }
}
