/** Typed client for the recommendation service HTTP API. */

export interface RecommendationItem {
  tactics: string[];
  score: number;
}

export interface RecommendResponse {
  recommendations: RecommendationItem[];
  model_digest: string;
  warnings: string[];
}

export interface HealthResponse {
  status: string;
  model_digest: string;
  vocab_size: number;
  config: Record<string, unknown>;
}

export interface VocabResponse {
  tokens: string[];
}

/** A failed API call: HTTP errors carry the server's error code, network
 * failures use the synthetic code "network". */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number | null;

  constructor(code: string, message: string, status: number | null = null) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async recommend(
    tactics: readonly string[],
    n: number,
    k: number,
    signal?: AbortSignal,
  ): Promise<RecommendResponse> {
    const body = JSON.stringify({ tactics: [...tactics], n, k });
    const resp = await this.request(`${this.base}/api/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
      signal,
    });
    return (await this.parse(resp)) as unknown as RecommendResponse;
  }

  async vocab(signal?: AbortSignal): Promise<VocabResponse> {
    const resp = await this.request(`${this.base}/api/vocab`, { signal });
    return (await this.parse(resp)) as unknown as VocabResponse;
  }

  async health(signal?: AbortSignal): Promise<HealthResponse> {
    const resp = await this.request(`${this.base}/api/health`, { signal });
    return (await this.parse(resp)) as unknown as HealthResponse;
  }

  private async request(url: string, init: RequestInit): Promise<Response> {
    try {
      return await this.fetchImpl(url, init);
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      const msg = err instanceof Error ? err.message : String(err);
      throw new ApiError("network", `service unreachable: ${msg}`);
    }
  }

  private async parse(resp: Response): Promise<Record<string, unknown>> {
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // fall through: non-JSON body is reported via the status line below
    }
    if (!resp.ok) {
      const obj = (body ?? {}) as Record<string, unknown>;
      const code = typeof obj.error === "string" ? obj.error : "http-error";
      const message =
        typeof obj.message === "string" ? obj.message : `HTTP ${resp.status}`;
      throw new ApiError(code, message, resp.status);
    }
    if (body === null || typeof body !== "object") {
      throw new ApiError("bad-response", "response body is not a JSON object", resp.status);
    }
    return body as Record<string, unknown>;
  }
}
