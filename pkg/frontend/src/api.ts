/** Thin typed client for the evaluation service.
 *
 * Every number the console displays comes back from these calls; the client
 * never post-processes values beyond JSON parsing, so the UI cannot drift
 * from the harness arithmetic.
 */

import type {
  AnnotationPayload,
  ComparisonReport,
  DatasetQuery,
  GroupResponses,
  HealthStatus,
  Phase,
  QueryResponse,
  QuizItemPublic,
  QuizResultObj,
  StoredAnnotation,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }

  /** Service unavailable or unreachable: worth offering a retry. */
  get retryable(): boolean {
    return this.status === 0 || this.status === 503;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

function defaultFetch(input: string, init?: RequestInit): Promise<Response> {
  return fetch(input, init);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = defaultFetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "NetworkError", String(err));
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const obj = (body ?? {}) as Record<string, unknown>;
      const name =
        typeof obj.error === "string" ? obj.error : `HTTP ${response.status}`;
      const detail =
        typeof obj.detail === "string"
          ? obj.detail
          : JSON.stringify(obj.detail ?? obj);
      throw new ApiError(response.status, name, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthStatus> {
    return this.request("/api/health");
  }

  query(text: string, phase: Phase): Promise<QueryResponse> {
    return this.post("/api/query", { text, phase });
  }

  async dataset(): Promise<DatasetQuery[]> {
    const body = await this.request<{ queries: DatasetQuery[] }>("/api/dataset");
    return body.queries;
  }

  responses(group: string): Promise<GroupResponses> {
    return this.request(`/api/responses?group=${encodeURIComponent(group)}`);
  }

  async submitAnnotation(payload: AnnotationPayload): Promise<StoredAnnotation> {
    const body = await this.post<{ stored: StoredAnnotation }>(
      "/api/annotations",
      payload,
    );
    return body.stored;
  }

  metrics(groups: string[]): Promise<ComparisonReport> {
    const joined = encodeURIComponent(groups.join(","));
    return this.request(`/api/metrics?groups=${joined}`);
  }

  async quiz(): Promise<QuizItemPublic[]> {
    const body = await this.request<{ items: QuizItemPublic[] }>("/api/quiz");
    return body.items;
  }

  submitQuizAnswers(answers: Record<string, number>): Promise<QuizResultObj> {
    return this.post("/api/quiz/answers", { answers });
  }
}
