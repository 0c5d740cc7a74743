import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Call {
  url: string;
  method: string;
  body: unknown;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function clientWith(
  handler: (url: string, init?: RequestInit) => Response | Promise<Response>,
): { client: ApiClient; calls: Call[] } {
  const calls: Call[] = [];
  const client = new ApiClient("", async (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    return handler(url, init);
  });
  return { client, calls };
}

describe("request shapes", () => {
  it("posts queries as JSON", async () => {
    const { client, calls } = clientWith(() =>
      jsonResponse(200, { answer: "a", hits: [], summaries: [] }),
    );
    await client.query("warfarin dosing", 2);
    expect(calls).toHaveLength(1);
    expect(calls[0]).toEqual({
      url: "/api/query",
      method: "POST",
      body: { text: "warfarin dosing", phase: 2 },
    });
  });

  it("encodes group names in query strings", async () => {
    const { client, calls } = clientWith(() =>
      jsonResponse(200, { group: "a b", responses: [] }),
    );
    await client.responses("a b");
    expect(calls[0]?.url).toBe("/api/responses?group=a%20b");
  });

  it("joins metric groups with commas", async () => {
    const { client, calls } = clientWith(() =>
      jsonResponse(200, { aggregates: [], tests: [], quiz: {} }),
    );
    await client.metrics(["phase1", "phase2"]);
    expect(calls[0]?.url).toBe("/api/metrics?groups=phase1%2Cphase2");
  });

  it("unwraps envelope keys", async () => {
    const { client } = clientWith((url) => {
      if (url.startsWith("/api/dataset")) {
        return jsonResponse(200, { queries: [{ query_id: "q1" }] });
      }
      if (url.startsWith("/api/quiz")) {
        return jsonResponse(200, { items: [{ item_id: "q01" }] });
      }
      return jsonResponse(200, { stored: { query_id: "q1", timestamp: "t" } });
    });
    expect(await client.dataset()).toEqual([{ query_id: "q1" }]);
    expect(await client.quiz()).toEqual([{ item_id: "q01" }]);
    const stored = await client.submitAnnotation({
      query_id: "q1",
      group: "g",
      accuracy: 5,
      relevance: 5,
      completeness: 5,
      clarity: 5,
      annotator_id: "rater-01",
    });
    expect(stored.timestamp).toBe("t");
  });
});

describe("error mapping", () => {
  it("carries the service's error name and detail", async () => {
    const { client } = clientWith(() =>
      jsonResponse(404, { error: "UnknownGroup", detail: "no group 'x'" }),
    );
    const err = await client.responses("x").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.errorName).toBe("UnknownGroup");
    expect(apiErr.message).toBe("no group 'x'");
    expect(apiErr.retryable).toBe(false);
  });

  it("duplicate submissions surface as 409", async () => {
    const { client } = clientWith(() =>
      jsonResponse(409, { error: "DuplicateSubmission", detail: "tok!" }),
    );
    const err = (await client
      .submitAnnotation({
        query_id: "q",
        group: "g",
        accuracy: 5,
        relevance: 5,
        completeness: 5,
        clarity: 5,
        annotator_id: "rater-01",
      })
      .catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(409);
    expect(err.errorName).toBe("DuplicateSubmission");
  });

  it("503 is retryable", async () => {
    const { client } = clientWith(() =>
      jsonResponse(503, { detail: "warming up" }),
    );
    const err = (await client.health().catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(503);
    expect(err.errorName).toBe("HTTP 503");
    expect(err.retryable).toBe(true);
  });

  it("network failure maps to status 0, retryable", async () => {
    const client = new ApiClient("", () => {
      throw new TypeError("fetch failed");
    });
    const err = (await client.health().catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(0);
    expect(err.errorName).toBe("NetworkError");
    expect(err.retryable).toBe(true);
  });

  it("validation errors keep structured detail readable", async () => {
    const { client } = clientWith(() =>
      jsonResponse(400, { detail: [{ loc: ["body", "accuracy"], msg: "too big" }] }),
    );
    const err = (await client
      .query("q", 1)
      .catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(400);
    expect(err.message).toContain("accuracy");
  });
});
