/** Annotation session state machine, kept free of DOM concerns.
 *
 * One session walks a group's response list in order, holding a form draft
 * for the current response.  Submits go through three explicit transitions
 * (begin, stored, failed) so a failed POST keeps the draft for retry and a
 * stored one advances to the next unannotated response.
 */

import type { AnnotationPayload, QueryResponse } from "./types.js";

export type LikertDimension =
  | "accuracy"
  | "relevance"
  | "completeness"
  | "clarity";

export type CountField = "tp" | "fp" | "fn";

export type SubmitStatus = "idle" | "in-flight" | "failed";

export const LIKERT_DIMENSIONS: readonly LikertDimension[] = [
  "accuracy",
  "relevance",
  "completeness",
  "clarity",
];

export interface Draft {
  accuracy: number | null;
  relevance: number | null;
  completeness: number | null;
  clarity: number | null;
  tp: number | null;
  fp: number | null;
  fn: number | null;
}

export function emptyDraft(): Draft {
  return {
    accuracy: null,
    relevance: null,
    completeness: null,
    clarity: null,
    tp: null,
    fp: null,
    fn: null,
  };
}

export class AnnotationSession {
  readonly group: string;
  readonly annotatorId: string;
  draft: Draft = emptyDraft();
  status: SubmitStatus = "idle";
  lastError: string | null = null;

  private readonly queue: QueryResponse[];
  private readonly done = new Set<string>();

  constructor(
    group: string,
    responses: QueryResponse[],
    annotatorId: string,
    alreadyAnnotated: Iterable<string> = [],
  ) {
    this.group = group;
    this.annotatorId = annotatorId;
    this.queue = [...responses];
    for (const queryId of alreadyAnnotated) {
      this.done.add(queryId);
    }
  }

  get total(): number {
    return this.queue.length;
  }

  get completed(): number {
    return this.queue.filter((r) => this.done.has(r.query_id)).length;
  }

  get finished(): boolean {
    return this.current() === null;
  }

  /** The first response not yet annotated, or null when the pass is done. */
  current(): QueryResponse | null {
    return this.queue.find((r) => !this.done.has(r.query_id)) ?? null;
  }

  setLikert(dimension: LikertDimension, score: number): void {
    if (!Number.isInteger(score) || score < 1 || score > 5) {
      throw new RangeError(`${dimension} must be an integer 1-5, got ${score}`);
    }
    this.draft[dimension] = score;
  }

  /** Null clears the field: blank counts mean "not assessed", never zero. */
  setCount(field: CountField, value: number | null): void {
    if (value !== null && (!Number.isInteger(value) || value < 0)) {
      throw new RangeError(`${field} must be a non-negative integer or blank`);
    }
    this.draft[field] = value;
  }

  canSubmit(): boolean {
    return (
      this.current() !== null &&
      this.status !== "in-flight" &&
      LIKERT_DIMENSIONS.every((d) => this.draft[d] !== null)
    );
  }

  buildPayload(): AnnotationPayload {
    const response = this.current();
    if (response === null || !this.canSubmit()) {
      throw new Error("form is incomplete; submit should be disabled");
    }
    const payload: AnnotationPayload = {
      query_id: response.query_id,
      group: this.group,
      accuracy: this.draft.accuracy as number,
      relevance: this.draft.relevance as number,
      completeness: this.draft.completeness as number,
      clarity: this.draft.clarity as number,
      annotator_id: this.annotatorId,
    };
    if (this.draft.tp !== null) payload.tp = this.draft.tp;
    if (this.draft.fp !== null) payload.fp = this.draft.fp;
    if (this.draft.fn !== null) payload.fn = this.draft.fn;
    return payload;
  }

  beginSubmit(): AnnotationPayload {
    const payload = this.buildPayload();
    this.status = "in-flight";
    this.lastError = null;
    return payload;
  }

  resolveStored(): void {
    const response = this.current();
    if (response !== null) {
      this.done.add(response.query_id);
    }
    this.draft = emptyDraft();
    this.status = "idle";
    this.lastError = null;
  }

  /** A failed POST keeps the draft so nothing retyped is lost. */
  resolveFailed(message: string): void {
    this.status = "failed";
    this.lastError = message;
  }
}
