/** JSON shapes exchanged with the evaluation service's /api endpoints. */

export type Phase = 1 | 2 | 3;

export interface ScoredHit {
  chunk_id: string;
  score: number;
}

export interface QueryResponse {
  query_id: string;
  query_text: string;
  phase: number;
  hits: ScoredHit[];
  /** [chunk_id, summary text] pairs, in hit rank order. */
  summaries: [string, string][];
  answer: string;
  backend_tag: string;
  trace_hash: string;
  supplementary_queries: string[];
}

export interface DatasetQuery {
  query_id: string;
  guideline_key: string;
  audience: string;
  text: string;
}

export interface GroupResponses {
  group: string;
  responses: QueryResponse[];
}

export interface AnnotationPayload {
  query_id: string;
  group: string;
  accuracy: number;
  relevance: number;
  completeness: number;
  clarity: number;
  annotator_id: string;
  tp?: number;
  fp?: number;
  fn?: number;
  submission_token?: string;
}

export interface StoredAnnotation extends AnnotationPayload {
  timestamp: string;
}

export interface GroupAggregate {
  group: string;
  n: number;
  mean_accuracy: number;
  mean_relevance: number;
  mean_completeness: number;
  mean_clarity: number;
  mean_recall: number | null;
  mean_precision: number | null;
  mean_f1: number | null;
  /** Per ratio metric, how many records lacked the counts to compute it. */
  excluded: Record<string, number>;
}

export interface WilcoxonResultObj {
  w_statistic: number;
  p_value: number;
  n_input: number;
  n_effective: number;
  method: string;
  alternative: string;
  w_plus: number;
  w_minus: number;
}

export interface ComparisonTestObj {
  group_a: string;
  group_b: string;
  metric: string;
  alternative: string;
  alpha: number;
  significant: boolean;
  result: WilcoxonResultObj;
}

export interface QuizResultObj {
  n_items: number;
  n_correct: number;
  accuracy: number;
  per_item: Record<string, boolean>;
}

export interface ComparisonReport {
  aggregates: GroupAggregate[];
  tests: ComparisonTestObj[];
  quiz: Record<string, QuizResultObj>;
}

export interface QuizItemPublic {
  item_id: string;
  stem: string;
  choices: string[];
}

export interface HealthStatus {
  status: string;
  version: string;
}
