// GENERATED FILE - do not edit by hand.
// Source of truth: src/pgxrag/data/rubric/likert_rubric.json
// Regenerate with: python scripts/build_fixtures.py

export type RubricMetric = "accuracy" | "relevance" | "completeness" | "clarity";

export interface RubricDimension {
  readonly metric: RubricMetric;
  readonly title: string;
  readonly question: string;
  readonly anchors: Readonly<Record<"1" | "2" | "3" | "4" | "5", string>>;
}

export const RUBRIC_DIMENSIONS: readonly RubricDimension[] = [
  {
    "metric": "accuracy",
    "title": "Accuracy of Content",
    "question": "How correct and factually precise is the information provided?",
    "anchors": {
      "1": "Completely inaccurate or wrong.",
      "2": "Mostly inaccurate with some correct points.",
      "3": "Somewhat accurate but contains significant errors.",
      "4": "Mostly accurate with minor errors.",
      "5": "Completely accurate and correct."
    }
  },
  {
    "metric": "relevance",
    "title": "Relevance to Query",
    "question": "How well does the response address the specific question asked?",
    "anchors": {
      "1": "Not related to the question at all.",
      "2": "Slightly related but misses the main point.",
      "3": "Moderately relevant, but not fully aligned with the question.",
      "4": "Mostly relevant, covers most aspects of the question.",
      "5": "Fully relevant and directly answers the question."
    }
  },
  {
    "metric": "completeness",
    "title": "Completeness of Information",
    "question": "How thorough and detailed is the response?",
    "anchors": {
      "1": "Very incomplete, missing most of the necessary information.",
      "2": "Somewhat incomplete, lacking important details.",
      "3": "Adequate but missing some information or details.",
      "4": "Mostly complete, with minor gaps.",
      "5": "Fully complete, providing all necessary details."
    }
  },
  {
    "metric": "clarity",
    "title": "Clarity and Coherence",
    "question": "How clear and well-structured is the response?",
    "anchors": {
      "1": "Confusing and poorly structured.",
      "2": "Somewhat unclear and difficult to follow.",
      "3": "Mostly clear but has some organizational issues.",
      "4": "Clear and well-organized with minor issues.",
      "5": "Very clear, well-organized, and easy to understand."
    }
  }
];
