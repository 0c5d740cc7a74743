/** Shared render helpers.  These return HTML strings; controllers own the
 * event wiring so the markup stays trivially testable. */

import { escapeHtml, formatMean, formatPercent, formatPValue, formatRatio, formatScore } from "./format.js";
import { RUBRIC_DIMENSIONS, type RubricDimension } from "./rubric.js";
import type { ComparisonReport, QueryResponse } from "./types.js";

/** One rubric dimension as a radio group.  Every option label carries the
 * full anchor sentence for its score — raters judge against the anchor
 * text, not a bare number. */
export function renderLikertFieldset(
  dimension: RubricDimension,
  selected: number | null,
): string {
  const options = ([1, 2, 3, 4, 5] as const)
    .map((score) => {
      const anchor = dimension.anchors[String(score) as "1" | "2" | "3" | "4" | "5"];
      const checked = selected === score ? " checked" : "";
      return (
        `<label class="likert-option">` +
        `<input type="radio" name="likert-${dimension.metric}" value="${score}"${checked}>` +
        `<span class="likert-score">${score}</span> ` +
        `<span class="likert-anchor">${escapeHtml(anchor)}</span>` +
        `</label>`
      );
    })
    .join("\n");
  return (
    `<fieldset class="likert" data-metric="${dimension.metric}">` +
    `<legend>${escapeHtml(dimension.title)}</legend>` +
    `<p class="likert-question">${escapeHtml(dimension.question)}</p>` +
    options +
    `</fieldset>`
  );
}

export function renderAllLikertFieldsets(
  selections: Readonly<Record<RubricDimension["metric"], number | null>>,
): string {
  return RUBRIC_DIMENSIONS.map((d) =>
    renderLikertFieldset(d, selections[d.metric]),
  ).join("\n");
}

/** The retrieval trace for one answered query: sources, scores, summaries. */
export function renderResponseCard(response: QueryResponse): string {
  const sources = response.hits
    .map((hit, i) => {
      const summary = response.summaries[i]?.[1] ?? "";
      return (
        `<div class="source-card">` +
        `<div class="source-head"><code>${escapeHtml(hit.chunk_id)}</code>` +
        ` <span class="score">score ${formatScore(hit.score)}</span></div>` +
        `<p class="source-summary">${escapeHtml(summary)}</p>` +
        `</div>`
      );
    })
    .join("\n");
  const supplementary = response.supplementary_queries.length
    ? `<details class="supplementary"><summary>` +
      `${response.supplementary_queries.length} supplementary queries</summary><ul>` +
      response.supplementary_queries
        .map((q) => `<li>${escapeHtml(q)}</li>`)
        .join("") +
      `</ul></details>`
    : "";
  return (
    `<article class="response">` +
    `<pre class="answer">${escapeHtml(response.answer)}</pre>` +
    `<h3>Retrieved sources</h3>` +
    sources +
    supplementary +
    `<p class="trace">phase ${response.phase} · ${escapeHtml(response.backend_tag)}` +
    ` · trace <code>${escapeHtml(response.trace_hash.slice(0, 12))}</code></p>` +
    `</article>`
  );
}

/** The live metrics panel.  Values render exactly as the API returned them
 * (two-decimal display); nothing is recomputed here. */
export function renderMetricsPanel(report: ComparisonReport): string {
  const header =
    `<tr><th>group</th><th>n</th><th>accuracy</th><th>relevance</th>` +
    `<th>completeness</th><th>clarity</th><th>recall</th><th>precision</th><th>f1</th></tr>`;
  const rows = report.aggregates
    .map(
      (a) =>
        `<tr data-group="${escapeHtml(a.group)}">` +
        `<td>${escapeHtml(a.group)}</td><td>${a.n}</td>` +
        `<td>${formatMean(a.mean_accuracy)}</td>` +
        `<td>${formatMean(a.mean_relevance)}</td>` +
        `<td>${formatMean(a.mean_completeness)}</td>` +
        `<td>${formatMean(a.mean_clarity)}</td>` +
        `<td>${formatRatio(a.mean_recall)}</td>` +
        `<td>${formatRatio(a.mean_precision)}</td>` +
        `<td>${formatRatio(a.mean_f1)}</td>` +
        `</tr>`,
    )
    .join("\n");
  const tests = report.tests
    .map(
      (t) =>
        `<li>${escapeHtml(t.group_b)} &gt; ${escapeHtml(t.group_a)} on ${escapeHtml(t.metric)}: ` +
        `W=${t.result.w_statistic} p=${formatPValue(t.result.p_value)} ` +
        `(${t.significant ? "significant" : "not significant"} at α=${t.alpha})</li>`,
    )
    .join("");
  const quiz = Object.entries(report.quiz)
    .map(
      ([group, r]) =>
        `<li>${escapeHtml(group)}: ${formatPercent(r.accuracy)} (${r.n_correct}/${r.n_items})</li>`,
    )
    .join("");
  return (
    `<div class="metrics-panel">` +
    `<table class="metrics">${header}\n${rows}</table>` +
    (tests ? `<ul class="tests">${tests}</ul>` : "") +
    (quiz ? `<ul class="quiz">${quiz}</ul>` : "") +
    `</div>`
  );
}

export function renderErrorBanner(message: string, retryable: boolean): string {
  return (
    `<div class="banner ${retryable ? "banner-retry" : "banner-error"}">` +
    `<span>${escapeHtml(message)}</span>` +
    (retryable ? `<button type="button" data-action="retry">Retry</button>` : "") +
    `</div>`
  );
}
