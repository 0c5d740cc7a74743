/** Display formatting only — no metric arithmetic happens client-side. */

/** Mean rubric scores and ratio metrics, two decimals; "-" when absent. */
export function formatMean(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "-";
  }
  return value.toFixed(2);
}

/** Ratio metric cell for the live panel: undefined means the counts were
 * never entered, which the harness reports as excluded, not zero. */
export function formatRatio(value: number | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a (excluded)";
  }
  return value.toFixed(2);
}

/** Quiz accuracy, rendered like the harness: 0.9 -> "90%". */
export function formatPercent(value: number): string {
  return `${Math.round(value * 100)}%`;
}

/** Cosine scores on retrieval trace cards. */
export function formatScore(value: number): string {
  return value.toFixed(4);
}

/** p-values with six significant digits, mirroring the report text. */
export function formatPValue(value: number): string {
  return String(Number(value.toPrecision(6)));
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
