/** Side-by-side reading: the same query's answer across groups.
 *
 * Pairing is by query_id — the comparison the rest of the harness tests
 * statistically is exactly this pairing.
 */

import { ApiClient, ApiError } from "./api.js";
import { escapeHtml } from "./format.js";
import type { QueryResponse } from "./types.js";
import { renderErrorBanner, renderResponseCard } from "./widgets.js";

export class CompareView {
  private byGroup = new Map<string, Map<string, QueryResponse>>();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  mount(): void {
    this.root.innerHTML = `
      <section class="compare-view">
        <form class="compare-form">
          <label>Groups (comma-separated)
            <input name="groups" placeholder="phase1,phase2">
          </label>
          <button type="submit">Load</button>
        </form>
        <div class="compare-picker"></div>
        <div class="compare-columns"></div>
      </section>`;
    const form = this.root.querySelector<HTMLFormElement>(".compare-form")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const raw = form.querySelector<HTMLInputElement>("input")!.value;
      const groups = raw.split(",").map((g) => g.trim()).filter(Boolean);
      if (groups.length > 0) {
        void this.loadGroups(groups);
      }
    });
  }

  async loadGroups(groups: string[]): Promise<void> {
    const columns = this.root.querySelector<HTMLElement>(".compare-columns")!;
    columns.innerHTML = `<p class="loading">Loading…</p>`;
    try {
      this.byGroup = new Map();
      for (const group of groups) {
        const loaded = await this.api.responses(group);
        this.byGroup.set(
          group,
          new Map(loaded.responses.map((r) => [r.query_id, r])),
        );
      }
      this.renderPicker();
      columns.innerHTML = "";
    } catch (err) {
      columns.innerHTML = renderErrorBanner(
        err instanceof ApiError ? `${err.errorName}: ${err.message}` : String(err),
        err instanceof ApiError && err.retryable,
      );
    }
  }

  /** Query ids present in every loaded group, in first group's order. */
  sharedQueryIds(): string[] {
    const maps = [...this.byGroup.values()];
    if (maps.length === 0) {
      return [];
    }
    return [...maps[0]!.keys()].filter((id) => maps.every((m) => m.has(id)));
  }

  private renderPicker(): void {
    const picker = this.root.querySelector<HTMLElement>(".compare-picker")!;
    const shared = this.sharedQueryIds();
    if (shared.length === 0) {
      picker.innerHTML = `<p class="compare-empty">No query appears in all selected groups.</p>`;
      return;
    }
    picker.innerHTML = `
      <label>Query
        <select name="query">
          ${shared.map((id) => `<option value="${escapeHtml(id)}">${escapeHtml(id)}</option>`).join("")}
        </select>
      </label>`;
    const select = picker.querySelector<HTMLSelectElement>("select")!;
    select.addEventListener("change", () => this.renderColumns(select.value));
    this.renderColumns(shared[0]!);
  }

  renderColumns(queryId: string): void {
    const columns = this.root.querySelector<HTMLElement>(".compare-columns")!;
    const cells = [...this.byGroup.entries()]
      .map(([group, responses]) => {
        const response = responses.get(queryId);
        const body = response
          ? renderResponseCard(response)
          : `<p class="compare-missing">no response</p>`;
        return `<div class="compare-cell" data-group="${escapeHtml(group)}">
          <h3>${escapeHtml(group)}</h3>${body}</div>`;
      })
      .join("\n");
    columns.innerHTML = cells;
  }
}
