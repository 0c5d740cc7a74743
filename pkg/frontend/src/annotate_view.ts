/** Rating workflow: walk a group's responses, rate, watch the live panel.
 *
 * Submits are optimistic only in flow (the form clears and advances when
 * the server acknowledges); the metric panel always re-fetches from the
 * API afterwards, so every displayed number is the harness's own.
 */

import { ApiClient, ApiError } from "./api.js";
import { escapeHtml } from "./format.js";
import { AnnotationSession, LIKERT_DIMENSIONS, type CountField, type LikertDimension } from "./state.js";
import type { ComparisonReport } from "./types.js";
import {
  renderAllLikertFieldsets,
  renderErrorBanner,
  renderMetricsPanel,
  renderResponseCard,
} from "./widgets.js";

const COUNT_FIELDS: readonly CountField[] = ["tp", "fp", "fn"];

export class AnnotateView {
  session: AnnotationSession | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly annotatorId: string,
  ) {}

  mount(): void {
    this.root.innerHTML = `
      <section class="annotate-view">
        <form class="group-form">
          <label>Group
            <input name="group" placeholder="e.g. phase2" required>
          </label>
          <button type="submit">Load responses</button>
        </form>
        <div class="annotate-body"></div>
        <div class="metrics-box"></div>
      </section>`;
    const form = this.root.querySelector<HTMLFormElement>(".group-form")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const group = form.querySelector<HTMLInputElement>("input")!.value.trim();
      if (group) {
        void this.loadGroup(group);
      }
    });
  }

  private body(): HTMLElement {
    return this.root.querySelector<HTMLElement>(".annotate-body")!;
  }

  private metricsBox(): HTMLElement {
    return this.root.querySelector<HTMLElement>(".metrics-box")!;
  }

  async loadGroup(group: string): Promise<void> {
    this.body().innerHTML = `<p class="loading">Loading ${escapeHtml(group)}…</p>`;
    try {
      const loaded = await this.api.responses(group);
      this.session = new AnnotationSession(group, loaded.responses, this.annotatorId);
      this.renderForm();
      await this.refreshMetrics();
    } catch (err) {
      this.body().innerHTML = renderErrorBanner(
        err instanceof ApiError ? `${err.errorName}: ${err.message}` : String(err),
        err instanceof ApiError && err.retryable,
      );
    }
  }

  renderForm(): void {
    const session = this.session;
    if (!session) {
      return;
    }
    const current = session.current();
    if (current === null) {
      this.body().innerHTML =
        `<p class="done">All ${session.total} responses annotated.</p>`;
      return;
    }
    const counts = COUNT_FIELDS.map(
      (field) =>
        `<label class="count">${field.toUpperCase()}
           <input type="number" min="0" step="1" name="${field}"
                  value="${session.draft[field] ?? ""}"></label>`,
    ).join("\n");
    this.body().innerHTML = `
      <p class="progress">${session.completed + 1} of ${session.total} · ${escapeHtml(session.group)}</p>
      <blockquote class="query-text">${escapeHtml(current.query_text)}</blockquote>
      ${renderResponseCard(current)}
      <form class="annotation-form">
        ${renderAllLikertFieldsets(session.draft)}
        <div class="counts">${counts}</div>
        <button type="submit" disabled>Submit rating</button>
        <span class="status"></span>
      </form>`;
    this.wireForm();
  }

  private wireForm(): void {
    const session = this.session!;
    const form = this.body().querySelector<HTMLFormElement>(".annotation-form")!;
    const button = form.querySelector<HTMLButtonElement>("button[type=submit]")!;

    const sync = () => {
      button.disabled = !session.canSubmit();
    };
    for (const dimension of LIKERT_DIMENSIONS) {
      form
        .querySelectorAll<HTMLInputElement>(`input[name=likert-${dimension}]`)
        .forEach((input) => {
          input.addEventListener("change", () => {
            session.setLikert(dimension as LikertDimension, Number(input.value));
            sync();
          });
        });
    }
    for (const field of COUNT_FIELDS) {
      const input = form.querySelector<HTMLInputElement>(`input[name=${field}]`)!;
      input.addEventListener("change", () => {
        const raw = input.value.trim();
        session.setCount(field, raw === "" ? null : Number(raw));
        sync();
      });
    }
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    sync();
  }

  async submit(): Promise<void> {
    const session = this.session;
    if (!session || !session.canSubmit()) {
      return;
    }
    const payload = session.beginSubmit();
    this.setStatus("saving…");
    try {
      await this.api.submitAnnotation(payload);
      session.resolveStored();
      this.renderForm();
      await this.refreshMetrics();
    } catch (err) {
      // keep the draft: the rater's entries survive a failed POST
      const message =
        err instanceof ApiError ? `${err.errorName}: ${err.message}` : String(err);
      session.resolveFailed(message);
      this.setStatus(`failed — ${message} (submit again to retry)`);
    }
  }

  private setStatus(text: string): void {
    const status = this.body().querySelector<HTMLElement>(".status");
    if (status) {
      status.textContent = text;
    }
  }

  async refreshMetrics(): Promise<void> {
    const session = this.session;
    if (!session) {
      return;
    }
    try {
      const report = await this.api.metrics([session.group]);
      this.showMetrics(report);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // no annotations stored yet: nothing to aggregate
        this.metricsBox().innerHTML = `<p class="metrics-empty">No annotations for this group yet.</p>`;
        return;
      }
      throw err;
    }
  }

  showMetrics(report: ComparisonReport): void {
    this.metricsBox().innerHTML = renderMetricsPanel(report);
  }
}
