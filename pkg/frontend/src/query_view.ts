/** Interactive querying: one question, one phase, answer plus trace. */

import { ApiClient, ApiError } from "./api.js";
import { escapeHtml } from "./format.js";
import type { Phase, QueryResponse } from "./types.js";
import { renderErrorBanner, renderResponseCard } from "./widgets.js";

export class QueryView {
  private lastQuestion = "";
  private lastPhase: Phase = 1;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  mount(): void {
    this.root.innerHTML = `
      <section class="query-view">
        <form class="ask-form">
          <textarea name="question" rows="3"
            placeholder="Ask a pharmacogenomic question…"></textarea>
          <div class="ask-controls">
            <label>Phase
              <select name="phase">
                <option value="1">1 — guideline corpus</option>
                <option value="2">2 — + annotation database</option>
                <option value="3">3 — + targeted retrieval</option>
              </select>
            </label>
            <button type="submit" disabled>Ask</button>
          </div>
        </form>
        <div class="query-result"></div>
      </section>`;
    const form = this.root.querySelector<HTMLFormElement>(".ask-form")!;
    const textarea = form.querySelector<HTMLTextAreaElement>("textarea")!;
    const button = form.querySelector<HTMLButtonElement>("button")!;
    textarea.addEventListener("input", () => {
      button.disabled = textarea.value.trim() === "";
    });
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const phase = Number(
        form.querySelector<HTMLSelectElement>("select")!.value,
      ) as Phase;
      void this.ask(textarea.value, phase);
    });
  }

  private resultBox(): HTMLElement {
    return this.root.querySelector<HTMLElement>(".query-result")!;
  }

  async ask(question: string, phase: Phase): Promise<void> {
    this.lastQuestion = question;
    this.lastPhase = phase;
    this.resultBox().innerHTML = `<p class="loading">Retrieving…</p>`;
    try {
      const response = await this.api.query(question, phase);
      this.showResponse(response);
    } catch (err) {
      this.showError(err);
    }
  }

  private showResponse(response: QueryResponse): void {
    this.resultBox().innerHTML = renderResponseCard(response);
  }

  private showError(err: unknown): void {
    const box = this.resultBox();
    if (err instanceof ApiError) {
      box.innerHTML = renderErrorBanner(
        `${err.errorName}: ${err.message}`,
        err.retryable,
      );
      const retry = box.querySelector<HTMLButtonElement>("[data-action=retry]");
      retry?.addEventListener("click", () => {
        void this.ask(this.lastQuestion, this.lastPhase);
      });
      return;
    }
    box.innerHTML = `<div class="banner banner-error">${escapeHtml(String(err))}</div>`;
  }
}
