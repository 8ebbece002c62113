// Proposal review: request drafts along one of the five supported axes,
// inspect the image-edit and instruction fields, accept into a staged list
// (persisted to the server-side draft manifest), then commit. Accept is
// enabled only when the proposal's fields match the axis's category;
// rejected drafts are discarded locally.

import { ConditionDoc, ConsoleApi, ProposalFields, ApiError } from "./api.js";
import {
  categoryColor,
  proposalFieldsMatchAxis,
  SUPPORTED_PROPOSAL_AXES,
} from "./taxonomy.js";

export interface ReviewItem {
  draft: ConditionDoc;
  fields: ProposalFields;
  state: "pending" | "accepted" | "rejected";
}

export class ProposalReviewView {
  items: ReviewItem[] = [];
  staged: string[] = []; // accepted draft ids persisted to the server draft
  baseTask = "";
  axis: string = "VSB-NOBJ";

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ConsoleApi,
  ) {}

  async init(): Promise<void> {
    const manifest = await this.api.manifest();
    this.baseTask = manifest.base_tasks[0]?.id ?? "";
    this.render(manifest.base_tasks.map((t) => t.id));
  }

  async requestDrafts(): Promise<void> {
    this.setStatus("requesting proposals...");
    try {
      const resp = await this.api.propose(this.baseTask, this.axis);
      this.items = resp.drafts.map((d, i) => ({
        draft: d.condition,
        fields: resp.proposals[i],
        state: "pending" as const,
      }));
      this.setStatus(resp.rejected.length ? `${resp.rejected.length} item(s) screened out` : "");
    } catch (err) {
      this.setStatus(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
    this.renderItems();
  }

  canAccept(item: ReviewItem): boolean {
    return item.state === "pending" &&
      proposalFieldsMatchAxis(item.draft.axis, item.fields);
  }

  async accept(index: number): Promise<void> {
    const item = this.items[index];
    if (!item || !this.canAccept(item)) return;
    try {
      await this.api.acceptCondition(item.draft, false);
      item.state = "accepted";
      this.staged.push(item.draft.id);
      this.setStatus(`staged ${item.draft.id} into the draft manifest`);
    } catch (err) {
      this.setStatus(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
    this.renderItems();
  }

  reject(index: number): void {
    const item = this.items[index];
    if (item && item.state === "pending") {
      item.state = "rejected";
      this.renderItems();
    }
  }

  async commit(): Promise<void> {
    if (!this.staged.length) return;
    try {
      const result = await this.api.commitDraft();
      this.setStatus(`committed: manifest now has ${result.conditions} conditions`);
      this.staged = [];
    } catch (err) {
      this.setStatus(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
    this.renderItems();
  }

  private setStatus(text: string): void {
    const el = this.root.querySelector<HTMLElement>("#proposal-status");
    if (el) el.textContent = text;
  }

  render(baseTaskIds: string[]): void {
    const axisOptions = SUPPORTED_PROPOSAL_AXES.map(
      (a) => `<option value="${a}" ${a === this.axis ? "selected" : ""}>${a}</option>`,
    ).join("");
    const taskOptions = baseTaskIds
      .map((t) => `<option value="${t}" ${t === this.baseTask ? "selected" : ""}>${t}</option>`)
      .join("");
    this.root.innerHTML = `
      <section class="proposals">
        <div class="controls">
          <label>base task <select id="base-task-select">${taskOptions}</select></label>
          <label>axis <select id="axis-select">${axisOptions}</select></label>
          <button id="request-drafts">request drafts</button>
          <button id="commit-staged" disabled>commit staged</button>
        </div>
        <div id="proposal-status" class="banner"></div>
        <div id="proposal-items"></div>
        <div id="staged-list"></div>
      </section>`;
    this.root
      .querySelector<HTMLSelectElement>("#base-task-select")!
      .addEventListener("change", (ev) => {
        this.baseTask = (ev.target as HTMLSelectElement).value;
      });
    this.root
      .querySelector<HTMLSelectElement>("#axis-select")!
      .addEventListener("change", (ev) => {
        this.axis = (ev.target as HTMLSelectElement).value;
      });
    this.root
      .querySelector<HTMLButtonElement>("#request-drafts")!
      .addEventListener("click", () => void this.requestDrafts());
    this.root
      .querySelector<HTMLButtonElement>("#commit-staged")!
      .addEventListener("click", () => void this.commit());
    this.renderItems();
  }

  renderItems(): void {
    const container = this.root.querySelector<HTMLElement>("#proposal-items");
    if (!container) return;
    container.innerHTML = this.items
      .map((item, i) => {
        const axis = item.draft.axis;
        const visual = item.fields.visualChange;
        const language = item.fields.languageChange;
        return `<div class="proposal-card ${item.state}" data-id="${item.draft.id}">
          <span class="axis-badge" style="background:${categoryColor(axis)}">${axis}</span>
          <strong>${item.draft.id}</strong>
          ${visual ? `<p class="visual-change">image edit: ${visual}</p>` : ""}
          ${language ? `<p class="language-change">instruction: ${language}</p>` : ""}
          <div class="actions">
            <button class="accept" data-index="${i}"
              ${this.canAccept(item) ? "" : "disabled"}>accept</button>
            <button class="reject" data-index="${i}"
              ${item.state === "pending" ? "" : "disabled"}>reject</button>
            <span class="state">${item.state}</span>
          </div>
        </div>`;
      })
      .join("");
    const stagedEl = this.root.querySelector<HTMLElement>("#staged-list");
    if (stagedEl) {
      stagedEl.innerHTML = this.staged.length
        ? `<h4>staged for commit</h4><ul>${this.staged
            .map((id) => `<li>${id}</li>`)
            .join("")}</ul>`
        : "";
    }
    const commitBtn = this.root.querySelector<HTMLButtonElement>("#commit-staged");
    if (commitBtn) commitBtn.disabled = this.staged.length === 0;
    container.querySelectorAll<HTMLButtonElement>("button.accept").forEach((btn) => {
      btn.addEventListener("click", () => void this.accept(Number(btn.dataset.index)));
    });
    container.querySelectorAll<HTMLButtonElement>("button.reject").forEach((btn) => {
      btn.addEventListener("click", () => this.reject(Number(btn.dataset.index)));
    });
  }
}
