// Live trial entry for a human evaluator. Selecting a cell shows its
// condition card; the four outcome buttons (keyboard S/F/I/T) post a trial
// and advance to the next incomplete cell. Posts are never optimistic: the
// view waits for the API acknowledgment, reuses one idempotency key per
// logical submission so a retry after a network error cannot double-record,
// and surfaces API errors as an inline banner without losing the selection.

import {
  ApiError,
  ConsoleApi,
  ManifestDoc,
  OutcomeName,
  Progress,
  ProgressCell,
  TrialBody,
} from "./api.js";
import { categoryColor } from "./taxonomy.js";

const OUTCOMES: { name: OutcomeName; label: string; key: string }[] = [
  { name: "success", label: "Success (S)", key: "s" },
  { name: "failure", label: "Failure (F)", key: "f" },
  { name: "irrecoverable", label: "Irrecoverable (I)", key: "i" },
  { name: "timeout", label: "Timeout (T)", key: "t" },
];

interface CardInfo {
  instruction: string;
  notes: string;
  sceneImage: string;
  axis: string;
}

function newIdempotencyKey(): string {
  const rnd = (globalThis.crypto as Crypto | undefined)?.randomUUID?.();
  return rnd ?? `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class TrialEntryView {
  progress: Progress | null = null;
  selected: { model: string; condition: string } | null = null;
  private manifest: ManifestDoc | null = null;
  private pendingKey: string | null = null;
  private busy = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ConsoleApi,
    private readonly campaignId: string,
  ) {}

  async init(): Promise<void> {
    this.manifest = await this.api.manifest();
    this.progress = await this.api.progress(this.campaignId);
    this.selected = this.firstIncomplete();
    this.render();
    this.root.addEventListener("keydown", (ev) => this.onKey(ev as KeyboardEvent));
  }

  firstIncomplete(): { model: string; condition: string } | null {
    const cell = this.progress?.cells.find((c) => c.done < c.required);
    return cell ? { model: cell.model, condition: cell.condition } : null;
  }

  cell(model: string, condition: string): ProgressCell | undefined {
    return this.progress?.cells.find(
      (c) => c.model === model && c.condition === condition,
    );
  }

  selectedCell(): ProgressCell | undefined {
    if (!this.selected) return undefined;
    return this.cell(this.selected.model, this.selected.condition);
  }

  private cardInfo(conditionId: string): CardInfo {
    const m = this.manifest!;
    const base = m.base_tasks.find((t) => t.id === conditionId);
    if (base) {
      return {
        instruction: base.instruction,
        notes: "in-distribution base task",
        sceneImage: base.scene.image,
        axis: "ID",
      };
    }
    const cond = m.conditions.find((c) => c.id === conditionId);
    if (cond) {
      const baseTask = m.base_tasks.find((t) => t.id === cond.base_task);
      return {
        instruction: cond.delta.instruction ?? baseTask?.instruction ?? "",
        notes: cond.notes,
        sceneImage: cond.scene_image,
        axis: cond.axis,
      };
    }
    const comp = m.compositions.find((c) => c.id === conditionId);
    if (comp) {
      const baseTask = m.base_tasks.find((t) => t.id === comp.base_task);
      const lastInstruction = [...comp.parts]
        .reverse()
        .map((p) => p.delta.instruction)
        .find((i) => i !== undefined);
      return {
        instruction:
          comp.effective_instruction ?? lastInstruction ?? baseTask?.instruction ?? "",
        notes: comp.notes,
        sceneImage: comp.scene_image,
        axis: comp.parts.map((p) => p.axis).join("+"),
      };
    }
    return { instruction: "", notes: "", sceneImage: "", axis: "" };
  }

  select(model: string, condition: string): void {
    this.selected = { model, condition };
    this.pendingKey = null;
    this.render();
  }

  async record(outcome: OutcomeName): Promise<void> {
    const cell = this.selectedCell();
    if (!cell || this.busy || cell.done >= cell.required) return;
    this.busy = true;
    // one key per logical submission: kept on failure so the retry dedupes
    this.pendingKey = this.pendingKey ?? newIdempotencyKey();
    const stepsInput = this.root.querySelector<HTMLInputElement>("#steps-input");
    const noteInput = this.root.querySelector<HTMLInputElement>("#note-input");
    const body: TrialBody = {
      model: cell.model,
      condition: cell.condition,
      outcome,
      steps:
        outcome === "timeout"
          ? this.progress!.max_steps
          : Number(stepsInput?.value || "0"),
      note: noteInput?.value ?? "",
      idempotency_key: this.pendingKey,
    };
    try {
      await this.api.postTrial(this.campaignId, body);
      this.pendingKey = null;
      this.progress = await this.api.progress(this.campaignId);
      const updated = this.cell(cell.model, cell.condition);
      if (updated && updated.done >= updated.required) {
        this.selected = this.firstIncomplete();
      }
      this.setBanner("");
    } catch (err) {
      if (err instanceof ApiError) {
        this.setBanner(`${err.code}: ${err.message}`, true);
        if (err.status === 409) {
          // cell filled up under us; refresh the grid but keep the selection
          this.progress = await this.api.progress(this.campaignId);
          this.pendingKey = null;
        }
      } else {
        this.setBanner("network error; press the same outcome to retry safely", true);
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private onKey(ev: KeyboardEvent): void {
    const match = OUTCOMES.find((o) => o.key === ev.key.toLowerCase());
    if (match) void this.record(match.name);
  }

  private setBanner(text: string, isError = false): void {
    const banner = this.root.querySelector<HTMLElement>("#banner");
    if (banner) {
      banner.textContent = text;
      banner.className = isError ? "banner error" : "banner";
    }
  }

  remainingInCell(): string {
    const cell = this.selectedCell();
    if (!cell) return "";
    return `${cell.done}/${cell.required} trials done, ${Math.max(
      0,
      cell.required - cell.done,
    )} remaining`;
  }

  render(): void {
    const progress = this.progress;
    if (!progress) return;
    const banner = this.root.querySelector("#banner")?.outerHTML ?? '<div id="banner" class="banner"></div>';
    const card = this.selected ? this.cardInfo(this.selected.condition) : null;
    const cell = this.selectedCell();
    const full = !cell || cell.done >= cell.required;

    const grid = progress.cells
      .map((c) => {
        const isSelected =
          this.selected?.model === c.model && this.selected?.condition === c.condition;
        const text = c.attempted || c.done > 0 ? `${c.done}/${c.required}` : "--";
        return `<tr data-model="${c.model}" data-condition="${c.condition}"
            class="cell-row${isSelected ? " selected" : ""}${c.done >= c.required ? " full" : ""}">
          <td>${c.condition}</td><td>${c.model}</td>
          <td class="progress-text">${text}</td></tr>`;
      })
      .join("");

    this.root.innerHTML = `
      <section class="trial-entry" tabindex="0">
        ${banner}
        <div class="summary">campaign <strong>${progress.campaign}</strong>:
          ${progress.total_trials}/${progress.expected_total} trials recorded</div>
        <div class="layout">
          <div class="queue"><table><thead>
            <tr><th>condition</th><th>model</th><th>done</th></tr></thead>
            <tbody>${grid}</tbody></table></div>
          <div class="card-pane">
            ${
              card && this.selected
                ? `<div class="condition-card" id="condition-card">
              <span class="axis-badge" style="background:${categoryColor(card.axis)}">${card.axis}</span>
              <h3 id="card-instruction">${card.instruction}</h3>
              <p class="notes">${card.notes}</p>
              <p class="scene">scene: <code>${card.sceneImage}</code></p>
              <p class="model">model under test: <strong>${this.selected.model}</strong></p>
              <p class="remaining" id="remaining">${this.remainingInCell()}</p>
              <label>steps <input id="steps-input" type="number" min="0"
                max="${progress.max_steps}" value="${Math.floor(progress.max_steps / 2)}"
                ${full ? "disabled" : ""}></label>
              <label>note <input id="note-input" type="text" ${full ? "disabled" : ""}></label>
              <div class="outcomes">${OUTCOMES.map(
                (o) =>
                  `<button data-outcome="${o.name}" ${full ? "disabled" : ""}>${o.label}</button>`,
              ).join("")}</div>
              ${full ? '<p class="full-note">cell quota reached</p>' : ""}
            </div>`
                : '<div class="empty">campaign complete</div>'
            }
          </div>
        </div>
      </section>`;

    this.root.querySelectorAll<HTMLElement>(".cell-row").forEach((row) => {
      row.addEventListener("click", () =>
        this.select(row.dataset.model!, row.dataset.condition!),
      );
    });
    this.root.querySelectorAll<HTMLButtonElement>("button[data-outcome]").forEach((btn) => {
      btn.addEventListener("click", () =>
        this.record(btn.dataset.outcome as OutcomeName),
      );
    });
  }
}
