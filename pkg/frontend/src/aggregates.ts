// Aggregate charts: grouped bars per axis and model (in-distribution "ID"
// bar included), with category and composition tabs. Every number comes from
// the aggregates endpoint; hovering a bar shows its k/n tooltip.

import { ChartRecord, ConsoleApi } from "./api.js";
import { categoryColor, CATEGORY_COLORS } from "./taxonomy.js";

const TABS = ["axis", "category", "composition"] as const;
export type AggregateTab = (typeof TABS)[number];

const MODEL_PALETTE = ["#2c6fbb", "#bb5f2c", "#3c9c57", "#8a4fd8", "#b03a5b",
  "#5e5e2c", "#2c8a8a"];

export class AggregatesView {
  tab: AggregateTab = "axis";
  records: ChartRecord[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ConsoleApi,
    private readonly campaignId: string,
  ) {}

  async init(): Promise<void> {
    await this.load();
  }

  async load(): Promise<void> {
    this.records = await this.api.aggregates(this.campaignId, this.tab);
    this.render();
  }

  async setTab(tab: AggregateTab): Promise<void> {
    this.tab = tab;
    await this.load();
  }

  groups(): { key: string; records: ChartRecord[] }[] {
    const order: string[] = [];
    const byKey = new Map<string, ChartRecord[]>();
    for (const record of this.records) {
      if (!byKey.has(record.key)) {
        byKey.set(record.key, []);
        order.push(record.key);
      }
      byKey.get(record.key)!.push(record);
    }
    return order.map((key) => ({ key, records: byKey.get(key)! }));
  }

  private models(): string[] {
    const seen: string[] = [];
    for (const record of this.records) {
      if (!seen.includes(record.model)) seen.push(record.model);
    }
    return seen;
  }

  render(): void {
    const groups = this.groups();
    const models = this.models();
    const tabs = TABS.map(
      (t) =>
        `<button class="tab${t === this.tab ? " active" : ""}" data-tab="${t}">${t}</button>`,
    ).join("");
    const legend = models
      .map(
        (m, i) =>
          `<span class="legend-item"><span class="swatch"
             style="background:${MODEL_PALETTE[i % MODEL_PALETTE.length]}"></span>${m}</span>`,
      )
      .join("");

    const badge = (key: string) => {
      if (this.tab === "category") {
        return `<span class="axis-badge" style="background:${
          CATEGORY_COLORS[key] ?? "#555"}">${key}</span>`;
      }
      if (this.tab === "axis") {
        return `<span class="axis-badge" style="background:${categoryColor(key)}">${key}</span>`;
      }
      return `<span class="axis-badge" style="background:#555">${key}</span>`;
    };

    const bars = groups
      .map(({ key, records }) => {
        const cells = models
          .map((model, i) => {
            const record = records.find((r) => r.model === model);
            if (!record) return `<div class="bar missing" title="--"></div>`;
            const pct = record.total ? (100 * record.successes) / record.total : 0;
            return `<div class="bar" data-model="${model}" data-key="${key}"
               title="${record.successes}/${record.total}">
               <div class="fill" style="height:${pct.toFixed(1)}%;
                 background:${MODEL_PALETTE[i % MODEL_PALETTE.length]}"></div></div>`;
          })
          .join("");
        return `<div class="group" data-key="${key}">
           <div class="bars">${cells}</div>
           <div class="group-label">${badge(key)}</div></div>`;
      })
      .join("");

    this.root.innerHTML = `
      <section class="aggregates">
        <div class="tabs">${tabs}</div>
        <div class="legend">${legend}</div>
        ${
          groups.length
            ? `<div class="chart">${bars}</div>`
            : '<div class="empty" id="chart-empty">no trials recorded yet</div>'
        }
      </section>`;

    this.root.querySelectorAll<HTMLButtonElement>(".tab").forEach((btn) => {
      btn.addEventListener("click", () => void this.setTab(btn.dataset.tab as AggregateTab));
    });
  }
}
