import { beforeEach, describe, expect, it } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { TrialEntryView } from "../src/trialEntry.js";
import { FakeServer } from "./fakeApi.js";

function setup(server = new FakeServer()) {
  document.body.innerHTML = '<div id="root"></div>';
  const root = document.getElementById("root")!;
  const api = new ConsoleApi("", server.fetch);
  const view = new TrialEntryView(root, api, "fake");
  return { server, root, api, view };
}

describe("trial entry view", () => {
  let ctx: ReturnType<typeof setup>;

  beforeEach(async () => {
    ctx = setup();
    await ctx.view.init();
  });

  it("starts on the first incomplete cell with its condition card", () => {
    expect(ctx.view.selected).toEqual({ model: "model-a", condition: "carrot_base" });
    const card = ctx.root.querySelector("#condition-card")!;
    expect(card.querySelector("#card-instruction")!.textContent).toBe(
      "put carrot on plate",
    );
    const badge = card.querySelector(".axis-badge")!;
    expect(badge.textContent).toBe("ID");
  });

  it("shows the perturbed instruction and colored axis badge for a condition", () => {
    ctx.view.select("model-a", "carrot_color");
    const card = ctx.root.querySelector("#condition-card")!;
    expect(card.querySelector("#card-instruction")!.textContent).toBe(
      "put the orange object on the plate",
    );
    const badge = card.querySelector<HTMLElement>(".axis-badge")!;
    expect(badge.textContent).toBe("S-PROP");
    expect(badge.style.background).toBe("#e08a2e"); // orange for S
  });

  it("posts a success and advances the remaining-trials indicator", async () => {
    await ctx.view.record("success");
    expect(ctx.server.campaign.trials).toHaveLength(1);
    expect(ctx.server.campaign.trials[0].outcome).toBe("success");
    expect(ctx.root.querySelector("#remaining")!.textContent).toContain("1/5");
  });

  it("timeout button posts steps equal to the step budget", async () => {
    const button = ctx.root.querySelector<HTMLButtonElement>(
      'button[data-outcome="timeout"]',
    )!;
    button.click();
    await new Promise((resolve) => setTimeout(resolve, 20));
    expect(ctx.server.campaign.trials).toHaveLength(1);
    expect(ctx.server.campaign.trials[0].outcome).toBe("timeout");
    expect(ctx.server.campaign.trials[0].steps).toBe(100);
  });

  it("keyboard shortcuts record outcomes", async () => {
    const section = ctx.root.querySelector<HTMLElement>(".trial-entry")!;
    ctx.root.dispatchEvent(new KeyboardEvent("keydown", { key: "f", bubbles: true }));
    await new Promise((resolve) => setTimeout(resolve, 20));
    expect(ctx.server.campaign.trials.map((t) => t.outcome)).toEqual(["failure"]);
    expect(section).toBeTruthy();
  });

  it("disables outcome buttons once the cell quota is full", async () => {
    for (let i = 0; i < 5; i += 1) {
      await ctx.view.record("success");
    }
    // the view advanced to the next incomplete cell; go back to the full one
    ctx.view.select("model-a", "carrot_base");
    const buttons = ctx.root.querySelectorAll<HTMLButtonElement>("button[data-outcome]");
    expect(buttons.length).toBe(4);
    buttons.forEach((b) => expect(b.disabled).toBe(true));
    expect(ctx.root.textContent).toContain("cell quota reached");
    // a sixth record attempt is a no-op client-side
    await ctx.view.record("success");
    expect(ctx.server.campaign.trials).toHaveLength(5);
  });

  it("advances to the next incomplete cell after filling one", async () => {
    for (let i = 0; i < 5; i += 1) {
      await ctx.view.record("failure");
    }
    expect(ctx.view.selected).toEqual({ model: "model-b", condition: "carrot_base" });
  });

  it("renders API protocol errors as an inline banner without losing context", async () => {
    // fill the cell behind the view's back, then submit into the full cell
    for (let i = 0; i < 5; i += 1) {
      ctx.server.campaign.trials.push({
        model: "model-a",
        condition: "carrot_base",
        outcome: "failure",
        steps: 10,
        seq: i + 2,
      });
    }
    await ctx.view.record("success");
    const banner = ctx.root.querySelector("#banner")!;
    expect(banner.textContent).toContain("QuotaExceeded");
    expect(banner.className).toContain("error");
    expect(ctx.view.selected).toEqual({ model: "model-a", condition: "carrot_base" });
  });

  it("reuses one idempotency key across a retry so nothing double-records", async () => {
    ctx.server.failNextPost = true;
    await ctx.view.record("success"); // network error surfaced as banner
    expect(ctx.root.querySelector("#banner")!.textContent).toContain("retry");
    expect(ctx.server.campaign.trials).toHaveLength(0);
    await ctx.view.record("success"); // retry reuses the pending key
    expect(ctx.server.campaign.trials).toHaveLength(1);
    const key = ctx.server.campaign.trials[0].idempotency_key;
    expect(key).toBeTruthy();
    // a duplicate submission with the same key is acknowledged, not re-recorded
    const dup = await ctx.api.postTrial("fake", {
      model: "model-a",
      condition: "carrot_base",
      outcome: "success",
      steps: 50,
      idempotency_key: key,
    });
    expect(dup.duplicate).toBe(true);
    expect(ctx.server.campaign.trials).toHaveLength(1);
  });

  it("marks never-attempted cells with dashes in the grid", () => {
    const rows = Array.from(ctx.root.querySelectorAll(".cell-row"));
    expect(rows.length).toBe(8); // 4 conditions x 2 models
    rows.forEach((row) => {
      expect(row.querySelector(".progress-text")!.textContent).toBe("--");
    });
  });
});
