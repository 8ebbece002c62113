import { beforeEach, describe, expect, it } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { ProposalReviewView } from "../src/proposals.js";
import { proposalFieldsMatchAxis } from "../src/taxonomy.js";
import { FakeServer } from "./fakeApi.js";

function setup() {
  const server = new FakeServer();
  server.proposals = {
    "VSB-NOBJ": [
      { visualChange: "replace the carrot with a zucchini", languageChange: "put zucchini on plate" },
      { visualChange: "replace the carrot with a banana", languageChange: "put banana on plate" },
      { visualChange: "replace the carrot with a pepper", languageChange: "put pepper on plate" },
    ],
    "S-PROP": [
      { languageChange: "put the orange object on the plate" },
      { languageChange: "put the long vegetable on the plate" },
      { languageChange: "put the lightest object on the plate" },
    ],
  };
  document.body.innerHTML = '<div id="root"></div>';
  const root = document.getElementById("root")!;
  const api = new ConsoleApi("", server.fetch);
  return { server, root, api, view: new ProposalReviewView(root, api) };
}

describe("field-presence check", () => {
  it("matches fields to the axis category", () => {
    expect(proposalFieldsMatchAxis("VSB-NOBJ",
      { visualChange: "x", languageChange: "y" })).toBe(true);
    expect(proposalFieldsMatchAxis("VSB-NOBJ",
      { visualChange: "x", languageChange: null })).toBe(false);
    expect(proposalFieldsMatchAxis("S-PROP",
      { visualChange: null, languageChange: "y" })).toBe(true);
    expect(proposalFieldsMatchAxis("S-PROP",
      { visualChange: "x", languageChange: "y" })).toBe(false);
    expect(proposalFieldsMatchAxis("V-OBJ",
      { visualChange: "x", languageChange: null })).toBe(true);
    expect(proposalFieldsMatchAxis("VB-POSE",
      { visualChange: "x", languageChange: null })).toBe(true);
  });
});

describe("proposal review view", () => {
  let ctx: ReturnType<typeof setup>;

  beforeEach(async () => {
    ctx = setup();
    await ctx.view.init();
  });

  it("offers only the five supported axes", () => {
    const options = Array.from(
      ctx.root.querySelectorAll<HTMLOptionElement>("#axis-select option"),
    ).map((o) => o.value);
    expect(options).toEqual(["V-OBJ", "S-PROP", "VB-POSE", "SB-VRB", "VSB-NOBJ"]);
  });

  it("renders three cards with both fields for the new-object axis", async () => {
    ctx.view.axis = "VSB-NOBJ";
    await ctx.view.requestDrafts();
    const cards = ctx.root.querySelectorAll(".proposal-card");
    expect(cards.length).toBe(3);
    cards.forEach((card) => {
      expect(card.querySelector(".visual-change")).toBeTruthy();
      expect(card.querySelector(".language-change")).toBeTruthy();
    });
  });

  it("semantic-only cards carry no image-edit field", async () => {
    ctx.view.axis = "S-PROP";
    await ctx.view.requestDrafts();
    const cards = ctx.root.querySelectorAll(".proposal-card");
    expect(cards.length).toBe(3);
    cards.forEach((card) => {
      expect(card.querySelector(".visual-change")).toBeNull();
      expect(card.querySelector(".language-change")).toBeTruthy();
    });
  });

  it("accept stages the draft server-side; reject discards locally", async () => {
    ctx.view.axis = "VSB-NOBJ";
    await ctx.view.requestDrafts();
    await ctx.view.accept(0);
    ctx.view.reject(1);
    expect(ctx.view.items[0].state).toBe("accepted");
    expect(ctx.view.items[1].state).toBe("rejected");
    expect(ctx.server.draft!.conditions.map((c) => c.id)).toContain(
      "carrot_base_VSB-NOBJ_1",
    );
    expect(ctx.root.querySelector("#staged-list")!.textContent).toContain(
      "carrot_base_VSB-NOBJ_1",
    );
    // the original manifest is untouched until commit
    expect(ctx.server.manifest.conditions.map((c) => c.id)).not.toContain(
      "carrot_base_VSB-NOBJ_1",
    );
  });

  it("accept is disabled when fields do not match the axis category", async () => {
    ctx.server.proposals["VSB-NOBJ"][0] = { languageChange: "missing the image edit" };
    ctx.view.axis = "VSB-NOBJ";
    await ctx.view.requestDrafts();
    const buttons = ctx.root.querySelectorAll<HTMLButtonElement>("button.accept");
    expect(buttons[0].disabled).toBe(true);
    expect(buttons[1].disabled).toBe(false);
  });

  it("commit promotes the staged draft and reports the new size", async () => {
    ctx.view.axis = "VSB-NOBJ";
    await ctx.view.requestDrafts();
    await ctx.view.accept(0);
    await ctx.view.commit();
    expect(ctx.server.committed).toBe(1);
    expect(ctx.server.manifest.conditions.map((c) => c.id)).toContain(
      "carrot_base_VSB-NOBJ_1",
    );
    expect(ctx.root.querySelector("#proposal-status")!.textContent).toContain(
      "committed",
    );
    const commitBtn = ctx.root.querySelector<HTMLButtonElement>("#commit-staged")!;
    expect(commitBtn.disabled).toBe(true); // staged list drained
  });

  it("unsupported axis errors surface in the status line", async () => {
    ctx.view.axis = "V-VIEW";
    await ctx.view.requestDrafts();
    expect(ctx.root.querySelector("#proposal-status")!.textContent).toContain(
      "UnsupportedAxis",
    );
  });
});
