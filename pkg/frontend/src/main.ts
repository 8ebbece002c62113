// App bootstrap: campaign picker plus the three views (trial entry,
// aggregates, proposal review) as tabs.

import { apiBaseUrl, ConsoleApi } from "./api.js";
import { AggregatesView } from "./aggregates.js";
import { ProposalReviewView } from "./proposals.js";
import { TrialEntryView } from "./trialEntry.js";

type ViewName = "trials" | "aggregates" | "proposals";

async function boot(): Promise<void> {
  const api = new ConsoleApi(apiBaseUrl());
  const nav = document.getElementById("nav")!;
  const picker = document.getElementById("campaign-picker") as HTMLSelectElement;
  const view = document.getElementById("view")!;

  const campaigns = await api.campaigns();
  picker.innerHTML = campaigns
    .map((c) => `<option value="${c.id}">${c.id} (${c.total_trials}/${c.expected_total})</option>`)
    .join("");

  let current: ViewName = "trials";

  async function show(name: ViewName): Promise<void> {
    current = name;
    nav.querySelectorAll("button").forEach((b) =>
      b.classList.toggle("active", b.dataset.view === name),
    );
    view.innerHTML = "";
    const campaignId = picker.value;
    if (name === "trials") {
      await new TrialEntryView(view, api, campaignId).init();
    } else if (name === "aggregates") {
      await new AggregatesView(view, api, campaignId).init();
    } else {
      await new ProposalReviewView(view, api).init();
    }
  }

  nav.querySelectorAll<HTMLButtonElement>("button").forEach((b) => {
    b.addEventListener("click", () => void show(b.dataset.view as ViewName));
  });
  picker.addEventListener("change", () => void show(current));

  if (campaigns.length) {
    await show("trials");
  } else {
    view.innerHTML = '<div class="empty">no campaigns in this directory</div>';
  }
}

void boot();
