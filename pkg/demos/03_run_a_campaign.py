"""Create a small campaign in a temp directory, record a few trials through
the store (with its advisory lock), and watch the progress grid fill in.

Run: python demos/03_run_a_campaign.py
"""

import tempfile
from pathlib import Path

from stargen import CampaignConfig, CampaignStore, ManifestRef, Outcome, TrialRecord
from stargen.campaign import progress, remaining_cells, utcnow
from stargen.manifest import load_bundled_manifest, manifest_hash

manifest = load_bundled_manifest()

with tempfile.TemporaryDirectory() as tmp:
    store = CampaignStore(Path(tmp))
    config = CampaignConfig(
        id="pilot",
        manifest=ManifestRef(name=manifest.name, hash=manifest_hash(manifest)),
        models=("policy-a", "policy-b"),
        trials_per_condition=2,
    )
    path = store.create(config, manifest)
    state = store.read_state("pilot")
    print(f"created {path.name}: {state.expected_total} trials expected "
          f"({len(state.conditions)} conditions x 2 models x 2 trials)")

    # the interactive queue is condition-major so the physical scene is reset
    # as rarely as possible
    queue = remaining_cells(state)
    print("first cells in the queue:",
          [(c.condition, c.model) for c in queue[:4]])

    with store.writer("pilot") as writer:
        writer.record(TrialRecord(model="policy-a", condition="carrot_base",
                                  outcome=Outcome.SUCCESS, steps=58,
                                  timestamp=utcnow()))
        writer.record(TrialRecord(model="policy-a", condition="carrot_base",
                                  outcome=Outcome.TIMEOUT, steps=100,
                                  timestamp=utcnow(), note="stalled above plate"))
        writer.record(TrialRecord(model="policy-b", condition="carrot_base",
                                  outcome=Outcome.IRRECOVERABLE, steps=23,
                                  timestamp=utcnow(), note="knocked plate off"))

    state = store.read_state("pilot")
    print(f"\nrecorded {state.total_trials} trials; carrot_base row:")
    for cell in progress(state):
        if cell.condition == "carrot_base":
            print(f"  {cell.model}: {cell.render()} "
                  f"({cell.successes} success{'es' if cell.successes != 1 else ''})")
