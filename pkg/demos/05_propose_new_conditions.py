"""Draft new benchmark conditions with the proposer pipeline: build the
per-axis prompt, run the deterministic mock backend, and convert the replies
into conditions that already validate against the requested axis.

Run: python demos/05_propose_new_conditions.py
"""

from stargen.manifest import load_bundled_manifest
from stargen.proposer import (
    MockBackend, ProposalRequest, build_prompt, bundled_fixtures_dir,
    propose_conditions,
)
from stargen.taxonomy import DEFAULT_REGISTRY, validate_condition

manifest = load_bundled_manifest()
base = manifest.base_task("carrot_base")
axis = DEFAULT_REGISTRY.lookup("VSB-NOBJ")

request = ProposalRequest(base_task=base, axis=axis)
prompt = build_prompt(request)
print("prompt sent to the VLM:\n")
print(" ", prompt.text)
print("\nrequired reply fields:", prompt.response_schema["items"]["required"])

backend = MockBackend(fixtures_dir=bundled_fixtures_dir())
drafts, proposals, rejected = propose_conditions(request, backend)

print(f"\n{len(drafts)} draft conditions (all pre-validated, human review "
      f"still required):")
for draft, proposal in zip(drafts, proposals):
    category = validate_condition(base, draft)
    print(f"  {draft.id} [{category.label}]")
    print(f"    image edit : {proposal.visual_change}")
    print(f"    instruction: {proposal.language_change}")
