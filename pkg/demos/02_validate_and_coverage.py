"""Parse the bundled benchmark manifest, show its coverage matrix, and diff
it against encoded prior-work rows.

Run: python demos/02_validate_and_coverage.py
"""

from stargen.manifest import (
    coverage_matrix, diff_coverage, load_bundled_manifest,
    load_reference_coverage, render_coverage_table,
)

manifest = load_bundled_manifest()
print(f"manifest {manifest.name!r}: {len(manifest.base_tasks)} base tasks, "
      f"{len(manifest.conditions)} conditions, "
      f"{len(manifest.compositions)} compositions")

cov = coverage_matrix(manifest)
print(cov.summary())
print()

references = load_reference_coverage()
print(render_coverage_table([cov, references["OpenVLA"], references["BridgeV2"]]))

diff = diff_coverage(cov, references["OpenVLA"])
print("vs OpenVLA evaluations —")
print("  adds: ", ", ".join(diff.added))
print("  drops:", ", ".join(diff.removed))
