"""Replay the bundled campaign logs and rebuild the headline aggregate
numbers from raw trial events.

Run: python demos/04_reproduce_aggregates.py
"""

from importlib import resources

from stargen.aggregate import build_report, export_report
from stargen.campaign import replay
from stargen.manifest import load_bundled_manifest


def bundled(name: str) -> bytes:
    return resources.files("stargen.data").joinpath(name).read_bytes()


manifest = load_bundled_manifest()

main = replay(bundled("main_results.stargen.log"))
report = build_report(main, manifest)
print(f"main results: {main.total_trials} trials over "
      f"{len(main.conditions)} conditions x {len(main.config.models)} models")

print("\nper-axis success rates (pooled over conditions; ID = base tasks):")
for model in report.models:
    cells = report.axis[model]
    row = "  ".join(f"{axis}={cells[axis].k_of_n()}"
                    for axis in report.axis_order if axis in cells)
    print(f"  {model}\n    {row}")

comp = replay(bundled("compositional.stargen.log"))
creport = build_report(comp, manifest)
print(f"\ncompositional: {comp.total_trials} trials, "
      f"{len(creport.group_order)} axis-pair groups")
print(export_report(creport, "markdown", groups=("composition",)).decode())
