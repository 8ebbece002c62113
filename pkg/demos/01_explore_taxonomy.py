"""Tour of the taxonomy: modalities, the seven categories, the 22-axis
registry, and base-task-relative categorization.

Run: python demos/01_explore_taxonomy.py
"""

from stargen import (
    BaseTask, BehavioralChange, CATEGORIES, PerturbationDelta, SceneDescriptor,
    SceneObject, VisualChange, axis_lookup, categorize, compose,
    registry_selfcheck,
)

# The seven categories are every non-empty combination of the three policy
# modalities a perturbation can change.
print("categories:", ", ".join(c.label for c in CATEGORIES))

report = registry_selfcheck()
print(f"registry: {report.total} axes,", report.counts())

for axis_id in ("V-SC", "S-PROP", "VB-POSE", "VSB-NOBJ"):
    axis = axis_lookup(axis_id)
    print(f"  {axis.id:10s} {axis.name:24s} [{axis.category.label}] "
          f"e.g. {axis.example_factors[0]}")

# Categorization is relative to a base task: the same new instruction can be
# a pure language change for one task and demand new behavior for another.
scene = SceneDescriptor(
    image="scenes/demo.jpg",
    objects=(SceneObject.make("carrot", {"color": "orange"}),
             SceneObject.make("apple", {"color": "red"})),
)
pick_carrot = BaseTask(id="pick_carrot", instruction="pick up carrot", scene=scene)
pick_apple = BaseTask(id="pick_apple", instruction="pick up apple", scene=scene)

reworded = PerturbationDelta(factor="referencing color",
                             instruction="pick up the orange object")
print("\n'pick up the orange object' against 'pick up carrot':",
      categorize(pick_carrot, reworded).label)

retargeted = PerturbationDelta(
    factor="referencing color",
    instruction="pick up the orange object",
    behavioral=BehavioralChange("the target object changes to the carrot"))
print("'pick up the orange object' against 'pick up apple':  ",
      categorize(pick_apple, retargeted).label)

# Categories compose by set union, so chained atomic perturbations land in
# the category you would expect.
v = categorize(pick_carrot, PerturbationDelta(
    factor="distractors",
    visual=VisualChange("corn added to the sink corner")))
print("\ncomposing V with SB gives:", compose([v, categorize(pick_apple, retargeted)]).label)
