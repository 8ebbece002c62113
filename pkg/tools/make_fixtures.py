#!/usr/bin/env python3
"""Regenerate the bundled data fixtures.

Builds the benchmark manifest, the three campaign logs (main results,
carrot/knife ablations, compositional), the reference coverage rows, the mock
proposal fixtures, and the per-cell count table the tests use as an
independent summation oracle. Deterministic: running twice produces
byte-identical outputs.

Usage: python tools/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from datetime import timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from stargen.campaign import (  # noqa: E402
    CampaignConfig, ManifestRef, Outcome, TrialRecord, apply_trial,
    creation_event, parse_timestamp, replay_events, scope_conditions,
    trial_event,
)
from stargen.canonical import canonical_bytes  # noqa: E402
from stargen.manifest import (  # noqa: E402
    BenchmarkManifest, manifest_hash, serialize_manifest, validate_manifest,
)
from stargen.taxonomy import (  # noqa: E402
    BaseTask, BehavioralChange, CompositeCondition, Condition,
    PerturbationDelta, SceneDescriptor, SceneObject, VisualChange,
)

DATA_DIR = ROOT / "src" / "stargen" / "data"
TESTS_DATA_DIR = ROOT / "tests" / "data"

MODELS7 = (
    "openvla-oxe",
    "openvla-oxe-ft",
    "openvla-bridge-ft",
    "openvla-bridge-vqa-ft",
    "minivla-bridge-ft",
    "minivla-bridge-novq-ft",
    "pi0-bridge-ft",
)
MAIN3 = ("openvla-bridge-ft", "minivla-bridge-ft", "pi0-bridge-ft")

BASE_TIME = "2025-03-01T09:00:00Z"


# --- the benchmark manifest -------------------------------------------------------

def _visual(desc: str) -> VisualChange:
    return VisualChange(desc)


def _behavioral(desc: str) -> BehavioralChange:
    return BehavioralChange(desc)


def build_manifest() -> BenchmarkManifest:
    carrot_knife_scene = SceneDescriptor(
        image="scenes/carrot-knife/base.jpg",
        objects=(
            SceneObject.make("carrot", {"color": "orange", "location": "on the counter"}),
            SceneObject.make("knife", {"color": "gray and green", "location": "in the sink"}),
            SceneObject.make("plate", {"location": "on the counter"}),
        ),
    )
    pot_plate_scene = SceneDescriptor(
        image="scenes/pot-plate/base.jpg",
        objects=(
            SceneObject.make("pot", {"color": "gray", "location": "in the sink, upside down"}),
            SceneObject.make("plate", {"color": "pink", "location": "in the drying rack"}),
        ),
    )

    base_tasks = (
        BaseTask(
            id="carrot_base",
            instruction="put carrot on plate",
            scene=carrot_knife_scene,
            behavior_signature="grasp the carrot from the counter, lift it, and place it on the plate",
            success_criterion=(
                "the carrot rests on top of the plate in a stable configuration, "
                "the robot is not grasping it, and the plate has not been knocked "
                "from its initial position"
            ),
            demo_count=10,
        ),
        BaseTask(
            id="knife_base",
            instruction="put knife on plate",
            scene=carrot_knife_scene,
            behavior_signature="grasp the knife from the sink, lift it, and place it on the plate",
            success_criterion=(
                "the knife rests on top of the plate in a stable configuration, "
                "the robot is not grasping it, and the plate has not been knocked "
                "from its initial position"
            ),
            demo_count=10,
        ),
        BaseTask(
            id="pot_base",
            instruction="flip pot upright which is in sink",
            scene=pot_plate_scene,
            behavior_signature="grasp the pot in the sink and rotate it upright so its base rests on the sink bottom",
            success_criterion=(
                "the base of the pot makes contact with the base of the sink, the "
                "pot is in a stable configuration, and the robot is not grasping it"
            ),
            demo_count=50,
        ),
        BaseTask(
            id="plate_base",
            instruction="put plate in sink",
            scene=pot_plate_scene,
            behavior_signature="grasp the plate from the drying rack, lift it, and place it in the sink",
            success_criterion=(
                "the plate rests in the sink in a stable configuration and the "
                "robot is not grasping it"
            ),
            demo_count=50,
        ),
    )

    def cond(cid, base, axis, *, factor, notes, visual=None, instruction=None,
             behavioral=None, scene_group="carrot-knife"):
        return Condition(
            id=cid, base_task=base, axis=axis,
            delta=PerturbationDelta(
                factor=factor,
                visual=_visual(visual) if visual else None,
                instruction=instruction,
                behavioral=_behavioral(behavioral) if behavioral else None,
            ),
            notes=notes,
            scene_image=f"scenes/{scene_group}/{cid}.jpg",
        )

    conditions = (
        # --- carrot / knife ---
        cond("carrot_color", "carrot_base", "S-PROP", factor="referencing color",
             instruction="put the orange object on the plate",
             notes="refers to carrot by color"),
        cond("knife_color", "knife_base", "S-PROP", factor="referencing color",
             instruction="put the gray and green object on the plate",
             notes="refers to knife by color"),
        cond("carrot_lift_place", "carrot_base", "S-LANG", factor="changing verbs",
             instruction="lift carrot and place on plate",
             notes='replaced verb "put" using "lift" and "place"'),
        cond("knife_lift_place", "knife_base", "S-LANG", factor="changing verbs",
             instruction="lift knife and place on plate",
             notes='replaced verb "put" using "lift" and "place"'),
        cond("carrot_counter", "carrot_base", "S-MO", factor='understanding "on"',
             instruction="put the object that is on the counter on the plate",
             notes="refers to carrot by location (on counter)"),
        cond("knife_sink", "knife_base", "S-MO", factor='understanding "in"',
             instruction="put the object that is in the sink on the plate",
             notes="refers to knife by location (in sink)"),
        cond("carrot_basketball", "carrot_base", "S-INT",
             factor="common object properties",
             instruction="put the object that is the same color as a basketball on the plate",
             notes="refers to carrot by color of a basketball (orange)"),
        cond("knife_typo", "knife_base", "S-INT", factor="typos",
             instruction="put knif on plate",
             notes='"knife" misspelled as "knif"'),
        cond("carrot_in_sink", "carrot_base", "SB-SMO", factor='understanding "in"',
             instruction="put carrot in sink",
             behavioral="place the carrot in the sink instead of on the plate",
             notes="goal for carrot is sink instead of plate"),
        cond("rotate_knife", "knife_base", "SB-VRB", factor="new action on object",
             instruction="rotate knife clockwise",
             behavioral="rotate the knife in place instead of picking and placing it",
             notes="rotate knife instead of put on plate"),
        cond("carrot_distractors", "carrot_base", "V-SC", factor="distractors",
             visual="distractor objects (corn, salt shaker) added to the scene",
             notes="distractor objects (corn, salt shaker)"),
        cond("knife_distractors", "knife_base", "V-SC", factor="distractors",
             visual="distractor objects (corn, salt shaker) added to the scene",
             notes="distractor objects (corn, salt shaker)"),
        cond("carrot_red_sink", "carrot_base", "V-SC", factor="surface color",
             visual="sink recolored red", notes="red sink"),
        cond("knife_red_sink", "knife_base", "V-SC", factor="surface color",
             visual="sink recolored red", notes="red sink"),
        cond("carrot_orange_plate", "carrot_base", "V-OBJ", factor="other object color",
             visual="plate replaced with an orange plate", notes="orange plate"),
        cond("knife_orange_plate", "knife_base", "V-OBJ", factor="other object color",
             visual="plate replaced with an orange plate", notes="orange plate"),
        cond("carrot_camera", "carrot_base", "V-VIEW", factor="camera pose",
             visual="camera moved to a new viewpoint", notes="new camera view"),
        cond("knife_camera", "knife_base", "V-VIEW", factor="camera pose",
             visual="camera moved to a new viewpoint", notes="new camera view"),
        cond("carrot_farther", "carrot_base", "VB-POSE", factor="manipulated object pose",
             visual="carrot placed slightly farther from the robot",
             behavioral="reach farther to grasp the carrot",
             notes="carrot slightly farther from robot"),
        cond("carrot_start_sink", "carrot_base", "VB-POSE", factor="manipulated object pose",
             visual="carrot starts in the sink, oriented vertically",
             behavioral="pick the carrot out of the sink",
             notes="carrot start in sink, oriented vertically"),
        cond("knife_raised", "knife_base", "VB-POSE", factor="manipulated object pose",
             visual="knife raised by placing it on a block",
             behavioral="grasp the knife at the raised height",
             notes="knife raised by placing it on a block"),
        cond("knife_right", "knife_base", "VB-POSE", factor="manipulated object pose",
             visual="knife moved to the right",
             behavioral="reach to the right to grasp the knife",
             notes="knife moved to the right"),
        cond("carrot_shorter_table", "carrot_base", "VB-ISC", factor="surface height",
             visual="sink table lowered relative to the robot",
             behavioral="reach lower to grasp and place",
             notes="shorter sink table"),
        cond("knife_shorter_table", "knife_base", "VB-ISC", factor="surface height",
             visual="sink table lowered relative to the robot",
             behavioral="reach lower to grasp and place",
             notes="shorter sink table"),
        cond("baby_carrot", "carrot_base", "VB-MOBJ", factor="manipulated object size",
             visual="carrot replaced with a real baby carrot",
             behavioral="grasp a much smaller carrot",
             notes="real baby carrot"),
        cond("small_knife", "knife_base", "VB-MOBJ", factor="manipulated object size",
             visual="knife replaced with a smaller knife",
             behavioral="grasp a smaller knife",
             notes="smaller knife"),
        cond("ball", "carrot_base", "VSB-NOBJ", factor="new manipulated object",
             visual="carrot replaced with a ball",
             instruction="put ball on plate",
             behavioral="grasp and place a ball instead of a carrot",
             notes="carrot replaced with ball"),
        cond("pizza", "knife_base", "VSB-NOBJ", factor="new manipulated object",
             visual="knife replaced with a toy pizza slice",
             instruction="put pizza on plate",
             behavioral="grasp and place a pizza slice instead of a knife",
             notes="knife replaced with pizza"),
        # --- pot / plate ---
        cond("pot_color", "pot_base", "S-PROP", factor="referencing color",
             instruction="flip the gray object upright which is in sink",
             notes="refers to pot by color", scene_group="pot-plate"),
        cond("plate_color", "plate_base", "S-PROP", factor="referencing color",
             instruction="put the pink object in the sink",
             notes="refers to plate by color", scene_group="pot-plate"),
        cond("pot_lift_place", "pot_base", "S-LANG", factor="changing verbs",
             instruction="lift pot upright and place in sink",
             notes='replaced verb "flip" using "lift" and "place"',
             scene_group="pot-plate"),
        cond("plate_lift_place", "plate_base", "S-LANG", factor="changing verbs",
             instruction="lift plate and place in sink",
             notes='replaced verb "put" using "lift" and "place"',
             scene_group="pot-plate"),
        cond("pot_sink", "pot_base", "S-MO", factor='understanding "in"',
             instruction="flip the object that is in the sink upright",
             notes="refers to pot by location (in sink)", scene_group="pot-plate"),
        cond("plate_drying_rack", "plate_base", "S-MO", factor='understanding "in"',
             instruction="put the object that is in the drying rack in the sink",
             notes="refers to plate by location (in drying rack)",
             scene_group="pot-plate"),
        cond("pot_boiling", "pot_base", "S-INT", factor="common object properties",
             instruction="flip the object that can be used for boiling water upright",
             notes="refers to pot by ability to boil water", scene_group="pot-plate"),
        cond("plate_typo", "plate_base", "S-INT", factor="typos",
             instruction="put plait in sink",
             notes='"plate" misspelled as "plait"', scene_group="pot-plate"),
        cond("plate_to_counter", "plate_base", "SB-SMO", factor='understanding "on"',
             instruction="put plate on counter",
             behavioral="place the plate on the counter instead of in the sink",
             notes="goal for plate is counter instead of sink",
             scene_group="pot-plate"),
        cond("pot_to_left", "pot_base", "SB-VRB", factor="new action on object",
             instruction="move pot to the left side of the sink",
             behavioral="slide the pot left instead of flipping it upright",
             notes="move pot left instead of flip upright", scene_group="pot-plate"),
        cond("pot_distractors", "pot_base", "V-SC", factor="distractors",
             visual="distractor objects (eggplant, fork, cheese) added to the scene",
             notes="distractor objects (eggplant, fork, cheese)",
             scene_group="pot-plate"),
        cond("plate_distractors", "plate_base", "V-SC", factor="distractors",
             visual="distractor objects (eggplant, fork, cheese) added to the scene",
             notes="distractor objects (eggplant, fork, cheese)",
             scene_group="pot-plate"),
        cond("pot_green_sink", "pot_base", "V-SC", factor="surface color",
             visual="sink recolored green", notes="green sink",
             scene_group="pot-plate"),
        cond("plate_green_sink", "plate_base", "V-SC", factor="surface color",
             visual="sink recolored green", notes="green sink",
             scene_group="pot-plate"),
        cond("gray_plate", "plate_base", "V-OBJ", factor="manipulated object color",
             visual="plate replaced with a gray plate", notes="gray plate",
             scene_group="pot-plate"),
        cond("pot_camera", "pot_base", "V-VIEW", factor="camera pose",
             visual="camera moved to a new viewpoint", notes="new camera view",
             scene_group="pot-plate"),
        cond("plate_camera", "plate_base", "V-VIEW", factor="camera pose",
             visual="camera moved to a new viewpoint", notes="new camera view",
             scene_group="pot-plate"),
        cond("pot_left", "pot_base", "VB-POSE", factor="manipulated object pose",
             visual="pot moved to the left",
             behavioral="reach left to grasp the pot",
             notes="pot moved to left", scene_group="pot-plate"),
        cond("pot_angled", "pot_base", "VB-POSE", factor="manipulated object pose",
             visual="pot rotated and angled to the right",
             behavioral="adjust the grasp for the angled pot",
             notes="pot rotated and angled to the right", scene_group="pot-plate"),
        cond("plate_closer", "plate_base", "VB-POSE", factor="manipulated object pose",
             visual="plate slightly closer to the robot",
             behavioral="reach closer to grasp the plate",
             notes="plate slightly closer to robot", scene_group="pot-plate"),
        cond("plate_counter", "plate_base", "VB-POSE", factor="manipulated object pose",
             visual="plate lying flat on the counter",
             behavioral="pick the plate up from the counter surface",
             notes="plate flat on counter", scene_group="pot-plate"),
        cond("pot_shorter_table", "pot_base", "VB-ISC", factor="surface height",
             visual="sink table lowered relative to the robot",
             behavioral="reach lower to manipulate in the sink",
             notes="shorter sink table", scene_group="pot-plate"),
        cond("plate_shorter_table", "plate_base", "VB-ISC", factor="surface height",
             visual="sink table lowered relative to the robot",
             behavioral="reach lower to grasp and place",
             notes="shorter sink table", scene_group="pot-plate"),
        cond("thin_pot", "pot_base", "VB-MOBJ", factor="manipulated object shape",
             visual="pot replaced with a thinner and taller metal pot",
             behavioral="grasp and flip a taller, narrower pot",
             notes="thinner and taller metal pot", scene_group="pot-plate"),
        cond("red_bowl", "plate_base", "VB-MOBJ", factor="manipulated object shape",
             visual="plate replaced with a red bowl",
             behavioral="grasp a bowl instead of a flat plate",
             notes="plate replaced with red bowl", scene_group="pot-plate"),
        cond("cup", "pot_base", "VSB-NOBJ", factor="new manipulated object",
             visual="pot replaced with a cup",
             instruction="flip cup upright which is in sink",
             behavioral="flip a cup instead of a pot",
             notes="pot replaced with cup", scene_group="pot-plate"),
        cond("spoon", "plate_base", "VSB-NOBJ", factor="new manipulated object",
             visual="plate replaced with a spoon",
             instruction="put spoon in sink",
             behavioral="grasp and place a spoon instead of a plate",
             notes="plate replaced with spoon", scene_group="pot-plate"),
    )

    compositions = (
        CompositeCondition(
            id="carrot_color_lift_place",
            base_task="carrot_base",
            parts=(
                ("S-PROP", PerturbationDelta(
                    factor="referencing color",
                    instruction="put the orange object on the plate")),
                ("S-LANG", PerturbationDelta(
                    factor="changing verbs",
                    instruction="lift carrot and place on plate")),
            ),
            effective_instruction="lift the orange object and place on plate",
            notes='refers to carrot by color and replaced verb "put" using "lift" and "place"',
            scene_image="scenes/carrot-knife/base.jpg",
        ),
        CompositeCondition(
            id="knife_color_lift_place",
            base_task="knife_base",
            parts=(
                ("S-PROP", PerturbationDelta(
                    factor="referencing color",
                    instruction="put the gray and green object on the plate")),
                ("S-LANG", PerturbationDelta(
                    factor="changing verbs",
                    instruction="lift knife and place on plate")),
            ),
            effective_instruction="lift the gray and green object and place on plate",
            notes='refers to knife by color and replaced verb "put" using "lift" and "place"',
            scene_image="scenes/carrot-knife/base.jpg",
        ),
        CompositeCondition(
            id="carrot_distractors_orange_plate",
            base_task="carrot_base",
            parts=(
                ("V-SC", PerturbationDelta(
                    factor="distractors",
                    visual=_visual("distractor objects (corn, salt shaker) added to the scene"))),
                ("V-OBJ", PerturbationDelta(
                    factor="other object color",
                    visual=_visual("plate replaced with an orange plate"))),
            ),
            notes="distractor objects (corn, salt shaker) and orange plate",
            scene_image="scenes/carrot-knife/carrot_distractors_orange_plate.jpg",
        ),
        CompositeCondition(
            id="knife_distractors_orange_plate",
            base_task="knife_base",
            parts=(
                ("V-SC", PerturbationDelta(
                    factor="distractors",
                    visual=_visual("distractor objects (corn, salt shaker) added to the scene"))),
                ("V-OBJ", PerturbationDelta(
                    factor="other object color",
                    visual=_visual("plate replaced with an orange plate"))),
            ),
            notes="distractor objects (corn, salt shaker) and orange plate",
            scene_image="scenes/carrot-knife/knife_distractors_orange_plate.jpg",
        ),
        CompositeCondition(
            id="carrot_farther_shorter_table",
            base_task="carrot_base",
            parts=(
                ("VB-POSE", PerturbationDelta(
                    factor="manipulated object pose",
                    visual=_visual("carrot placed slightly farther from the robot"),
                    behavioral=_behavioral("reach farther to grasp the carrot"))),
                ("VB-ISC", PerturbationDelta(
                    factor="surface height",
                    visual=_visual("sink table lowered relative to the robot"),
                    behavioral=_behavioral("reach lower to grasp and place"))),
            ),
            notes="carrot slightly farther from robot and shorter sink table",
            scene_image="scenes/carrot-knife/carrot_farther_shorter_table.jpg",
        ),
        CompositeCondition(
            id="knife_right_shorter_table",
            base_task="knife_base",
            parts=(
                ("VB-POSE", PerturbationDelta(
                    factor="manipulated object pose",
                    visual=_visual("knife moved to the right"),
                    behavioral=_behavioral("reach to the right to grasp the knife"))),
                ("VB-ISC", PerturbationDelta(
                    factor="surface height",
                    visual=_visual("sink table lowered relative to the robot"),
                    behavioral=_behavioral("reach lower to grasp and place"))),
            ),
            notes="knife moved to right and shorter sink table",
            scene_image="scenes/carrot-knife/knife_right_shorter_table.jpg",
        ),
    )

    return BenchmarkManifest(
        name="bridgev2-star",
        base_tasks=base_tasks,
        conditions=conditions,
        compositions=compositions,
    )


# --- per-cell success counts for the bundled campaign logs -------------------------

# (condition id, axis or "ID", per-model successes out of 5; None = never evaluated)
CARROT_KNIFE_ROWS = (
    ("carrot_base", "ID", (3, 5, 3, 4, 5, 4, 4)),
    ("knife_base", "ID", (2, 3, 5, 5, 5, 4, 5)),
    ("carrot_color", "S-PROP", (2, 4, 4, 2, 2, 2, 2)),
    ("knife_color", "S-PROP", (2, 3, 0, 0, 0, 0, 0)),
    ("carrot_lift_place", "S-LANG", (3, 5, 2, 4, 5, 3, 5)),
    ("knife_lift_place", "S-LANG", (2, 4, 4, 3, 4, 1, 5)),
    ("carrot_counter", "S-MO", (0, 0, 0, 0, 0, 0, 0)),
    ("knife_sink", "S-MO", (1, 2, 1, 3, 0, 0, 3)),
    ("carrot_basketball", "S-INT", (0, 0, 0, 1, 0, 0, 0)),
    ("knife_typo", "S-INT", (1, 4, 4, 4, 1, 1, 4)),
    ("carrot_in_sink", "SB-SMO", (None, None, 5, None, 5, None, 3)),
    ("rotate_knife", "SB-VRB", (None, None, 1, None, 0, None, 0)),
    ("carrot_distractors", "V-SC", (3, 5, 3, 3, 3, 2, 4)),
    ("knife_distractors", "V-SC", (1, 3, 2, 3, 5, 3, 4)),
    ("carrot_red_sink", "V-SC", (3, 3, 1, 3, 3, 1, 5)),
    ("knife_red_sink", "V-SC", (1, 3, 2, 2, 3, 4, 2)),
    ("carrot_orange_plate", "V-OBJ", (2, 3, 2, 3, 4, 0, 3)),
    ("knife_orange_plate", "V-OBJ", (4, 4, 2, 4, 5, 5, 5)),
    ("carrot_camera", "V-VIEW", (0, 0, 0, 0, 1, 0, 0)),
    ("knife_camera", "V-VIEW", (0, 0, 0, 0, 1, 0, 5)),
    ("carrot_farther", "VB-POSE", (2, 3, 2, 4, 3, 3, 2)),
    ("carrot_start_sink", "VB-POSE", (3, 3, 3, 2, 5, 3, 5)),
    ("knife_raised", "VB-POSE", (0, 2, 3, 4, 4, 3, 1)),
    ("knife_right", "VB-POSE", (2, 3, 3, 5, 4, 2, 5)),
    ("carrot_shorter_table", "VB-ISC", (2, 5, 2, 4, 3, 4, 5)),
    ("knife_shorter_table", "VB-ISC", (0, 3, 3, 3, 2, 2, 5)),
    ("baby_carrot", "VB-MOBJ", (0, 0, 0, 0, 1, 0, 1)),
    ("small_knife", "VB-MOBJ", (0, 0, 1, 0, 0, 0, 0)),
    ("ball", "VSB-NOBJ", (None, None, 0, None, 3, None, 1)),
    ("pizza", "VSB-NOBJ", (None, None, 1, None, 0, None, 0)),
)

# pot/plate rows were evaluated for the three main models only
POT_PLATE_ROWS = (
    ("pot_base", "ID", (3, 5, 5)),
    ("plate_base", "ID", (3, 4, 4)),
    ("pot_color", "S-PROP", (4, 1, 1)),
    ("plate_color", "S-PROP", (0, 0, 0)),
    ("pot_lift_place", "S-LANG", (0, 2, 1)),
    ("plate_lift_place", "S-LANG", (0, 0, 0)),
    ("pot_sink", "S-MO", (1, 1, 5)),
    ("plate_drying_rack", "S-MO", (0, 0, 0)),
    ("pot_boiling", "S-INT", (0, 0, 0)),
    ("plate_typo", "S-INT", (0, 0, 0)),
    ("plate_to_counter", "SB-SMO", (0, 0, 0)),
    ("pot_to_left", "SB-VRB", (0, 2, 0)),
    ("pot_distractors", "V-SC", (3, 4, 5)),
    ("plate_distractors", "V-SC", (3, 1, 0)),
    ("pot_green_sink", "V-SC", (3, 3, 4)),
    ("plate_green_sink", "V-SC", (2, 1, 3)),
    ("gray_plate", "V-OBJ", (4, 3, 3)),
    ("pot_camera", "V-VIEW", (0, 1, 0)),
    ("plate_camera", "V-VIEW", (0, 0, 0)),
    ("pot_left", "VB-POSE", (3, 0, 0)),
    ("pot_angled", "VB-POSE", (3, 3, 5)),
    ("plate_closer", "VB-POSE", (0, 3, 4)),
    ("plate_counter", "VB-POSE", (2, 0, 0)),
    ("pot_shorter_table", "VB-ISC", (5, 2, 5)),
    ("plate_shorter_table", "VB-ISC", (3, 0, 2)),
    ("thin_pot", "VB-MOBJ", (3, 0, 1)),
    ("red_bowl", "VB-MOBJ", (0, 2, 5)),
    ("cup", "VSB-NOBJ", (3, 0, 3)),
    ("spoon", "VSB-NOBJ", (0, 0, 0)),
)

COMPOSITIONAL_ROWS = (
    ("carrot_color_lift_place", ("S-PROP", "S-LANG"), (3, 4, 4, 0, 4, 2, 1)),
    ("knife_color_lift_place", ("S-PROP", "S-LANG"), (3, 4, 0, 0, 0, 0, 0)),
    ("carrot_distractors_orange_plate", ("V-SC", "V-OBJ"), (1, 4, 2, 3, 3, 0, 3)),
    ("knife_distractors_orange_plate", ("V-SC", "V-OBJ"), (2, 2, 3, 3, 5, 5, 4)),
    ("carrot_farther_shorter_table", ("VB-POSE", "VB-ISC"), (3, 3, 3, 3, 2, 3, 3)),
    ("knife_right_shorter_table", ("VB-POSE", "VB-ISC"), (2, 3, 0, 4, 3, 3, 5)),
)


def counts_table() -> dict:
    conditions = []
    for cid, axis, row in CARROT_KNIFE_ROWS:
        counts = {m: k for m, k in zip(MODELS7, row) if k is not None}
        conditions.append({"id": cid, "axis": axis, "counts": counts})
    for cid, axis, row in POT_PLATE_ROWS:
        conditions.append({"id": cid, "axis": axis,
                           "counts": dict(zip(MAIN3, row))})
    compositions = [
        {"id": cid, "axes": list(axes), "counts": dict(zip(MODELS7, row))}
        for cid, axes, row in COMPOSITIONAL_ROWS
    ]
    return {
        "models": list(MODELS7),
        "main_models": list(MAIN3),
        "trials_per_condition": 5,
        "conditions": conditions,
        "compositions": compositions,
    }


# --- reference coverage rows (prior benchmarks and evaluations) ---------------------

COVERAGE_ROWS = (
    ("FactorWorld", "simulation",
     ("V-AUG", "V-SC", "V-OBJ", "V-VIEW", "VB-POSE", "VB-ISC", "VB-MOBJ")),
    ("KitchenShift", "simulation",
     ("V-AUG", "V-OBJ", "V-VIEW", "VB-POSE", "VB-MOBJ", "VB-ROB")),
    ("Colosseum", "simulation",
     ("V-AUG", "V-SC", "V-OBJ", "V-VIEW", "B-HOBJ", "VB-MOBJ")),
    ("Eff-Comp", "simulation", ("V-SC", "V-VIEW", "VB-POSE")),
    ("CALVIN", "simulation",
     ("V-SC", "V-OBJ", "S-PROP", "S-LANG", "VB-POSE", "VB-ISC", "VB-MOBJ")),
    ("VLABench", "simulation",
     ("S-PROP", "S-LANG", "S-MO", "S-AFF", "S-INT", "SB-SMO", "VSB-NOBJ")),
    ("Scaling", "real-data", ("V-OBJ", "VB-POSE", "VB-ISC", "VB-MOBJ")),
    ("BridgeV2", "real-data",
     ("V-AUG", "V-SC", "V-OBJ", "B-HOBJ", "VB-POSE", "VB-ISC", "VB-MOBJ",
      "VB-ROB", "VSB-NOBJ")),
    ("DROID", "real-data", ("V-SC", "V-OBJ", "V-VIEW", "VB-MOBJ", "VB-ROB")),
    ("BC-Z", "policy", ("V-SC", "VB-POSE", "VB-MOBJ", "VB-ROB", "VSB-NOBJ")),
    ("RT-Series", "policy",
     ("V-SC", "S-PROP", "S-MO", "S-INT", "VB-POSE", "VB-ISC", "VB-MOBJ",
      "VB-ROB", "SB-SMO", "VSB-NOBJ")),
    ("MT-ACT", "policy",
     ("V-AUG", "V-SC", "VB-POSE", "VB-ISC", "VB-MOBJ", "VB-ROB", "VSB-NOBJ")),
    ("Pi0", "policy",
     ("V-SC", "V-OBJ", "VB-POSE", "VB-ISC", "VB-MOBJ", "VB-ROB", "VSB-NOBJ")),
    ("OpenVLA", "policy",
     ("V-SC", "S-PROP", "S-LANG", "S-MO", "S-INT", "VB-POSE", "VB-MOBJ",
      "VB-ROB", "SB-NOUN", "VSB-NOBJ")),
)


# --- mock proposal fixtures ----------------------------------------------------------

PROPOSAL_FIXTURES = {
    "V-OBJ__carrot_base.json": [
        {"visualChange": "Recolor the plate to a bright orange while keeping its "
                         "position and shape unchanged."},
        {"visualChange": "Change the carrot to a deep purple heirloom color, "
                         "keeping its size, shape, and position the same."},
        {"visualChange": "Recolor the plate to a matte black, leaving everything "
                         "else in the scene untouched."},
    ],
    "S-PROP__carrot_base.json": [
        {"languageChange": "put the orange object on the plate"},
        {"languageChange": "put the long thin vegetable on the plate"},
        {"languageChange": "put the lightest object on the plate"},
    ],
    "VB-POSE__carrot_base.json": [
        {"visualChange": "Move the carrot farther from the robot, near the back "
                         "edge of the counter."},
        {"visualChange": "Rotate the carrot 90 degrees so it points toward the sink."},
        {"visualChange": "Move the plate to the far left side of the counter."},
    ],
    "SB-VRB__carrot_base.json": [
        {"languageChange": "rotate carrot clockwise"},
        {"languageChange": "push the carrot to the left side of the counter"},
        {"languageChange": "flip the carrot over"},
    ],
    "VSB-NOBJ__carrot_base.json": [
        {"visualChange": "Replace the carrot with a zucchini of similar size in "
                         "the same spot on the counter.",
         "languageChange": "put zucchini on plate"},
        {"visualChange": "Replace the carrot with a red bell pepper resting in "
                         "the same position.",
         "languageChange": "put bell pepper on plate"},
        {"visualChange": "Replace the carrot with a banana lying in the same "
                         "place on the counter.",
         "languageChange": "put banana on plate"},
    ],
}


# --- log synthesis ---------------------------------------------------------------------

# deterministic outcome pattern for unsuccessful trials, by trial index
FAIL_PATTERN = (("failure", 83), ("timeout", None), ("irrecoverable", 29),
                ("failure", 97), ("timeout", None))


def synthesize_log(config: CampaignConfig, manifest: BenchmarkManifest,
                   counts: dict[str, dict[str, int]]) -> bytes:
    """One creation event plus 5 trials per counted (condition, model) cell,
    in condition-major, model-minor order."""
    conditions = scope_conditions(manifest, config.scope)
    events = [creation_event(config, conditions)]
    state = replay_events(tuple(events))
    t0 = parse_timestamp(BASE_TIME)
    for cid, _ in conditions:
        cell_counts = counts.get(cid, {})
        for model in config.models:
            k_success = cell_counts.get(model)
            if k_success is None:
                continue
            for t in range(config.trials_per_condition):
                if t < k_success:
                    outcome, steps = Outcome.SUCCESS, 41 + 3 * t
                else:
                    name, steps = FAIL_PATTERN[t % len(FAIL_PATTERN)]
                    outcome = Outcome(name)
                    steps = config.max_steps if steps is None else steps
                trial = TrialRecord(
                    model=model, condition=cid, outcome=outcome, steps=steps,
                    timestamp=t0 + timedelta(seconds=45 * state.next_seq),
                )
                stored = apply_trial(state, trial)
                events.append(trial_event(state.next_seq - 1, stored))
    return "".join(
        json.dumps(e, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
        for e in events
    ).encode("utf-8")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    (DATA_DIR / "proposals").mkdir(exist_ok=True)
    TESTS_DATA_DIR.mkdir(parents=True, exist_ok=True)

    manifest = build_manifest()
    issues = validate_manifest(manifest)
    if issues:
        raise SystemExit("manifest invalid:\n" + "\n".join(i.describe() for i in issues))
    (DATA_DIR / "bridgev2-star.stargen.json").write_bytes(serialize_manifest(manifest))
    mhash = manifest_hash(manifest)
    ref = ManifestRef(name=manifest.name, hash=mhash)

    table = counts_table()
    (TESTS_DATA_DIR / "table_counts.json").write_bytes(canonical_bytes(table))

    cond_counts = {row["id"]: row["counts"] for row in table["conditions"]}
    comp_counts = {row["id"]: row["counts"] for row in table["compositions"]}
    carrot_knife_ids = {cid for cid, _, _ in CARROT_KNIFE_ROWS}

    main_cfg = CampaignConfig(id="main_results", manifest=ref, models=MAIN3)
    main_counts = {
        cid: {m: k for m, k in row.items() if m in MAIN3}
        for cid, row in cond_counts.items()
    }
    (DATA_DIR / "main_results.stargen.log").write_bytes(
        synthesize_log(main_cfg, manifest, main_counts))

    ablation_cfg = CampaignConfig(id="carrot_knife_ablations", manifest=ref,
                                  models=MODELS7)
    ablation_counts = {cid: row for cid, row in cond_counts.items()
                       if cid in carrot_knife_ids}
    (DATA_DIR / "carrot_knife_ablations.stargen.log").write_bytes(
        synthesize_log(ablation_cfg, manifest, ablation_counts))

    comp_cfg = CampaignConfig(id="compositional", manifest=ref, models=MODELS7,
                              scope="compositions")
    (DATA_DIR / "compositional.stargen.log").write_bytes(
        synthesize_log(comp_cfg, manifest, comp_counts))

    (DATA_DIR / "coverage_rows.json").write_bytes(canonical_bytes({
        "rows": [{"name": name, "kind": kind, "axes": list(axes)}
                 for name, kind, axes in COVERAGE_ROWS],
    }))

    for filename, items in PROPOSAL_FIXTURES.items():
        (DATA_DIR / "proposals" / filename).write_bytes(canonical_bytes(items))

    totals = {
        "main_results": sum(len(v) for v in main_counts.values()) * 5,
        "carrot_knife_ablations": sum(len(v) for v in ablation_counts.values()) * 5,
        "compositional": sum(len(v) for v in comp_counts.values()) * 5,
    }
    print(f"manifest: {len(manifest.base_tasks)} base tasks, "
          f"{len(manifest.conditions)} conditions, "
          f"{len(manifest.compositions)} compositions, hash {mhash[:12]}")
    for name, total in totals.items():
        print(f"{name}: {total} trials")


if __name__ == "__main__":
    main()
