import json

import pytest
from hypothesis import given, settings, strategies as st

from stargen.manifest import (
    BenchmarkManifest, ManifestSyntaxError, ManifestValidationError,
    SchemaError, coverage_matrix, diff_coverage, load_reference_coverage,
    manifest_hash, matrix_from_axes, parse_manifest, render_coverage_diff,
    serialize_manifest, with_condition,
)
from stargen.taxonomy import (
    BaseTask, BehavioralChange, CompositeCondition, Condition, DEFAULT_REGISTRY,
    PerturbationDelta, SceneDescriptor, SceneObject, VisualChange,
)

# --- strategies for randomized valid manifests ------------------------------------

_IDENT = st.from_regex(r"[a-z][a-z0-9_]{0,11}", fullmatch=True)
_TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
    min_size=1, max_size=24,
).filter(lambda s: s.strip())


@st.composite
def base_tasks(draw, task_id):
    return BaseTask(
        id=task_id,
        instruction=draw(_TEXT),
        scene=SceneDescriptor(
            image=draw(_IDENT) + ".jpg",
            objects=tuple(
                SceneObject.make(draw(_IDENT), {"color": draw(_TEXT)})
                for _ in range(draw(st.integers(0, 2)))
            ),
        ),
        behavior_signature=draw(_TEXT),
        success_criterion=draw(_TEXT),
        demo_count=draw(st.integers(0, 50)),
    )


def _delta_for_axis(draw, axis, base):
    cat = axis.category.label
    instruction = None
    if "S" in cat:
        instruction = draw(_TEXT.filter(
            lambda s: " ".join(s.split()) != " ".join(base.instruction.split())))
    return PerturbationDelta(
        factor=draw(_TEXT),
        visual=VisualChange(draw(_TEXT)) if "V" in cat else None,
        instruction=instruction,
        behavioral=BehavioralChange(draw(_TEXT)) if "B" in cat else None,
    )


@st.composite
def manifests(draw):
    n_tasks = draw(st.integers(1, 3))
    tasks = tuple(draw(base_tasks(f"task{i}")) for i in range(n_tasks))
    axes = list(DEFAULT_REGISTRY)
    conditions = []
    for i in range(draw(st.integers(0, 6))):
        base = draw(st.sampled_from(tasks))
        axis = draw(st.sampled_from(axes))
        conditions.append(Condition(
            id=f"cond{i}",
            base_task=base.id,
            axis=axis.id,
            delta=_delta_for_axis(draw, axis, base),
            notes=draw(_TEXT),
            scene_image=draw(_IDENT) + ".jpg",
        ))
    compositions = []
    for i in range(draw(st.integers(0, 2))):
        base = draw(st.sampled_from(tasks))
        axis_a, axis_b = draw(st.lists(st.sampled_from(axes), min_size=2,
                                       max_size=2, unique_by=lambda a: a.id))
        compositions.append(CompositeCondition(
            id=f"comp{i}",
            base_task=base.id,
            parts=(
                (axis_a.id, _delta_for_axis(draw, axis_a, base)),
                (axis_b.id, _delta_for_axis(draw, axis_b, base)),
            ),
            effective_instruction=draw(st.none() | _TEXT),
            notes=draw(_TEXT),
            scene_image=draw(_IDENT) + ".jpg",
        ))
    return BenchmarkManifest(
        name=draw(_IDENT),
        base_tasks=tasks,
        conditions=tuple(conditions),
        compositions=tuple(compositions),
    )


class TestRoundTrip:
    def test_bundled_manifest_counts(self, bundled_manifest):
        assert len(bundled_manifest.base_tasks) == 4
        assert len(bundled_manifest.conditions) == 55
        assert len(bundled_manifest.compositions) == 6

    def test_bundled_round_trip_identity(self, bundled_manifest):
        data = serialize_manifest(bundled_manifest)
        again = parse_manifest(data)
        assert again == bundled_manifest
        assert serialize_manifest(again) == data

    def test_serialize_is_deterministic(self, bundled_manifest):
        assert serialize_manifest(bundled_manifest) == serialize_manifest(bundled_manifest)

    @settings(max_examples=50, deadline=None)
    @given(manifests())
    def test_random_round_trip(self, m):
        data = serialize_manifest(m)
        assert parse_manifest(data) == m

    def test_minimal_manifest(self):
        m = BenchmarkManifest(
            name="tiny",
            base_tasks=(BaseTask(
                id="t", instruction="do it",
                scene=SceneDescriptor(image="t.jpg")),),
            conditions=(), compositions=())
        assert parse_manifest(serialize_manifest(m)) == m


class TestParseErrors:
    def test_empty_document_is_syntax_error(self):
        with pytest.raises(ManifestSyntaxError):
            parse_manifest(b"")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ManifestSyntaxError) as exc:
            parse_manifest(b'{"name": "x",\n  "base_tasks": [}')
        assert exc.value.line == 2

    def test_not_utf8(self):
        with pytest.raises(ManifestSyntaxError):
            parse_manifest(b"\xff\xfe{}")

    def test_unknown_top_level_field(self, bundled_manifest):
        doc = json.loads(serialize_manifest(bundled_manifest))
        doc["extra"] = 1
        with pytest.raises(SchemaError) as exc:
            parse_manifest(json.dumps(doc).encode())
        assert "extra" in str(exc.value)

    def test_missing_field(self, bundled_manifest):
        doc = json.loads(serialize_manifest(bundled_manifest))
        del doc["conditions"][0]["notes"]
        with pytest.raises(SchemaError) as exc:
            parse_manifest(json.dumps(doc).encode())
        assert exc.value.path == "$.conditions[0]"

    def test_unknown_delta_field(self, bundled_manifest):
        doc = json.loads(serialize_manifest(bundled_manifest))
        doc["conditions"][0]["delta"]["surprise"] = "?"
        with pytest.raises(SchemaError):
            parse_manifest(json.dumps(doc).encode())

    def test_no_base_tasks(self):
        doc = {"name": "x", "base_tasks": [], "conditions": [], "compositions": []}
        with pytest.raises(SchemaError):
            parse_manifest(json.dumps(doc).encode())

    def test_wrong_type_demo_count(self, bundled_manifest):
        doc = json.loads(serialize_manifest(bundled_manifest))
        doc["base_tasks"][0]["demo_count"] = "ten"
        with pytest.raises(SchemaError):
            parse_manifest(json.dumps(doc).encode())


def _corrupt(bundled_manifest, mutate):
    doc = json.loads(serialize_manifest(bundled_manifest))
    mutate(doc)
    return json.dumps(doc).encode()


class TestSeededCorruptions:
    """Single-field corruptions must produce their designated error codes."""

    def test_unknown_axis(self, bundled_manifest):
        def mutate(doc):
            doc["conditions"][0]["axis"] = "X-FOO"
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        assert "UnknownAxis" in exc.value.codes()

    def test_dangling_base_task(self, bundled_manifest):
        def mutate(doc):
            doc["conditions"][0]["base_task"] = "ghost_task"
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        assert "ReferenceError" in exc.value.codes()

    def test_noop_instruction(self, bundled_manifest):
        def mutate(doc):
            # carrot_color is instruction-only; making it equal to the base
            # instruction turns it into a no-op semantic delta
            cond = next(c for c in doc["conditions"] if c["id"] == "carrot_color")
            cond["delta"]["instruction"] = "put carrot on plate"
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        assert "NoOpInstruction" in exc.value.codes()

    def test_mislabeled_axis_is_category_mismatch(self, bundled_manifest):
        def mutate(doc):
            cond = next(c for c in doc["conditions"] if c["id"] == "carrot_color")
            cond["axis"] = "V-SC"
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        issue = next(i for i in exc.value.issues if i.code == "CategoryMismatch")
        assert issue.item_id == "carrot_color"

    def test_duplicate_id(self, bundled_manifest):
        def mutate(doc):
            doc["conditions"][1]["id"] = doc["conditions"][0]["id"]
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        assert "DuplicateId" in exc.value.codes()

    def test_all_issues_reported_together(self, bundled_manifest):
        def mutate(doc):
            doc["conditions"][0]["axis"] = "X-FOO"
            doc["conditions"][1]["base_task"] = "ghost"
        with pytest.raises(ManifestValidationError) as exc:
            parse_manifest(_corrupt(bundled_manifest, mutate))
        assert {"UnknownAxis", "ReferenceError"} <= set(exc.value.codes())


EXPECTED_AXES = {
    "V-SC", "V-OBJ", "V-VIEW", "S-PROP", "S-LANG", "S-MO", "S-INT",
    "VB-POSE", "VB-ISC", "VB-MOBJ", "SB-SMO", "SB-VRB", "VSB-NOBJ",
}


class TestCoverage:
    def test_bundled_coverage(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        assert set(cov.axes_present) == EXPECTED_AXES
        assert cov.axes_count == 13
        assert cov.categories_count == 5
        assert {c.label for c in cov.categories_present} == {"V", "S", "VB", "SB", "VSB"}
        assert cov.summary() == "axes: 13/22, categories: 5/7"

    def test_empty_manifest_coverage(self):
        m = BenchmarkManifest(
            name="tiny",
            base_tasks=(BaseTask(id="t", instruction="do it",
                                 scene=SceneDescriptor(image="t.jpg")),),
            conditions=(), compositions=())
        cov = coverage_matrix(m)
        assert cov.axes_count == 0
        assert cov.categories_count == 0

    def test_composition_only_coverage(self):
        base = BaseTask(id="t", instruction="put carrot on plate",
                        scene=SceneDescriptor(image="t.jpg"))
        comp = CompositeCondition(
            id="combo", base_task="t",
            parts=(
                ("S-PROP", PerturbationDelta(
                    factor="referencing color",
                    instruction="put the orange object on the plate")),
                ("S-LANG", PerturbationDelta(
                    factor="changing verbs",
                    instruction="lift carrot and place on plate")),
            ))
        m = BenchmarkManifest(name="c", base_tasks=(base,), conditions=(),
                              compositions=(comp,))
        cov = coverage_matrix(m)
        assert cov.axes_count == 2
        assert cov.categories_count == 1

    def test_invariant_under_reordering_and_duplication(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        shuffled = BenchmarkManifest(
            name=bundled_manifest.name,
            base_tasks=bundled_manifest.base_tasks,
            conditions=tuple(reversed(bundled_manifest.conditions)),
            compositions=bundled_manifest.compositions,
        )
        cov2 = coverage_matrix(shuffled)
        assert set(cov.axes_present) == set(cov2.axes_present)
        assert cov.categories_present == cov2.categories_present


class TestDiff:
    def test_self_diff_is_empty(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        diff = diff_coverage(cov, cov)
        assert diff.is_empty()

    def test_against_reference_openvla_row(self, bundled_manifest):
        # the encoded OpenVLA reference row also covers noun grounding, so it
        # appears in the drops alongside the robot-embodiment axis
        cov = coverage_matrix(bundled_manifest)
        rows = load_reference_coverage()
        diff = diff_coverage(cov, rows["OpenVLA"])
        assert set(diff.added) == {"V-OBJ", "V-VIEW", "VB-ISC", "SB-SMO", "SB-VRB"}
        assert set(diff.removed) == {"VB-ROB", "SB-NOUN"}

    def test_diffs_are_mirror_images(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        for name, other in load_reference_coverage().items():
            ab = diff_coverage(cov, other)
            ba = diff_coverage(other, cov)
            assert ab.added == ba.removed, name
            assert ab.removed == ba.added, name

    def test_against_empty_matrix(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        empty = matrix_from_axes("nothing", [])
        diff = diff_coverage(cov, empty)
        assert set(diff.added) == set(cov.axes_present)
        assert diff.removed == ()

    def test_render_mentions_both_sides(self, bundled_manifest):
        cov = coverage_matrix(bundled_manifest)
        rows = load_reference_coverage()
        text = render_coverage_diff(diff_coverage(cov, rows["OpenVLA"]))
        assert "only in bridgev2-star" in text
        assert "only in OpenVLA" in text
        assert "V-AUG" in text  # full 22-axis header row


class TestHash:
    def test_hash_tracks_content(self, bundled_manifest):
        h1 = manifest_hash(bundled_manifest)
        grown = with_condition(
            bundled_manifest,
            Condition(
                id="extra", base_task="carrot_base", axis="S-LANG",
                delta=PerturbationDelta(factor="changing verbs",
                                        instruction="move carrot onto plate")))
        assert manifest_hash(grown) != h1
        assert manifest_hash(bundled_manifest) == h1
