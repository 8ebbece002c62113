"""Benchmark manifest documents: strict parsing, validation, canonical
serialization, and coverage matrices.

A manifest is a UTF-8 JSON document (extension ``.stargen.json``) holding the
base tasks, the perturbed conditions, and the composed conditions of one
benchmark. Parsing is strict: unknown fields are a hard schema error, every
condition must derive exactly its axis's category, and references must
resolve. The canonical form (sorted keys, 2-space indent, trailing newline)
makes serialize deterministic and parse/serialize a round-trip identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .canonical import canonical_bytes, sha256_hex
from .errors import StargenError
from . import taxonomy
from .taxonomy import (
    AxisRegistry, BaseTask, BehavioralChange, Category, CompositeCondition,
    Condition, DEFAULT_REGISTRY, PerturbationDelta, SceneDescriptor,
    SceneObject, TaxonomyError, VisualChange,
)

MANIFEST_SUFFIX = ".stargen.json"
BUNDLED_MANIFEST = "bridgev2-star.stargen.json"


class ManifestError(StargenError):
    code = "ManifestError"


class ManifestSyntaxError(ManifestError):
    code = "SyntaxError"

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ManifestError):
    code = "SchemaError"

    def __init__(self, message: str, *, path: str | None = None, item_id: str | None = None):
        super().__init__(f"{message} (at {path})" if path else message,
                         item_id=item_id)
        self.path = path


class DanglingReference(ManifestError):
    code = "ReferenceError"


class UnsupportedFormat(StargenError):
    code = "UnsupportedFormat"


@dataclass(frozen=True)
class Issue:
    """One validation finding: a stable code, the offending id, and a message."""

    code: str
    item_id: str | None
    message: str

    def describe(self) -> str:
        where = f" at {self.item_id}" if self.item_id else ""
        return f"{self.code}{where}: {self.message}"


class ManifestValidationError(ManifestError):
    code = "ManifestInvalid"

    def __init__(self, issues: list[Issue]):
        super().__init__(
            "; ".join(issue.describe() for issue in issues) or "manifest invalid"
        )
        self.issues = issues

    def codes(self) -> list[str]:
        return [issue.code for issue in self.issues]


@dataclass(frozen=True)
class BenchmarkManifest:
    name: str
    base_tasks: tuple[BaseTask, ...]
    conditions: tuple[Condition, ...]
    compositions: tuple[CompositeCondition, ...]

    def base_task(self, task_id: str) -> BaseTask:
        for task in self.base_tasks:
            if task.id == task_id:
                return task
        raise DanglingReference(f"no base task with id {task_id!r}", item_id=task_id)

    def condition(self, cond_id: str) -> Condition:
        for cond in self.conditions:
            if cond.id == cond_id:
                return cond
        raise DanglingReference(f"no condition with id {cond_id!r}", item_id=cond_id)

    def composition(self, comp_id: str) -> CompositeCondition:
        for comp in self.compositions:
            if comp.id == comp_id:
                return comp
        raise DanglingReference(f"no composition with id {comp_id!r}", item_id=comp_id)

    def ids_by_kind(self) -> tuple[tuple[str, str], ...]:
        """All evaluable ids in manifest order, tagged base/perturbed/composition."""
        out: list[tuple[str, str]] = [(t.id, "base") for t in self.base_tasks]
        out.extend((c.id, "perturbed") for c in self.conditions)
        out.extend((c.id, "composition") for c in self.compositions)
        return tuple(out)


# --- strict document reading -------------------------------------------------

def _expect(obj: Any, kind: type, path: str) -> Any:
    names = {dict: "object", list: "array", str: "string", int: "integer"}
    if kind is int and isinstance(obj, bool):
        raise SchemaError(f"expected integer, got boolean", path=path)
    if not isinstance(obj, kind):
        raise SchemaError(
            f"expected {names.get(kind, kind.__name__)}, got {type(obj).__name__}",
            path=path,
        )
    return obj


def _take(obj: dict, path: str, required: Iterable[str], optional: Iterable[str] = ()) -> dict:
    required = tuple(required)
    optional = tuple(optional)
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise SchemaError(
            f"unknown field(s): {', '.join(sorted(unknown))}", path=path
        )
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaError(
            f"missing required field(s): {', '.join(missing)}", path=path
        )
    return obj


def _read_scene(doc: dict, path: str) -> SceneDescriptor:
    _take(doc, path, required=("image", "objects"))
    image = _expect(doc["image"], str, f"{path}.image")
    objects = []
    for i, entry in enumerate(_expect(doc["objects"], list, f"{path}.objects")):
        opath = f"{path}.objects[{i}]"
        entry = _take(_expect(entry, dict, opath), opath, required=("name", "properties"))
        props = _expect(entry["properties"], dict, f"{opath}.properties")
        for key, value in props.items():
            _expect(value, str, f"{opath}.properties.{key}")
        objects.append(SceneObject.make(_expect(entry["name"], str, f"{opath}.name"), props))
    return SceneDescriptor(image=image, objects=tuple(objects))


def _read_base_task(doc: dict, path: str) -> BaseTask:
    _take(doc, path, required=(
        "id", "instruction", "scene", "behavior_signature",
        "success_criterion", "demo_count",
    ))
    demo_count = _expect(doc["demo_count"], int, f"{path}.demo_count")
    if demo_count < 0:
        raise SchemaError("demo_count must be >= 0", path=f"{path}.demo_count")
    try:
        return BaseTask(
            id=_expect(doc["id"], str, f"{path}.id"),
            instruction=_expect(doc["instruction"], str, f"{path}.instruction"),
            scene=_read_scene(_expect(doc["scene"], dict, f"{path}.scene"), f"{path}.scene"),
            behavior_signature=_expect(doc["behavior_signature"], str, f"{path}.behavior_signature"),
            success_criterion=_expect(doc["success_criterion"], str, f"{path}.success_criterion"),
            demo_count=demo_count,
        )
    except ValueError as err:
        raise SchemaError(str(err), path=path) from err


def _read_delta(doc: dict, path: str) -> PerturbationDelta:
    _take(doc, path, required=("factor",), optional=("visual", "instruction", "behavioral"))
    visual = None
    if "visual" in doc:
        vdoc = _take(_expect(doc["visual"], dict, f"{path}.visual"),
                     f"{path}.visual", required=("description",))
        visual = VisualChange(_expect(vdoc["description"], str, f"{path}.visual.description"))
    behavioral = None
    if "behavioral" in doc:
        bdoc = _take(_expect(doc["behavioral"], dict, f"{path}.behavioral"),
                     f"{path}.behavioral", required=("description",))
        behavioral = BehavioralChange(
            _expect(bdoc["description"], str, f"{path}.behavioral.description"))
    instruction = None
    if "instruction" in doc:
        instruction = _expect(doc["instruction"], str, f"{path}.instruction")
    try:
        return PerturbationDelta(
            factor=_expect(doc["factor"], str, f"{path}.factor"),
            visual=visual, instruction=instruction, behavioral=behavioral,
        )
    except (taxonomy.EmptyDelta, ValueError) as err:
        raise SchemaError(str(err), path=path) from err


def _read_condition(doc: dict, path: str) -> Condition:
    _take(doc, path, required=("id", "base_task", "axis", "delta", "notes", "scene_image"))
    return Condition(
        id=_expect(doc["id"], str, f"{path}.id"),
        base_task=_expect(doc["base_task"], str, f"{path}.base_task"),
        axis=_expect(doc["axis"], str, f"{path}.axis"),
        delta=_read_delta(_expect(doc["delta"], dict, f"{path}.delta"), f"{path}.delta"),
        notes=_expect(doc["notes"], str, f"{path}.notes"),
        scene_image=_expect(doc["scene_image"], str, f"{path}.scene_image"),
    )


def _read_composition(doc: dict, path: str) -> CompositeCondition:
    _take(doc, path, required=("id", "base_task", "parts", "notes", "scene_image"),
          optional=("effective_instruction",))
    parts = []
    raw_parts = _expect(doc["parts"], list, f"{path}.parts")
    for i, entry in enumerate(raw_parts):
        ppath = f"{path}.parts[{i}]"
        entry = _take(_expect(entry, dict, ppath), ppath, required=("axis", "delta"))
        parts.append((
            _expect(entry["axis"], str, f"{ppath}.axis"),
            _read_delta(_expect(entry["delta"], dict, f"{ppath}.delta"), f"{ppath}.delta"),
        ))
    if len(parts) < 2:
        raise SchemaError("a composition needs at least 2 parts", path=f"{path}.parts")
    effective = None
    if "effective_instruction" in doc:
        effective = _expect(doc["effective_instruction"], str, f"{path}.effective_instruction")
    return CompositeCondition(
        id=_expect(doc["id"], str, f"{path}.id"),
        base_task=_expect(doc["base_task"], str, f"{path}.base_task"),
        parts=tuple(parts),
        effective_instruction=effective,
        notes=_expect(doc["notes"], str, f"{path}.notes"),
        scene_image=_expect(doc["scene_image"], str, f"{path}.scene_image"),
    )


def parse_manifest(data: bytes, registry: AxisRegistry = DEFAULT_REGISTRY) -> BenchmarkManifest:
    """Parse and fully validate a manifest document.

    Syntax and schema problems raise immediately with a position or JSON
    path; semantic problems (bad references, category mismatches, no-op
    instructions, duplicate ids) are collected and raised together as a
    :class:`ManifestValidationError` so a caller can print all of them.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ManifestSyntaxError(f"not valid UTF-8: {err}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ManifestSyntaxError(
            f"{err.msg} (line {err.lineno}, column {err.colno})",
            line=err.lineno, column=err.colno,
        ) from err

    doc = _take(_expect(doc, dict, "$"), "$",
                required=("name", "base_tasks", "conditions", "compositions"))
    name = _expect(doc["name"], str, "$.name")
    raw_tasks = _expect(doc["base_tasks"], list, "$.base_tasks")
    if not raw_tasks:
        raise SchemaError("at least one base task is required", path="$.base_tasks")
    base_tasks = tuple(
        _read_base_task(_expect(entry, dict, f"$.base_tasks[{i}]"), f"$.base_tasks[{i}]")
        for i, entry in enumerate(raw_tasks)
    )
    conditions = tuple(
        _read_condition(_expect(entry, dict, f"$.conditions[{i}]"), f"$.conditions[{i}]")
        for i, entry in enumerate(_expect(doc["conditions"], list, "$.conditions"))
    )
    compositions = tuple(
        _read_composition(_expect(entry, dict, f"$.compositions[{i}]"), f"$.compositions[{i}]")
        for i, entry in enumerate(_expect(doc["compositions"], list, "$.compositions"))
    )
    manifest = BenchmarkManifest(name=name, base_tasks=base_tasks,
                                 conditions=conditions, compositions=compositions)
    issues = validate_manifest(manifest, registry)
    if issues:
        raise ManifestValidationError(issues)
    return manifest


def validate_manifest(manifest: BenchmarkManifest,
                      registry: AxisRegistry = DEFAULT_REGISTRY) -> list[Issue]:
    """Semantic validation; returns all findings instead of stopping at the
    first. Ids must be unique across kinds because campaign grids key trials
    by a single condition-id namespace."""
    issues: list[Issue] = []
    seen: dict[str, str] = {}
    for item_id, kind in manifest.ids_by_kind():
        if item_id in seen:
            issues.append(Issue(
                "DuplicateId", item_id,
                f"id used by both {seen[item_id]} and {kind} entries"))
        seen[item_id] = kind

    task_ids = {t.id for t in manifest.base_tasks}

    for cond in manifest.conditions:
        if cond.base_task not in task_ids:
            issues.append(Issue(
                "ReferenceError", cond.id,
                f"references unknown base task {cond.base_task!r}"))
            continue
        base = manifest.base_task(cond.base_task)
        try:
            taxonomy.validate_condition(base, cond, registry)
        except TaxonomyError as err:
            issues.append(Issue(err.code, cond.id, str(err)))

    for comp in manifest.compositions:
        if comp.base_task not in task_ids:
            issues.append(Issue(
                "ReferenceError", comp.id,
                f"references unknown base task {comp.base_task!r}"))
            continue
        base = manifest.base_task(comp.base_task)
        try:
            taxonomy.validate_composition(base, comp, registry)
        except TaxonomyError as err:
            issues.append(Issue(err.code, comp.id, str(err)))

    return issues


# --- canonical serialization --------------------------------------------------

def _delta_doc(delta: PerturbationDelta) -> dict:
    doc: dict[str, Any] = {"factor": delta.factor}
    if delta.visual is not None:
        doc["visual"] = {"description": delta.visual.description}
    if delta.instruction is not None:
        doc["instruction"] = delta.instruction
    if delta.behavioral is not None:
        doc["behavioral"] = {"description": delta.behavioral.description}
    return doc


def manifest_document(manifest: BenchmarkManifest) -> dict:
    """The manifest as a plain JSON-ready dict (lists keep declaration order)."""
    return {
        "name": manifest.name,
        "base_tasks": [
            {
                "id": t.id,
                "instruction": t.instruction,
                "scene": {
                    "image": t.scene.image,
                    "objects": [
                        {"name": o.name, "properties": o.properties_dict()}
                        for o in t.scene.objects
                    ],
                },
                "behavior_signature": t.behavior_signature,
                "success_criterion": t.success_criterion,
                "demo_count": t.demo_count,
            }
            for t in manifest.base_tasks
        ],
        "conditions": [
            {
                "id": c.id,
                "base_task": c.base_task,
                "axis": c.axis,
                "delta": _delta_doc(c.delta),
                "notes": c.notes,
                "scene_image": c.scene_image,
            }
            for c in manifest.conditions
        ],
        "compositions": [
            {
                "id": c.id,
                "base_task": c.base_task,
                "parts": [
                    {"axis": axis, "delta": _delta_doc(delta)}
                    for axis, delta in c.parts
                ],
                **({"effective_instruction": c.effective_instruction}
                   if c.effective_instruction is not None else {}),
                "notes": c.notes,
                "scene_image": c.scene_image,
            }
            for c in manifest.compositions
        ],
    }


def serialize_manifest(manifest: BenchmarkManifest) -> bytes:
    return canonical_bytes(manifest_document(manifest))


def manifest_hash(manifest: BenchmarkManifest) -> str:
    return sha256_hex(serialize_manifest(manifest))


def parse_condition(doc: dict, path: str = "$.condition") -> Condition:
    """Strictly read one condition document (used by draft-acceptance surfaces)."""
    return _read_condition(_expect(doc, dict, path), path)


def condition_document(cond: Condition) -> dict:
    return {
        "id": cond.id,
        "base_task": cond.base_task,
        "axis": cond.axis,
        "delta": _delta_doc(cond.delta),
        "notes": cond.notes,
        "scene_image": cond.scene_image,
    }


def with_condition(manifest: BenchmarkManifest, cond: Condition) -> BenchmarkManifest:
    return BenchmarkManifest(
        name=manifest.name,
        base_tasks=manifest.base_tasks,
        conditions=manifest.conditions + (cond,),
        compositions=manifest.compositions,
    )


# --- coverage ------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageMatrix:
    """Which canonical axes (and thus categories) a benchmark exercises."""

    name: str
    axes_present: tuple[str, ...]
    categories_present: frozenset[Category]
    axes_total: int = 22
    categories_total: int = 7

    @property
    def axes_count(self) -> int:
        return len(self.axes_present)

    @property
    def categories_count(self) -> int:
        return len(self.categories_present)

    def summary(self) -> str:
        return (f"axes: {self.axes_count}/{self.axes_total}, "
                f"categories: {self.categories_count}/{self.categories_total}")


def coverage_matrix(manifest: BenchmarkManifest,
                    registry: AxisRegistry = DEFAULT_REGISTRY) -> CoverageMatrix:
    """Distinct axes used by conditions and composition parts, in first-use
    order. Invariant under condition reordering within an axis and repeated
    axis usage."""
    ordered: list[str] = []
    for cond in manifest.conditions:
        if cond.axis not in ordered:
            ordered.append(cond.axis)
    for comp in manifest.compositions:
        for axis_id, _ in comp.parts:
            if axis_id not in ordered:
                ordered.append(axis_id)
    categories = frozenset(registry.lookup(a).category for a in ordered)
    return CoverageMatrix(
        name=manifest.name,
        axes_present=tuple(ordered),
        categories_present=categories,
        axes_total=len(registry.canonical_ids),
        categories_total=len(taxonomy.CATEGORIES),
    )


def matrix_from_axes(name: str, axes: Iterable[str],
                     registry: AxisRegistry = DEFAULT_REGISTRY) -> CoverageMatrix:
    ordered = tuple(dict.fromkeys(axes))
    return CoverageMatrix(
        name=name,
        axes_present=ordered,
        categories_present=frozenset(registry.lookup(a).category for a in ordered),
        axes_total=len(registry.canonical_ids),
        categories_total=len(taxonomy.CATEGORIES),
    )


@dataclass(frozen=True)
class CoverageDiff:
    left: CoverageMatrix
    right: CoverageMatrix
    added: tuple[str, ...]      # in left, not in right
    removed: tuple[str, ...]    # in right, not in left

    def is_empty(self) -> bool:
        return not self.added and not self.removed


def diff_coverage(a: CoverageMatrix, b: CoverageMatrix,
                  registry: AxisRegistry = DEFAULT_REGISTRY) -> CoverageDiff:
    """Axes in ``a`` not in ``b`` and vice versa, in canonical registry order."""
    a_set, b_set = set(a.axes_present), set(b.axes_present)
    order = {axis.id: i for i, axis in enumerate(registry)}
    added = tuple(sorted(a_set - b_set, key=lambda x: order.get(x, len(order))))
    removed = tuple(sorted(b_set - a_set, key=lambda x: order.get(x, len(order))))
    return CoverageDiff(left=a, right=b, added=added, removed=removed)


def render_coverage_table(matrices: Iterable[CoverageMatrix],
                          registry: AxisRegistry = DEFAULT_REGISTRY) -> str:
    """Checkmark-row table over all canonical axes, one row per matrix."""
    axes = [registry.lookup(a) for a in registry.canonical_ids]
    header = ["benchmark"] + [a.id for a in axes]
    rows = [header, ["---"] * len(header)]
    for m in matrices:
        present = set(m.axes_present)
        rows.append([m.name] + [("x" if a.id in present else "") for a in axes])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = [
        "| " + " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) + " |"
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def render_coverage_diff(diff: CoverageDiff,
                         registry: AxisRegistry = DEFAULT_REGISTRY) -> str:
    table = render_coverage_table([diff.left, diff.right], registry)
    lines = [table.rstrip("\n")]
    lines.append(f"only in {diff.left.name}: " + (", ".join(diff.added) or "(none)"))
    lines.append(f"only in {diff.right.name}: " + (", ".join(diff.removed) or "(none)"))
    return "\n".join(lines) + "\n"


# --- bundled data ---------------------------------------------------------------

def _data_bytes(filename: str) -> bytes:
    return resources.files("stargen.data").joinpath(filename).read_bytes()


def bundled_manifest_bytes() -> bytes:
    return _data_bytes(BUNDLED_MANIFEST)


def load_bundled_manifest(registry: AxisRegistry = DEFAULT_REGISTRY) -> BenchmarkManifest:
    return parse_manifest(bundled_manifest_bytes(), registry)


def load_reference_coverage(registry: AxisRegistry = DEFAULT_REGISTRY) -> dict[str, CoverageMatrix]:
    """Coverage matrices of prior benchmarks and policy evaluations, shipped
    as data for side-by-side comparison."""
    doc = json.loads(_data_bytes("coverage_rows.json"))
    return {
        row["name"]: matrix_from_axes(row["name"], row["axes"], registry)
        for row in doc["rows"]
    }


def read_manifest_file(path: str | Path,
                       registry: AxisRegistry = DEFAULT_REGISTRY) -> BenchmarkManifest:
    return parse_manifest(Path(path).read_bytes(), registry)


def write_manifest_file(path: str | Path, manifest: BenchmarkManifest) -> None:
    """Atomic write: temp file beside the target, then rename."""
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_bytes(serialize_manifest(manifest))
    tmp.replace(target)
