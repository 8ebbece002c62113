"""Perturbation taxonomy: modalities, categories, the canonical axis registry,
and the rules that classify a task perturbation by which policy modalities it
changes.

A perturbation of a base task is described by a :class:`PerturbationDelta`
with up to three channels (visual, instruction, behavioral). Its
:class:`Category` is the non-empty set of modalities actually changed, which
is always one of seven values (V, S, B, VB, SB, VS, VSB). Axes group related
perturbation factors that share a category; the default registry holds the 22
canonical axes and can be extended with custom ones, which stay flagged as
non-canonical.

Behavioral change is attested, not computed: whether the required expert
behavior changes is a judgment only a human evaluator can make, so a delta
declares it with a flag plus free-text rationale.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import StargenError


class TaxonomyError(StargenError):
    code = "TaxonomyError"


class EmptyDelta(TaxonomyError):
    code = "EmptyDelta"


class NoOpInstruction(TaxonomyError):
    code = "NoOpInstruction"


class UnknownAxis(TaxonomyError):
    code = "UnknownAxis"


class CategoryMismatch(TaxonomyError):
    code = "CategoryMismatch"

    def __init__(self, message: str, *, expected: "Category", derived: "Category",
                 item_id: str | None = None):
        super().__init__(message, item_id=item_id)
        self.expected = expected
        self.derived = derived


class RegistryCorrupt(TaxonomyError):
    code = "RegistryCorrupt"


class DuplicatePart(TaxonomyError):
    code = "DuplicatePart"


class Modality(enum.IntEnum):
    """The three channels of a visuo-lingual policy, in canonical print order."""

    VISUAL = 0
    SEMANTIC = 1
    BEHAVIORAL = 2

    @property
    def letter(self) -> str:
        return ("V", "S", "B")[self.value]


_WS = re.compile(r"\s+")


def normalize_instruction(text: str) -> str:
    """Trim and collapse internal whitespace. Case-sensitive, idempotent."""
    return _WS.sub(" ", text.strip())


@dataclass(frozen=True)
class Category:
    """A non-empty subset of modalities; exactly seven distinct values exist."""

    members: frozenset[Modality]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a category must contain at least one modality")
        object.__setattr__(self, "members", frozenset(self.members))

    @classmethod
    def of(cls, *modalities: Modality) -> "Category":
        return cls(frozenset(modalities))

    @classmethod
    def from_label(cls, label: str) -> "Category":
        by_letter = {m.letter: m for m in Modality}
        members = set()
        for ch in label:
            if ch not in by_letter:
                raise ValueError(f"unknown modality letter {ch!r} in {label!r}")
            members.add(by_letter[ch])
        return cls(frozenset(members))

    @property
    def label(self) -> str:
        return "".join(m.letter for m in sorted(self.members))

    def union(self, other: "Category") -> "Category":
        return Category(self.members | other.members)

    def __contains__(self, modality: Modality) -> bool:
        return modality in self.members

    def __iter__(self) -> Iterator[Modality]:
        return iter(sorted(self.members))

    def __str__(self) -> str:
        return self.label


VISUAL = Category.of(Modality.VISUAL)
SEMANTIC = Category.of(Modality.SEMANTIC)
BEHAVIORAL = Category.of(Modality.BEHAVIORAL)

#: All seven categories in canonical order.
CATEGORIES: tuple[Category, ...] = tuple(
    Category.from_label(label) for label in ("V", "S", "B", "VB", "SB", "VS", "VSB")
)
CATEGORY_LABELS: tuple[str, ...] = tuple(c.label for c in CATEGORIES)


def compose(categories: Iterable[Category]) -> Category:
    """Union of categories. Commutative, associative, idempotent."""
    cats = list(categories)
    if not cats:
        raise ValueError("compose requires at least one category")
    members: frozenset[Modality] = frozenset()
    for c in cats:
        members = members | c.members
    return Category(members)


@dataclass(frozen=True)
class AxisDescriptor:
    """One axis of generalization: a named grouping of correlated factors
    sharing a category. The id prefix (letters before the hyphen) must equal
    the category's canonical label."""

    id: str
    name: str
    category: Category
    description: str
    example_factors: tuple[str, ...] = ()
    canonical: bool = True

    @property
    def prefix(self) -> str:
        return self.id.split("-", 1)[0]

    def prefix_consistent(self) -> bool:
        return self.prefix == self.category.label


def _axis(axis_id: str, name: str, label: str, description: str, *factors: str) -> AxisDescriptor:
    return AxisDescriptor(
        id=axis_id,
        name=name,
        category=Category.from_label(label),
        description=description,
        example_factors=tuple(factors),
    )


#: The 22 canonical axes, grouped 4/5/2/5/4/1/1 across V/S/B/VB/SB/VS/VSB.
CANONICAL_AXES: tuple[AxisDescriptor, ...] = (
    _axis("V-AUG", "Image Augmentations", "V",
          "Realistic generic augmentations in image space.",
          "lighting", "image blur", "image contrast"),
    _axis("V-SC", "Visual Scene", "V",
          "Visual changes to scene elements that do not affect behavior.",
          "surface color", "distractor object appearance",
          "distractor object placement", "textures"),
    _axis("V-OBJ", "Visual Task Object", "V",
          "Visual changes to task-relevant objects that do not affect behavior.",
          "manipulated object color", "other object color"),
    _axis("V-VIEW", "Viewpoint", "V",
          "Changes to camera viewpoints.",
          "camera pose", "partial occlusion"),
    _axis("S-PROP", "Object Properties", "S",
          "Changes to instruction that require additional knowledge about "
          "physical properties of a task-relevant object.",
          "referencing objects based on color, mass, size"),
    _axis("S-LANG", "Language Rephrase", "S",
          "Simple rephrasing of the instruction that does not affect "
          "underlying behavior.",
          "verb synonyms", "removing articles"),
    _axis("S-MO", "Multi-Object Referencing", "S",
          "Changes to instruction that involve references to spatial "
          "relationships between multiple objects when defining a task, "
          "without changing behavior.",
          "understanding to be \"left\" or \"right\" of an object",
          "to be \"in\" an object"),
    _axis("S-AFF", "Human Affordances", "S",
          "Changes to instruction that require knowledge of human "
          "affordances, or how humans interact with an object.",
          "understanding human comfort", "object use cases"),
    _axis("S-INT", "Internet Knowledge", "S",
          "Changes to instruction that require external knowledge that can "
          "be found on the internet.",
          "famous nouns", "properties of common objects"),
    _axis("B-HOBJ", "Hidden Object", "B",
          "Unobserved changes to task-relevant objects that affect behavior.",
          "task-relevant object mass", "friction", "fragility"),
    _axis("B-HSC", "Hidden Scene", "B",
          "Unobserved changes to scene elements that affect behavior.",
          "surface friction", "temperature"),
    _axis("VB-POSE", "Object Poses", "VB",
          "Changes to task-relevant object poses in the scene.",
          "manipulated object pose", "other object pose"),
    _axis("VB-ISC", "Interacting Scene", "VB",
          "Changes to scene elements that affect behavior.",
          "clutter", "surface height"),
    _axis("VB-MOBJ", "Morphed Objects", "VB",
          "Changes to task-relevant objects that affect their geometry.",
          "manipulated object size", "shape"),
    _axis("VB-ROB", "Robot Embodiment", "VB",
          "Changes to the robot embodiment that affect behavior.",
          "new robot arm", "new gripper or hand"),
    _axis("VB-SYM", "Symmetry", "VB",
          "Specific to bimanual embodiments: changes that require the robot "
          "to mirror behavior across arms.",
          "using different arm to perform same absolute motion",
          "to perform flipped absolute motion"),
    _axis("SB-ADV", "Motion Adverbs", "SB",
          "Changes to instruction involving motion descriptors that affect "
          "behavior.",
          "speed"),
    _axis("SB-SMO", "Spatial Multi-Object", "SB",
          "Changes to instruction that involve references to spatial "
          "relationships between multiple objects when defining a task, "
          "that affect behavior.",
          "changing spatial references relative to the same object"),
    _axis("SB-NOUN", "Noun Grounding", "SB",
          "Replacing nouns with other nouns already in the scene.",
          "other manipulated object"),
    _axis("SB-VRB", "Action Verbs", "SB",
          "Changes to action verbs that require new behavior.",
          "new action to perform on task-relevant object"),
    _axis("VS-PROP", "New Object Property", "VS",
          "Changes to task-relevant object properties that affect object "
          "appearance and language instruction, but not behavior.",
          "new object color when base language instruction refers to the "
          "object color"),
    _axis("VSB-NOBJ", "New Object", "VSB",
          "Changes to task-relevant objects to new objects with different "
          "visual appearances, semantic descriptions, and physical "
          "characteristics.",
          "new manipulated object"),
)

#: Expected number of canonical axes per category label.
CANONICAL_SPLIT: Mapping[str, int] = {
    "V": 4, "S": 5, "B": 2, "VB": 5, "SB": 4, "VS": 1, "VSB": 1,
}


@dataclass(frozen=True)
class SceneObject:
    name: str
    properties: tuple[tuple[str, str], ...] = ()

    @classmethod
    def make(cls, name: str, properties: Mapping[str, str] | None = None) -> "SceneObject":
        return cls(name=name, properties=tuple(sorted((properties or {}).items())))

    def properties_dict(self) -> dict[str, str]:
        return dict(self.properties)


@dataclass(frozen=True)
class SceneDescriptor:
    image: str
    objects: tuple[SceneObject, ...] = ()


@dataclass(frozen=True)
class BaseTask:
    """A concrete task an application must handle; the reference point from
    which perturbations are measured. The scene stands in for the initial
    observation distribution, the behavior signature for the expert motion,
    and the success criterion for the human-judged reward."""

    id: str
    instruction: str
    scene: SceneDescriptor
    behavior_signature: str = ""
    success_criterion: str = ""
    demo_count: int = 0

    def __post_init__(self):
        if not normalize_instruction(self.instruction):
            raise ValueError(f"base task {self.id!r}: instruction is empty")
        if not self.scene.image.strip():
            raise ValueError(f"base task {self.id!r}: scene image reference is empty")
        if self.demo_count < 0:
            raise ValueError(f"base task {self.id!r}: demo_count must be >= 0")


@dataclass(frozen=True)
class VisualChange:
    description: str


@dataclass(frozen=True)
class BehavioralChange:
    description: str


@dataclass(frozen=True)
class PerturbationDelta:
    """What a perturbation changed, channel by channel. ``factor`` names the
    single change unit applied (atomicity is enforced structurally: one
    factor label per non-composite delta)."""

    factor: str
    visual: VisualChange | None = None
    instruction: str | None = None
    behavioral: BehavioralChange | None = None

    def __post_init__(self):
        if self.visual is None and self.instruction is None and self.behavioral is None:
            raise EmptyDelta("delta changes none of visual, instruction, behavioral")
        if not self.factor.strip():
            raise ValueError("delta factor must be a non-empty label")


@dataclass(frozen=True)
class Condition:
    """One perturbation of one base task, as serialized in a manifest."""

    id: str
    base_task: str
    axis: str
    delta: PerturbationDelta
    notes: str = ""
    scene_image: str = ""


@dataclass(frozen=True)
class CompositeCondition:
    """Two or more atomic perturbations applied to the same base task.

    Parts keep their per-axis deltas; instruction edits do not compose
    textually, so the final instruction of a composed task lives in
    ``effective_instruction`` when any part edits language."""

    id: str
    base_task: str
    parts: tuple[tuple[str, PerturbationDelta], ...]
    effective_instruction: str | None = None
    notes: str = ""
    scene_image: str = ""

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError(f"composition {self.id!r}: needs at least 2 parts")


def categorize(base: BaseTask, delta: PerturbationDelta) -> Category:
    """Category of a delta relative to its base task.

    Visual iff the initial image distribution changes, Semantic iff the
    instruction changes (after whitespace normalization), Behavioral iff the
    required expert behavior is declared changed. Never empty.
    """
    members: set[Modality] = set()
    if delta.visual is not None:
        members.add(Modality.VISUAL)
    if delta.instruction is not None:
        if normalize_instruction(delta.instruction) == normalize_instruction(base.instruction):
            raise NoOpInstruction(
                "instruction delta equals the base instruction after normalization"
            )
        members.add(Modality.SEMANTIC)
    if delta.behavioral is not None:
        members.add(Modality.BEHAVIORAL)
    if not members:
        raise EmptyDelta("delta changes none of visual, instruction, behavioral")
    return Category(frozenset(members))


@dataclass(frozen=True)
class RegistryReport:
    total: int
    canonical_total: int
    counts_by_category: tuple[tuple[str, int], ...]
    custom_ids: tuple[str, ...]

    def counts(self) -> dict[str, int]:
        return dict(self.counts_by_category)


class AxisRegistry:
    """The canonical 22 axes plus any registered custom axes.

    Immutable once built; extend with :meth:`with_axis`, which returns a new
    registry. Custom axes are flagged non-canonical everywhere they surface.
    """

    def __init__(self, custom: Iterable[AxisDescriptor] = ()):
        axes: dict[str, AxisDescriptor] = {a.id: a for a in CANONICAL_AXES}
        for axis in custom:
            if axis.id in axes:
                raise RegistryCorrupt(f"axis id {axis.id!r} already registered")
            axes[axis.id] = AxisDescriptor(
                id=axis.id, name=axis.name, category=axis.category,
                description=axis.description, example_factors=axis.example_factors,
                canonical=False,
            )
        self._axes = axes

    def __iter__(self) -> Iterator[AxisDescriptor]:
        return iter(self._axes.values())

    def __len__(self) -> int:
        return len(self._axes)

    def __contains__(self, axis_id: str) -> bool:
        return axis_id in self._axes

    @property
    def canonical_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self if a.canonical)

    def with_axis(self, axis: AxisDescriptor) -> "AxisRegistry":
        custom = [a for a in self if not a.canonical]
        custom.append(axis)
        return AxisRegistry(custom)

    def lookup(self, axis_id: str) -> AxisDescriptor:
        try:
            return self._axes[axis_id]
        except KeyError:
            raise UnknownAxis(f"no axis registered with id {axis_id!r}") from None

    def selfcheck(self) -> RegistryReport:
        """Assert registry integrity and return per-category counts.

        Raises :class:`RegistryCorrupt` if any axis id prefix disagrees with
        its category label (only reachable through custom-axis injection).
        """
        counts = {label: 0 for label in CATEGORY_LABELS}
        for axis in self:
            if not axis.prefix_consistent():
                raise RegistryCorrupt(
                    f"axis {axis.id!r} declares category {axis.category.label} "
                    f"but its id prefix is {axis.prefix!r}"
                )
            counts[axis.category.label] += 1
        canonical = [a for a in self if a.canonical]
        if len(canonical) != len(CANONICAL_AXES):
            raise RegistryCorrupt(
                f"expected {len(CANONICAL_AXES)} canonical axes, found {len(canonical)}"
            )
        for label, expected in CANONICAL_SPLIT.items():
            have = sum(1 for a in canonical if a.category.label == label)
            if have != expected:
                raise RegistryCorrupt(
                    f"category {label}: expected {expected} canonical axes, found {have}"
                )
        return RegistryReport(
            total=len(self),
            canonical_total=len(canonical),
            counts_by_category=tuple((label, counts[label]) for label in CATEGORY_LABELS),
            custom_ids=tuple(a.id for a in self if not a.canonical),
        )


DEFAULT_REGISTRY = AxisRegistry()


def axis_lookup(axis_id: str, registry: AxisRegistry = DEFAULT_REGISTRY) -> AxisDescriptor:
    return registry.lookup(axis_id)


def registry_selfcheck(registry: AxisRegistry = DEFAULT_REGISTRY) -> RegistryReport:
    return registry.selfcheck()


def validate_condition(base: BaseTask, cond: Condition,
                       registry: AxisRegistry = DEFAULT_REGISTRY) -> Category:
    """Check that the condition's delta derives exactly its axis's category.

    Returns the derived category on success; raises :class:`CategoryMismatch`
    (carrying expected and derived) or the categorize errors otherwise.
    """
    axis = registry.lookup(cond.axis)
    try:
        derived = categorize(base, cond.delta)
    except TaxonomyError as err:
        err.item_id = err.item_id or cond.id
        raise
    if derived != axis.category:
        raise CategoryMismatch(
            f"axis {axis.id} expects category {axis.category.label}, "
            f"delta derives {derived.label}",
            expected=axis.category, derived=derived, item_id=cond.id,
        )
    return derived


def validate_composition(base: BaseTask, comp: CompositeCondition,
                         registry: AxisRegistry = DEFAULT_REGISTRY) -> Category:
    """Check every part against its axis and return the composed category
    (the union of the parts' categories). Parts must reference distinct axes
    or at least distinct factors."""
    seen: set[tuple[str, str]] = set()
    part_categories: list[Category] = []
    for idx, (axis_id, delta) in enumerate(comp.parts):
        axis = registry.lookup(axis_id)
        key = (axis_id, delta.factor)
        if key in seen:
            raise DuplicatePart(
                f"part {idx + 1} repeats axis {axis_id} with factor {delta.factor!r}",
                item_id=comp.id,
            )
        seen.add(key)
        try:
            derived = categorize(base, delta)
        except TaxonomyError as err:
            err.item_id = err.item_id or comp.id
            raise
        if derived != axis.category:
            raise CategoryMismatch(
                f"part {idx + 1} (axis {axis.id}) expects category "
                f"{axis.category.label}, delta derives {derived.label}",
                expected=axis.category, derived=derived, item_id=comp.id,
            )
        part_categories.append(derived)
    return compose(part_categories)
