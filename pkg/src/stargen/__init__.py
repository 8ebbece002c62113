"""Toolkit for perturbation-taxonomy benchmarks: manifest validation,
human-judged evaluation campaigns, success-rate aggregation, and VLM-assisted
condition proposals."""

from .errors import StargenError
from .taxonomy import (
    AxisDescriptor,
    AxisRegistry,
    BaseTask,
    BehavioralChange,
    CATEGORIES,
    CATEGORY_LABELS,
    CANONICAL_AXES,
    Category,
    CategoryMismatch,
    CompositeCondition,
    Condition,
    DEFAULT_REGISTRY,
    EmptyDelta,
    Modality,
    NoOpInstruction,
    PerturbationDelta,
    RegistryCorrupt,
    SceneDescriptor,
    SceneObject,
    UnknownAxis,
    VisualChange,
    axis_lookup,
    categorize,
    compose,
    normalize_instruction,
    registry_selfcheck,
    validate_condition,
    validate_composition,
)
from .manifest import (
    BenchmarkManifest,
    CoverageMatrix,
    coverage_matrix,
    diff_coverage,
    load_bundled_manifest,
    load_reference_coverage,
    manifest_hash,
    parse_manifest,
    serialize_manifest,
)
from .campaign import (
    CampaignConfig,
    CampaignLog,
    CampaignState,
    CampaignStore,
    ManifestRef,
    Outcome,
    TrialRecord,
    create_campaign,
    progress,
    record_trial,
    replay,
)
from .aggregate import (
    AggregateReport,
    RateCell,
    axis_rates,
    build_report,
    category_rates,
    composition_rates,
    condition_rates,
    export_report,
)
from .proposer import (
    HttpBackend,
    MockBackend,
    Proposal,
    ProposalRequest,
    SUPPORTED_AXES,
    build_prompt,
    parse_proposals,
    proposal_to_condition,
    propose_conditions,
    request_proposals,
)

__version__ = "0.1.0"
