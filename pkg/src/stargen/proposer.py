"""VLM-assisted condition proposals.

Given a base task (scene image + instruction) and a target axis, the proposer
builds a prompt asking a vision-language model to suggest a fixed number of
atomic changes, constrains the reply to a JSON array of
``{visualChange, languageChange}`` objects (fields present exactly as the
axis's category implies), parses and screens the reply, and converts accepted
proposals into draft manifest conditions.

Visual changes are *instructions for an image-editing model*; nothing here
edits images. Behavioral change cannot be expressed through either field, so
for axes whose category includes the behavioral modality the draft condition
carries a synthesized behavioral attestation that a human must confirm.

Five axes have tuned prompt wording (V-OBJ, S-PROP, VB-POSE, SB-VRB,
VSB-NOBJ); the VSB-NOBJ wording is the reference template and the other four
are extrapolated from the axis descriptions. Remaining axes are reachable
only behind an experimental flag with generic wording and no acceptance
guarantees.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import StargenError
from .taxonomy import (
    AxisDescriptor, AxisRegistry, BaseTask, BehavioralChange, Condition,
    DEFAULT_REGISTRY, Modality, PerturbationDelta, VisualChange,
)

SUPPORTED_AXES = ("V-OBJ", "S-PROP", "VB-POSE", "SB-VRB", "VSB-NOBJ")

VISUAL_FIELD = "visualChange"
LANGUAGE_FIELD = "languageChange"

DEFAULT_COUNT = 3
DEFAULT_TIMEOUT_S = 30.0
DEFAULT_ATTEMPTS = 3
BACKOFF_SCHEDULE_S = (1.0, 2.0, 4.0)


class ProposerError(StargenError):
    code = "ProposerError"


class UnsupportedAxis(ProposerError):
    code = "UnsupportedAxis"


class ProposalSchemaError(ProposerError):
    code = "SchemaError"


class AllRejected(ProposerError):
    code = "AllRejected"


class TransportError(ProposerError):
    code = "TransportError"


class RequestTimeout(ProposerError):
    code = "Timeout"


class AuthFailure(ProposerError):
    code = "AuthFailure"


@dataclass(frozen=True)
class ProposalRequest:
    base_task: BaseTask
    axis: AxisDescriptor
    count: int = DEFAULT_COUNT
    image: bytes = b""
    image_media_type: str = "image/jpeg"
    experimental: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.axis.id not in SUPPORTED_AXES and not self.experimental:
            raise UnsupportedAxis(
                f"axis {self.axis.id} is not among the supported axes "
                f"{', '.join(SUPPORTED_AXES)}; pass experimental=True to force")


@dataclass(frozen=True)
class Proposal:
    visual_change: str | None = None
    language_change: str | None = None

    def __post_init__(self):
        if self.visual_change is None and self.language_change is None:
            raise ValueError("a proposal must carry at least one change field")


@dataclass(frozen=True)
class PromptSpec:
    text: str
    response_schema: dict


# Axis-specific wording: what kind of single change to suggest, and the
# closing single-change reminder. VSB-NOBJ is the reference wording; the
# other four are extrapolated from the axis descriptions.
_CHANGE_CLAUSES = {
    "VSB-NOBJ": (
        "changing a single task-relevant object to a new object with a "
        "different visual appearance, semantic description, and physical "
        "characteristics",
        "Remember to only change one object, and to only change an object "
        "that is involved in the task.",
    ),
    "V-OBJ": (
        "changing the visual appearance of a single task-relevant object, "
        "such as its color, in a way that does not affect how the task is "
        "performed",
        "Remember to only change the appearance of one object, and to only "
        "change an object that is involved in the task.",
    ),
    "S-PROP": (
        "rewording the language instruction to reference a task-relevant "
        "object by a physical property such as its color, mass, or size, "
        "without changing the task itself",
        "Remember to only change the language instruction, and to keep the "
        "same underlying task.",
    ),
    "VB-POSE": (
        "changing the pose of a single task-relevant object in the scene, "
        "such as its position or orientation",
        "Remember to only change the pose of one object, and to only change "
        "an object that is involved in the task.",
    ),
    "SB-VRB": (
        "changing the action verb in the instruction so that a new behavior "
        "must be performed on a task-relevant object",
        "Remember to only change the action to perform, and to keep the same "
        "objects in the scene.",
    ),
}


def required_fields(axis: AxisDescriptor) -> tuple[str, ...]:
    fields = []
    if Modality.VISUAL in axis.category:
        fields.append(VISUAL_FIELD)
    if Modality.SEMANTIC in axis.category:
        fields.append(LANGUAGE_FIELD)
    return tuple(fields)


def response_schema(axis: AxisDescriptor) -> dict:
    """JSON-schema style descriptor of the expected reply: an array of
    objects carrying exactly the fields the axis's category implies."""
    fields = required_fields(axis)
    properties = {}
    if VISUAL_FIELD in fields:
        properties[VISUAL_FIELD] = {
            "type": "string",
            "description": "Text prompt for an image-editing model to modify the task",
            "nullable": False,
        }
    if LANGUAGE_FIELD in fields:
        properties[LANGUAGE_FIELD] = {
            "type": "string",
            "description": "Updated language instruction for the modified task",
            "nullable": False,
        }
    return {
        "description": "Changes to a task along one generalization axis.",
        "type": "array",
        "items": {
            "type": "object",
            "properties": properties,
            "required": list(fields),
        },
    }


def build_prompt(req: ProposalRequest) -> PromptSpec:
    """Prompt text plus response-schema descriptor for one proposal request.

    The text frames the scene with the base instruction quoted, states the
    axis-specific kind of change and the count, asks for exactly the fields
    the axis's modalities imply, and closes with the single-change reminder.
    """
    axis = req.axis
    clause, reminder = _CHANGE_CLAUSES.get(axis.id, (
        f"applying a single change of the kind: {axis.description.rstrip('.')}".lower(),
        "Remember to apply only a single change to the task.",
    ))
    fields = required_fields(axis)
    wants_visual = VISUAL_FIELD in fields
    wants_language = LANGUAGE_FIELD in fields

    if wants_visual and wants_language:
        request_sentence = (
            f"Do this by providing {req.count} updated language instructions "
            f"for each of the modified tasks, and corresponding text prompts "
            f"to an image-editing model that would each perform a single "
            f"change to the scene to create the modified task."
        )
    elif wants_visual:
        request_sentence = (
            f"Do this by providing {req.count} text prompts to an "
            f"image-editing model that would each perform a single change to "
            f"the scene to create the modified task."
        )
    else:
        request_sentence = (
            f"Do this by providing {req.count} updated language instructions "
            f"for each of the modified tasks."
        )

    text = (
        f"This is an image of a scene where a robot is to complete the task "
        f"\"{req.base_task.instruction}\". "
        f"Suggest {req.count} changes to the task that each involve {clause}. "
        f"{request_sentence} {reminder}"
    )
    return PromptSpec(text=text, response_schema=response_schema(axis))


# --- backends ---------------------------------------------------------------------

class VlmBackend(Protocol):
    def generate(self, req: ProposalRequest, prompt: PromptSpec) -> bytes: ...


@dataclass
class MockBackend:
    """Deterministic backend serving canned fixture files named
    ``<axis>__<base_task_id>.json``. Read-only; bit-identical across runs."""

    fixtures_dir: Path

    def generate(self, req: ProposalRequest, prompt: PromptSpec) -> bytes:
        path = Path(self.fixtures_dir) / f"{req.axis.id}__{req.base_task.id}.json"
        if not path.exists():
            raise TransportError(f"no mock fixture at {path}")
        return path.read_bytes()


@dataclass
class HttpBackend:
    """Single-request JSON wire contract: prompt text, inline base64 image and
    the response-schema descriptor go out; the structured proposal array comes
    back. Transient failures (timeouts, connection errors, 5xx) retry with
    exponential backoff; auth failures never retry."""

    endpoint: str
    model: str
    api_key: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S
    attempts: int = DEFAULT_ATTEMPTS
    backoff_s: tuple[float, ...] = BACKOFF_SCHEDULE_S
    sleep: Callable[[float], None] = time.sleep
    transport: httpx.BaseTransport | None = None

    def _request_body(self, req: ProposalRequest, prompt: PromptSpec) -> dict:
        return {
            "model": self.model,
            "prompt": prompt.text,
            "image": {
                "mediaType": req.image_media_type,
                "data": base64.b64encode(req.image).decode("ascii"),
            },
            "responseSchema": prompt.response_schema,
        }

    def generate(self, req: ProposalRequest, prompt: PromptSpec) -> bytes:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = self._request_body(req, prompt)
        last_error: Exception | None = None
        timed_out = False
        with httpx.Client(timeout=self.timeout_s, transport=self.transport) as client:
            for attempt in range(self.attempts):
                try:
                    resp = client.post(self.endpoint, json=body, headers=headers)
                except httpx.TimeoutException as err:
                    last_error, timed_out = err, True
                except httpx.HTTPError as err:
                    last_error = err
                else:
                    if resp.status_code in (401, 403):
                        raise AuthFailure(
                            f"backend rejected credentials (HTTP {resp.status_code})")
                    if resp.status_code < 400:
                        return resp.content
                    if resp.status_code < 500:
                        raise TransportError(
                            f"backend returned HTTP {resp.status_code}")
                    last_error = TransportError(
                        f"backend returned HTTP {resp.status_code}")
                if attempt < self.attempts - 1:
                    idx = min(attempt, len(self.backoff_s) - 1)
                    self.sleep(self.backoff_s[idx])
        if timed_out:
            raise RequestTimeout(
                f"backend did not answer within {self.timeout_s}s "
                f"after {self.attempts} attempts") from last_error
        raise TransportError(
            f"backend unreachable after {self.attempts} attempts: {last_error}"
        ) from last_error


def request_proposals(req: ProposalRequest, backend: VlmBackend) -> bytes:
    """Raw response bytes for a proposal request."""
    return backend.generate(req, build_prompt(req))


# --- parsing & conversion -----------------------------------------------------------

def parse_proposals(data: bytes, axis: AxisDescriptor) -> tuple[list[Proposal], list[str]]:
    """Validated proposals plus per-item rejection reasons.

    The body must be a JSON array of objects; each item must carry exactly
    the fields the axis's category implies, as non-empty strings. Raises
    :class:`AllRejected` if nothing survives screening.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ProposalSchemaError(f"response is not valid JSON: {err}") from err
    if not isinstance(doc, list):
        raise ProposalSchemaError("response must be a JSON array of objects")

    expected = set(required_fields(axis))
    proposals: list[Proposal] = []
    reasons: list[str] = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise ProposalSchemaError(f"item {i} is not an object")
        missing = [f for f in sorted(expected)
                   if not isinstance(item.get(f), str) or not item[f].strip()]
        if missing:
            reasons.append(
                f"item {i}: missing or empty field(s) {', '.join(missing)} "
                f"required for axis {axis.id}")
            continue
        extra = sorted(set(item) - expected)
        if extra:
            reasons.append(
                f"item {i}: field(s) {', '.join(extra)} not allowed for "
                f"axis {axis.id}")
            continue
        proposals.append(Proposal(
            visual_change=item.get(VISUAL_FIELD),
            language_change=item.get(LANGUAGE_FIELD),
        ))
    if not proposals:
        raise AllRejected(
            "no valid proposals in response: " + ("; ".join(reasons) or "empty array"))
    return proposals, reasons


def proposal_to_condition(proposal: Proposal, req: ProposalRequest, index: int) -> Condition:
    """Draft condition for one accepted proposal.

    For axes whose category includes the behavioral modality the delta gets a
    synthesized behavioral attestation (neither proposal field can express
    behavior); the draft still validates against the axis by construction but
    needs human confirmation before entering a manifest.
    """
    axis = req.axis
    visual = None
    if Modality.VISUAL in axis.category:
        visual = VisualChange(proposal.visual_change or "")
    instruction = None
    if Modality.SEMANTIC in axis.category:
        instruction = proposal.language_change
    behavioral = None
    if Modality.BEHAVIORAL in axis.category:
        behavioral = BehavioralChange(f"implied by axis {axis.id}")
    delta = PerturbationDelta(
        factor="vlm-proposed",
        visual=visual,
        instruction=instruction,
        behavioral=behavioral,
    )
    return Condition(
        id=f"{req.base_task.id}_{axis.id}_{index}",
        base_task=req.base_task.id,
        axis=axis.id,
        delta=delta,
        notes="draft from VLM proposal; requires human review before acceptance",
        scene_image=req.base_task.scene.image,
    )


def propose_conditions(req: ProposalRequest, backend: VlmBackend,
                       registry: AxisRegistry = DEFAULT_REGISTRY,
                       ) -> tuple[list[Condition], list[Proposal], list[str]]:
    """Full pipeline: request, parse, convert. Every returned draft passes
    condition validation against the requested axis."""
    from .taxonomy import validate_condition

    raw = request_proposals(req, backend)
    proposals, reasons = parse_proposals(raw, req.axis)
    drafts = []
    for k, proposal in enumerate(proposals, start=1):
        draft = proposal_to_condition(proposal, req, k)
        validate_condition(req.base_task, draft, registry)
        drafts.append(draft)
    return drafts, proposals, reasons


def bundled_fixtures_dir() -> Path:
    """Directory of mock proposal fixtures shipped with the package."""
    from importlib import resources

    return Path(str(resources.files("stargen.data").joinpath("proposals")))
