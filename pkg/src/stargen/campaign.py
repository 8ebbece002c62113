"""Evaluation campaigns: append-only trial logs with deterministic replay.

A campaign log is a UTF-8 JSON-lines file ``<campaign-id>.stargen.log``: one
``created`` event carrying the config and the resolved evaluation grid,
followed by ``trial`` events. Every line embeds a truncated SHA-256 checksum
and a strictly increasing sequence number, so replay can detect truncation,
gaps, and tampering, and always rebuilds the same state.

The trial protocol mirrors a human-judged evaluation: each (model, condition)
cell takes a fixed number of trials (default 5); an episode either succeeds,
fails, reaches an irrecoverable state, or times out after the step budget
(default 100, and a timeout must report exactly that budget). Extra trials
beyond the quota need an explicit overflow flag and stay tagged so default
aggregates can exclude them.

Writers hold an advisory lock file ``<campaign-id>.lock`` next to the log;
concurrent readers replay immutable snapshots freely.
"""

from __future__ import annotations

import enum
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterator

from .canonical import canonical_bytes, seal_event, verify_event
from .errors import StargenError
from .manifest import BenchmarkManifest, manifest_hash

LOG_SUFFIX = ".stargen.log"
LOCK_SUFFIX = ".lock"

SCOPES = ("tasks", "compositions", "all")


class CampaignError(StargenError):
    code = "CampaignError"


class DuplicateCampaignId(CampaignError):
    code = "DuplicateCampaignId"


class ManifestHashMismatch(CampaignError):
    code = "ManifestHashMismatch"


class UnknownCampaign(CampaignError):
    code = "UnknownCampaign"


class UnknownModel(CampaignError):
    code = "UnknownModel"


class UnknownCondition(CampaignError):
    code = "UnknownCondition"


class QuotaExceeded(CampaignError):
    code = "QuotaExceeded"


class ProtocolViolation(CampaignError):
    code = "ProtocolViolation"


class MissingCreationEvent(CampaignError):
    code = "MissingCreationEvent"


class CorruptLine(CampaignError):
    code = "CorruptLine"

    def __init__(self, message: str, *, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LockHeld(CampaignError):
    code = "LockHeld"


class Outcome(enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    IRRECOVERABLE = "irrecoverable"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class ManifestRef:
    name: str
    hash: str


@dataclass(frozen=True)
class CampaignConfig:
    id: str
    manifest: ManifestRef
    models: tuple[str, ...]
    trials_per_condition: int = 5
    max_steps: int = 100
    scope: str = "tasks"

    def __post_init__(self):
        if not self.models:
            raise ValueError("a campaign needs at least one model")
        if self.trials_per_condition < 1:
            raise ValueError("trials_per_condition must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")


@dataclass(frozen=True)
class TrialRecord:
    model: str
    condition: str
    outcome: Outcome
    steps: int
    timestamp: datetime
    note: str = ""
    overflow: bool = False
    idempotency_key: str | None = None
    campaign: str = ""


def utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


# --- events ---------------------------------------------------------------------

def _config_doc(config: CampaignConfig) -> dict:
    return {
        "id": config.id,
        "manifest": {"name": config.manifest.name, "hash": config.manifest.hash},
        "models": list(config.models),
        "trials_per_condition": config.trials_per_condition,
        "max_steps": config.max_steps,
        "scope": config.scope,
    }


def creation_event(config: CampaignConfig, conditions: tuple[tuple[str, str], ...]) -> dict:
    return seal_event({
        "seq": 1,
        "event": "created",
        "config": _config_doc(config),
        "conditions": [{"id": cid, "kind": kind} for cid, kind in conditions],
    })


def trial_event(seq: int, trial: TrialRecord) -> dict:
    payload = {
        "seq": seq,
        "event": "trial",
        "model": trial.model,
        "condition": trial.condition,
        "outcome": trial.outcome.value,
        "steps": trial.steps,
        "ts": format_timestamp(trial.timestamp),
        "note": trial.note,
    }
    if trial.overflow:
        payload["overflow"] = True
    if trial.idempotency_key:
        payload["idem"] = trial.idempotency_key
    return seal_event(payload)


def scope_conditions(manifest: BenchmarkManifest, scope: str) -> tuple[tuple[str, str], ...]:
    """The evaluation grid rows for a scope, in manifest order. Base tasks are
    valid condition ids (their cells measure in-distribution performance)."""
    rows = manifest.ids_by_kind()
    if scope == "tasks":
        return tuple(r for r in rows if r[1] in ("base", "perturbed"))
    if scope == "compositions":
        return tuple(r for r in rows if r[1] == "composition")
    return rows


@dataclass(frozen=True)
class CampaignLog:
    """An in-memory campaign log: the creation event plus trial events."""

    events: tuple[dict, ...]

    def to_bytes(self) -> bytes:
        return "".join(
            json.dumps(e, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
            for e in self.events
        ).encode("utf-8")


def create_campaign(config: CampaignConfig, manifest: BenchmarkManifest) -> CampaignLog:
    """A fresh log with the single creation event; the progress grid starts at
    0/N everywhere. The config must reference the manifest by content hash."""
    actual = manifest_hash(manifest)
    if config.manifest.hash != actual:
        raise ManifestHashMismatch(
            f"config references manifest hash {config.manifest.hash[:12]}..., "
            f"manifest {manifest.name!r} hashes to {actual[:12]}..."
        )
    conditions = scope_conditions(manifest, config.scope)
    if not conditions:
        raise CampaignError(f"scope {config.scope!r} selects no conditions")
    return CampaignLog(events=(creation_event(config, conditions),))


# --- state & replay ---------------------------------------------------------------

@dataclass
class CellState:
    required: int
    done: int = 0          # non-overflow trials recorded
    successes: int = 0     # non-overflow successes
    overflow: int = 0      # quota-exceeding trials (tagged, excluded by default)

    @property
    def attempted(self) -> bool:
        return self.done > 0 or self.overflow > 0

    @property
    def full(self) -> bool:
        return self.done >= self.required


@dataclass
class CampaignState:
    config: CampaignConfig
    conditions: tuple[tuple[str, str], ...]
    trials: list[TrialRecord] = field(default_factory=list)
    cells: dict[tuple[str, str], CellState] = field(default_factory=dict)
    next_seq: int = 2
    idempotency: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.cells:
            for cid, _ in self.conditions:
                for model in self.config.models:
                    self.cells[(model, cid)] = CellState(
                        required=self.config.trials_per_condition)

    @property
    def condition_ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.conditions)

    def kind_of(self, condition_id: str) -> str:
        for cid, kind in self.conditions:
            if cid == condition_id:
                return kind
        raise UnknownCondition(f"condition {condition_id!r} not in campaign scope")

    @property
    def total_trials(self) -> int:
        return len(self.trials)

    @property
    def expected_total(self) -> int:
        return len(self.conditions) * len(self.config.models) * self.config.trials_per_condition

    def canonical_snapshot(self) -> bytes:
        """Deterministic byte form of the replayed state. Timestamps and free
        text notes are log payload, not state: two logs that differ only
        there replay to identical snapshots."""
        return canonical_bytes({
            "config": _config_doc(self.config),
            "conditions": [{"id": c, "kind": k} for c, k in self.conditions],
            "trials": [
                {
                    "model": t.model,
                    "condition": t.condition,
                    "outcome": t.outcome.value,
                    "steps": t.steps,
                    "overflow": t.overflow,
                }
                for t in self.trials
            ],
        })


def _validate_trial(state: CampaignState, trial: TrialRecord) -> TrialRecord:
    cfg = state.config
    if trial.model not in cfg.models:
        raise UnknownModel(f"model {trial.model!r} not in campaign {cfg.id!r}")
    if trial.condition not in state.condition_ids:
        raise UnknownCondition(
            f"condition {trial.condition!r} not in campaign {cfg.id!r} scope")
    if trial.steps < 0 or trial.steps > cfg.max_steps:
        raise ProtocolViolation(
            f"steps {trial.steps} outside [0, {cfg.max_steps}]")
    if trial.outcome is Outcome.TIMEOUT and trial.steps != cfg.max_steps:
        raise ProtocolViolation(
            f"timeout must report steps == max_steps ({cfg.max_steps}), got {trial.steps}")
    cell = state.cells[(trial.model, trial.condition)]
    if cell.full:
        if not trial.overflow:
            raise QuotaExceeded(
                f"cell ({trial.model}, {trial.condition}) already has "
                f"{cell.done}/{cell.required} trials")
        return replace(trial, overflow=True, campaign=cfg.id)
    return replace(trial, overflow=False, campaign=cfg.id)


def apply_trial(state: CampaignState, trial: TrialRecord) -> TrialRecord:
    """Validate a trial against the protocol and fold it into the state.
    Returns the stored record (overflow tag normalized to the actual quota
    status at append time)."""
    stored = _validate_trial(state, trial)
    cell = state.cells[(stored.model, stored.condition)]
    if stored.overflow:
        cell.overflow += 1
    else:
        cell.done += 1
        if stored.outcome is Outcome.SUCCESS:
            cell.successes += 1
    state.trials.append(stored)
    if stored.idempotency_key:
        state.idempotency[stored.idempotency_key] = state.next_seq
    state.next_seq += 1
    return stored


def record_trial(log: CampaignLog, trial: TrialRecord) -> CampaignLog:
    """Append one trial event; the log is otherwise immutable."""
    state = replay_events(log.events)
    stored = apply_trial(state, trial)
    event = trial_event(state.next_seq - 1, stored)
    return CampaignLog(events=log.events + (event,))


def _parse_created(event: dict, line: int) -> CampaignState:
    try:
        cfg_doc = event["config"]
        ref = cfg_doc["manifest"]
        config = CampaignConfig(
            id=cfg_doc["id"],
            manifest=ManifestRef(name=ref["name"], hash=ref["hash"]),
            models=tuple(cfg_doc["models"]),
            trials_per_condition=cfg_doc["trials_per_condition"],
            max_steps=cfg_doc["max_steps"],
            scope=cfg_doc["scope"],
        )
        conditions = tuple((c["id"], c["kind"]) for c in event["conditions"])
    except (KeyError, TypeError, ValueError) as err:
        raise CorruptLine(f"malformed creation event: {err}", line=line) from err
    if not conditions:
        raise CorruptLine("creation event lists no conditions", line=line)
    return CampaignState(config=config, conditions=conditions)


def _parse_trial(event: dict, line: int) -> TrialRecord:
    try:
        return TrialRecord(
            model=event["model"],
            condition=event["condition"],
            outcome=Outcome(event["outcome"]),
            steps=event["steps"],
            timestamp=parse_timestamp(event["ts"]),
            note=event.get("note", ""),
            overflow=bool(event.get("overflow", False)),
            idempotency_key=event.get("idem"),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise CorruptLine(f"malformed trial event: {err}", line=line) from err


def replay_events(events: Iterator[dict] | tuple[dict, ...]) -> CampaignState:
    state: CampaignState | None = None
    for line, event in enumerate(events, start=1):
        if event.get("seq") != line:
            raise CorruptLine(
                f"sequence gap: expected seq {line}, got {event.get('seq')}", line=line)
        if not verify_event(event):
            raise CorruptLine("bad checksum", line=line)
        kind = event.get("event")
        if line == 1:
            if kind != "created":
                raise MissingCreationEvent("first event must be the creation event")
            state = _parse_created(event, line)
            continue
        if kind == "created":
            raise CorruptLine("duplicate creation event", line=line)
        if kind != "trial":
            raise CorruptLine(f"unknown event kind {kind!r}", line=line)
        assert state is not None
        trial = _parse_trial(event, line)
        try:
            apply_trial(state, trial)
        except CampaignError as err:
            raise CorruptLine(f"protocol violation in log: {err}", line=line) from err
    if state is None:
        raise MissingCreationEvent("log contains no events")
    return state


def replay(data: bytes) -> CampaignState:
    """Rebuild campaign state from raw log bytes. The state is a pure function
    of event order; re-replaying gives an identical state."""
    state_events = []
    for line, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not raw.strip():
            raise CorruptLine("blank line", line=line)
        try:
            event = json.loads(raw)
        except json.JSONDecodeError as err:
            raise CorruptLine(f"not valid JSON: {err.msg}", line=line) from err
        if not isinstance(event, dict):
            raise CorruptLine("event is not an object", line=line)
        state_events.append(event)
    return replay_events(tuple(state_events))


# --- progress ---------------------------------------------------------------------

@dataclass(frozen=True)
class ProgressCell:
    model: str
    condition: str
    kind: str
    done: int
    required: int
    successes: int
    overflow: int

    @property
    def attempted(self) -> bool:
        return self.done > 0 or self.overflow > 0

    def render(self) -> str:
        return f"{self.done}/{self.required}" if self.attempted else "--"


def progress(state: CampaignState) -> tuple[ProgressCell, ...]:
    """The (model x condition) grid in condition-major, model-minor order
    (the order a physical evaluator batches per-condition resets)."""
    cells = []
    for cid, kind in state.conditions:
        for model in state.config.models:
            cell = state.cells[(model, cid)]
            cells.append(ProgressCell(
                model=model, condition=cid, kind=kind,
                done=cell.done, required=cell.required,
                successes=cell.successes, overflow=cell.overflow,
            ))
    return tuple(cells)


def remaining_cells(state: CampaignState) -> tuple[ProgressCell, ...]:
    return tuple(c for c in progress(state) if c.done < c.required)


# --- storage ------------------------------------------------------------------------

@contextmanager
def advisory_lock(path: Path):
    """Create-exclusive lock file; failure to acquire is a hard error."""
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise LockHeld(f"lock file {path} already held") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        try:
            path.unlink()
        except FileNotFoundError:
            pass


class CampaignWriter:
    """Single writer over one campaign log: validates against the live state
    and appends one sealed line per trial."""

    def __init__(self, state: CampaignState, handle: IO[bytes]):
        self.state = state
        self._handle = handle

    def record(self, trial: TrialRecord) -> int:
        if trial.idempotency_key and trial.idempotency_key in self.state.idempotency:
            return self.state.idempotency[trial.idempotency_key]
        stored = apply_trial(self.state, trial)
        seq = self.state.next_seq - 1
        event = trial_event(seq, stored)
        line = json.dumps(event, sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False) + "\n"
        self._handle.write(line.encode("utf-8"))
        self._handle.flush()
        return seq

    def seen_idempotency_key(self, key: str) -> int | None:
        return self.state.idempotency.get(key)


class CampaignStore:
    """Campaign logs in one directory, one ``<id>.stargen.log`` per campaign
    with its advisory ``<id>.lock`` beside it."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def log_path(self, campaign_id: str) -> Path:
        return self.directory / f"{campaign_id}{LOG_SUFFIX}"

    def lock_path(self, campaign_id: str) -> Path:
        return self.directory / f"{campaign_id}{LOCK_SUFFIX}"

    def list_campaigns(self) -> tuple[str, ...]:
        names = sorted(p.name[: -len(LOG_SUFFIX)]
                       for p in self.directory.glob(f"*{LOG_SUFFIX}"))
        return tuple(names)

    def create(self, config: CampaignConfig, manifest: BenchmarkManifest) -> Path:
        path = self.log_path(config.id)
        if path.exists():
            raise DuplicateCampaignId(f"campaign {config.id!r} already exists at {path}")
        log = create_campaign(config, manifest)
        self.directory.mkdir(parents=True, exist_ok=True)
        with advisory_lock(self.lock_path(config.id)):
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(log.to_bytes())
            tmp.replace(path)
        return path

    def read_state(self, campaign_id: str) -> CampaignState:
        path = self.log_path(campaign_id)
        if not path.exists():
            raise UnknownCampaign(f"no campaign log at {path}")
        return replay(path.read_bytes())

    @contextmanager
    def writer(self, campaign_id: str) -> Iterator[CampaignWriter]:
        path = self.log_path(campaign_id)
        if not path.exists():
            raise UnknownCampaign(f"no campaign log at {path}")
        with advisory_lock(self.lock_path(campaign_id)):
            state = replay(path.read_bytes())
            with open(path, "ab") as handle:
                yield CampaignWriter(state, handle)

    def append(self, campaign_id: str, trial: TrialRecord) -> int:
        with self.writer(campaign_id) as writer:
            return writer.record(trial)
