"""HTTP/JSON service for the web console.

Serves the manifest, campaign progress, trial submission, aggregates, and
proposal drafting over a campaign directory. One writer owns each campaign
log: request handlers submit trial events to it over an ordered queue and
wait for acknowledgment, so concurrent clients serialize in arrival order
with no sequence gaps. Read endpoints serve snapshots that refresh after
every write.

Accepted proposal drafts go to a draft copy of the manifest
(``<name>.draft.stargen.json``); the original file is only rewritten when the
caller sets the explicit commit flag.

Every non-2xx response body is ``{"status", "code", "message", "detail"}``
with a stable machine-readable code mirroring the module error names.
"""

from __future__ import annotations

import queue
import threading
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import aggregate, config as config_mod
from .campaign import (
    CampaignState, CampaignStore, CampaignWriter, Outcome, TrialRecord,
    advisory_lock, progress, replay, utcnow,
)
from .errors import StargenError
from .manifest import (
    BenchmarkManifest, MANIFEST_SUFFIX, ManifestValidationError,
    condition_document, manifest_document, parse_condition, read_manifest_file,
    validate_manifest, with_condition, write_manifest_file,
)
from .proposer import ProposalRequest, ProposerError, VlmBackend, propose_conditions
from .taxonomy import DEFAULT_REGISTRY

DEFAULT_PORT = 8377

_STATUS_BY_CODE = {
    "UnknownCampaign": 404,
    "UnknownCondition": 404,
    "UnknownModel": 404,
    "ReferenceError": 404,
    "QuotaExceeded": 409,
    "DuplicateCampaignId": 409,
    "LockHeld": 503,
    "UnsupportedAxis": 400,
    "UnsupportedFormat": 400,
    "TransportError": 502,
    "Timeout": 502,
    "AuthFailure": 502,
}
_DEFAULT_STATUS = 422  # validation-style failures


def _status_for(err: StargenError) -> int:
    if isinstance(err, ProposerError) and err.code in ("SchemaError", "AllRejected"):
        return 502  # the backend answered garbage, not the client
    return _STATUS_BY_CODE.get(err.code, _DEFAULT_STATUS)


class TrialBody(BaseModel):
    model: str
    condition: str
    outcome: str
    steps: int | None = None
    note: str = ""
    overflow: bool = False
    idempotency_key: str | None = None


class ProposalBody(BaseModel):
    base_task: str
    axis: str
    count: int = 3


class AcceptConditionBody(BaseModel):
    condition: dict
    commit: bool = False


class _LogWriter:
    """Owns one campaign log: holds the advisory lock, applies submitted
    trials in arrival order on a single worker thread, and exposes
    post-write-consistent reads."""

    def __init__(self, store: CampaignStore, campaign_id: str):
        self._lock_ctx = advisory_lock(store.lock_path(campaign_id))
        self._lock_ctx.__enter__()
        try:
            path = store.log_path(campaign_id)
            state = replay(path.read_bytes())
            self._handle = open(path, "ab")
            self._writer = CampaignWriter(state, self._handle)
        except BaseException:
            self._lock_ctx.__exit__(None, None, None)
            raise
        self._queue: queue.Queue = queue.Queue()
        self._mutex = threading.Lock()
        self._worker = threading.Thread(target=self._run, daemon=True)
        self._worker.start()

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            trial, box, done = item
            try:
                with self._mutex:
                    duplicate = (trial.idempotency_key is not None and
                                 trial.idempotency_key in self._writer.state.idempotency)
                    box["duplicate"] = duplicate
                    box["seq"] = self._writer.record(trial)
            except Exception as err:  # handed back to the submitting request
                box["error"] = err
            finally:
                done.set()

    def submit(self, trial: TrialRecord) -> tuple[int, bool]:
        box: dict[str, Any] = {}
        done = threading.Event()
        self._queue.put((trial, box, done))
        done.wait()
        if "error" in box:
            raise box["error"]
        return box["seq"], box["duplicate"]

    def read(self, fn: Callable[[CampaignState], Any]) -> Any:
        with self._mutex:
            return fn(self._writer.state)

    def close(self) -> None:
        self._queue.put(None)
        self._worker.join(timeout=5)
        self._handle.close()
        self._lock_ctx.__exit__(None, None, None)


class ConsoleState:
    def __init__(self, campaign_dir: Path, manifest_path: Path | None = None,
                 backend: VlmBackend | None = None, registry=DEFAULT_REGISTRY):
        self.campaign_dir = Path(campaign_dir)
        self.registry = registry
        self.manifest_path = manifest_path or self._discover_manifest()
        self.manifest: BenchmarkManifest = read_manifest_file(self.manifest_path, registry)
        self.store = CampaignStore(self.campaign_dir)
        self.backend = backend or config_mod.build_backend(
            config_mod.load_settings(self.campaign_dir / config_mod.DEFAULT_CONFIG_NAME))
        self._writers: dict[str, _LogWriter] = {}
        self._writers_mutex = threading.Lock()

    def _discover_manifest(self) -> Path:
        candidates = sorted(
            p for p in self.campaign_dir.glob(f"*{MANIFEST_SUFFIX}")
            if not p.name.endswith(f".draft{MANIFEST_SUFFIX}")
        )
        if not candidates:
            raise FileNotFoundError(
                f"no *{MANIFEST_SUFFIX} manifest in {self.campaign_dir}")
        return candidates[0]

    @property
    def draft_path(self) -> Path:
        name = self.manifest_path.name[: -len(MANIFEST_SUFFIX)]
        return self.manifest_path.with_name(f"{name}.draft{MANIFEST_SUFFIX}")

    def draft_manifest(self) -> BenchmarkManifest:
        if self.draft_path.exists():
            return read_manifest_file(self.draft_path, self.registry)
        return self.manifest

    def writer(self, campaign_id: str) -> _LogWriter:
        with self._writers_mutex:
            if campaign_id not in self._writers:
                self._writers[campaign_id] = _LogWriter(self.store, campaign_id)
            return self._writers[campaign_id]

    def read_state(self, campaign_id: str) -> Any:
        """Run a computation over a consistent campaign snapshot."""
        with self._writers_mutex:
            writer = self._writers.get(campaign_id)
        if writer is not None:
            return writer
        return None

    def compute(self, campaign_id: str, fn: Callable[[CampaignState], Any]) -> Any:
        writer = self.read_state(campaign_id)
        if writer is not None:
            return writer.read(fn)
        return fn(self.store.read_state(campaign_id))

    def close(self) -> None:
        with self._writers_mutex:
            writers, self._writers = dict(self._writers), {}
        for writer in writers.values():
            writer.close()


def create_app(campaign_dir: str | Path, manifest_path: str | Path | None = None,
               backend: VlmBackend | None = None,
               registry=DEFAULT_REGISTRY) -> FastAPI:
    console = ConsoleState(
        Path(campaign_dir),
        Path(manifest_path) if manifest_path else None,
        backend=backend, registry=registry,
    )

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        try:
            yield
        finally:
            console.close()

    app = FastAPI(title="stargen console api", lifespan=lifespan)
    app.state.console = console
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(StargenError)
    async def stargen_error_handler(_: Request, err: StargenError):
        detail: Any = None
        if isinstance(err, ManifestValidationError):
            detail = [issue.describe() for issue in err.issues]
        return JSONResponse(
            status_code=_status_for(err),
            content={
                "status": _status_for(err),
                "code": err.code,
                "message": str(err),
                "detail": detail,
            },
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/manifest")
    def get_manifest(draft: bool = False):
        m = console.draft_manifest() if draft else console.manifest
        return manifest_document(m)

    @app.get("/api/campaigns")
    def list_campaigns():
        out = []
        for campaign_id in console.store.list_campaigns():
            def summarize(state: CampaignState) -> dict:
                cfg = state.config
                return {
                    "id": cfg.id,
                    "models": list(cfg.models),
                    "trials_per_condition": cfg.trials_per_condition,
                    "max_steps": cfg.max_steps,
                    "scope": cfg.scope,
                    "manifest": {"name": cfg.manifest.name, "hash": cfg.manifest.hash},
                    "total_trials": state.total_trials,
                    "expected_total": state.expected_total,
                }
            out.append(console.compute(campaign_id, summarize))
        return out

    @app.get("/api/campaigns/{campaign_id}/progress")
    def get_progress(campaign_id: str):
        def build(state: CampaignState) -> dict:
            return {
                "campaign": state.config.id,
                "models": list(state.config.models),
                "total_trials": state.total_trials,
                "expected_total": state.expected_total,
                "max_steps": state.config.max_steps,
                "cells": [
                    {
                        "model": cell.model,
                        "condition": cell.condition,
                        "kind": cell.kind,
                        "done": cell.done,
                        "required": cell.required,
                        "successes": cell.successes,
                        "overflow": cell.overflow,
                        "attempted": cell.attempted,
                    }
                    for cell in progress(state)
                ],
            }
        return console.compute(campaign_id, build)

    @app.post("/api/campaigns/{campaign_id}/trials", status_code=201)
    def post_trial(campaign_id: str, body: TrialBody, response: Response):
        if not console.store.log_path(campaign_id).exists():
            from .campaign import UnknownCampaign
            raise UnknownCampaign(f"no campaign {campaign_id!r}")
        writer = console.writer(campaign_id)
        try:
            outcome = Outcome(body.outcome)
        except ValueError:
            from .campaign import ProtocolViolation
            raise ProtocolViolation(
                f"unknown outcome {body.outcome!r}; expected one of "
                f"{', '.join(o.value for o in Outcome)}") from None
        steps = body.steps
        if steps is None:
            max_steps = writer.read(lambda s: s.config.max_steps)
            if outcome is not Outcome.TIMEOUT:
                from .campaign import ProtocolViolation
                raise ProtocolViolation("steps is required unless outcome is timeout")
            steps = max_steps
        seq, duplicate = writer.submit(TrialRecord(
            model=body.model, condition=body.condition, outcome=outcome,
            steps=steps, timestamp=utcnow(), note=body.note,
            overflow=body.overflow, idempotency_key=body.idempotency_key,
        ))
        if duplicate:
            response.status_code = 200
        return {"seq": seq, "duplicate": duplicate}

    @app.get("/api/campaigns/{campaign_id}/aggregates")
    def get_aggregates(campaign_id: str, group: str = "axis"):
        if group not in aggregate.GROUPS:
            from .manifest import UnsupportedFormat
            raise UnsupportedFormat(
                f"unknown grouping {group!r}; expected one of "
                f"{', '.join(aggregate.GROUPS)}")

        def build(state: CampaignState) -> bytes:
            report = aggregate.build_report(state, console.manifest, console.registry)
            return aggregate.export_report(report, "chart-data", groups=(group,))
        # emit the aggregate module's canonical bytes untouched so the API and
        # CLI are byte-identical for the same log
        return Response(content=console.compute(campaign_id, build),
                        media_type="application/json")

    @app.post("/api/proposals")
    def post_proposals(body: ProposalBody):
        base = console.manifest.base_task(body.base_task)
        axis = console.registry.lookup(body.axis)
        req = ProposalRequest(base_task=base, axis=axis, count=body.count)
        drafts, proposals, reasons = propose_conditions(req, console.backend,
                                                        console.registry)
        return {
            "base_task": base.id,
            "axis": axis.id,
            "drafts": [{"condition": condition_document(d)} for d in drafts],
            "proposals": [
                {"visualChange": p.visual_change, "languageChange": p.language_change}
                for p in proposals
            ],
            "rejected": reasons,
        }

    @app.post("/api/manifest/conditions", status_code=201)
    def accept_condition(body: AcceptConditionBody):
        cond = parse_condition(body.condition)
        draft = with_condition(console.draft_manifest(), cond)
        issues = validate_manifest(draft, console.registry)
        if issues:
            raise ManifestValidationError(issues)
        write_manifest_file(console.draft_path, draft)
        committed = False
        if body.commit:
            write_manifest_file(console.manifest_path, draft)
            console.manifest = draft
            committed = True
        return {"id": cond.id, "draft": str(console.draft_path),
                "committed": committed}

    @app.post("/api/manifest/commit")
    def commit_draft():
        """Promote the staged draft manifest to the original file."""
        draft = console.draft_manifest()
        issues = validate_manifest(draft, console.registry)
        if issues:
            raise ManifestValidationError(issues)
        write_manifest_file(console.manifest_path, draft)
        console.manifest = draft
        return {"name": draft.name, "conditions": len(draft.conditions)}

    # a built web console dropped into <campaign-dir>/console/ is served as-is
    static_dir = console.campaign_dir / "console"
    if static_dir.is_dir():
        from starlette.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="console")

    return app
