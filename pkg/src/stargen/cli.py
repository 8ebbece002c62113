"""Command-line surface.

Subcommands: ``validate``, ``coverage``, ``campaign init``, ``trial``,
``report``, ``propose``, ``serve``. Exit codes: 0 success, 1 validation
failure, 2 usage error, 3 I/O or transport error. Diagnostics go to stderr;
data output (CSV, chart JSON, markdown) goes to stdout so it stays
machine-parseable.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import aggregate, campaign, config as config_mod, manifest as manifest_mod, proposer
from .canonical import canonical_bytes
from .campaign import (
    CampaignConfig, CampaignStore, LockHeld, ManifestRef, Outcome, TrialRecord,
    progress, remaining_cells, utcnow,
)
from .errors import StargenError
from .manifest import (
    ManifestError, ManifestValidationError, coverage_matrix,
    load_reference_coverage, read_manifest_file, with_condition,
    write_manifest_file,
)
from .proposer import ProposalRequest, UnsupportedAxis
from .taxonomy import DEFAULT_REGISTRY

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

_USAGE_CODES = {"UnsupportedAxis", "UnsupportedFormat"}
_IO_CODES = {"LockHeld", "TransportError", "Timeout", "AuthFailure",
             "UnknownCampaign"}


def _fail(message: str, code: int) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def handle_errors(func):
    """Map toolkit errors onto the exit-code contract."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except FileNotFoundError as err:
            _fail(f"not found: {err}", EXIT_IO)
        except ManifestValidationError as err:
            for issue in err.issues:
                click.echo(issue.describe(), err=True)
            sys.exit(EXIT_VALIDATION)
        except StargenError as err:
            if err.code in _USAGE_CODES:
                _fail(err.describe(), EXIT_USAGE)
            if err.code in _IO_CODES:
                _fail(err.describe(), EXIT_IO)
            _fail(err.describe(), EXIT_VALIDATION)
        except OSError as err:
            _fail(f"i/o error: {err}", EXIT_IO)

    return wrapper


def _read_manifest(path: str):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(p)
    return read_manifest_file(p)


@click.group()
@click.version_option(package_name="stargen")
def main() -> None:
    """Benchmark manifests, evaluation campaigns, aggregates, proposals."""


@main.command()
@click.argument("manifest_path", type=click.Path())
@handle_errors
def validate(manifest_path: str) -> None:
    """Validate a manifest; print its coverage summary on success."""
    m = _read_manifest(manifest_path)
    cov = coverage_matrix(m)
    click.echo(cov.summary())


@main.command()
@click.argument("manifest_path", type=click.Path())
@click.option("--against", default=None,
              help="Reference row name (e.g. OpenVLA) or another manifest path.")
@handle_errors
def coverage(manifest_path: str, against: str | None) -> None:
    """Print the checkmark-row coverage table, optionally diffed."""
    m = _read_manifest(manifest_path)
    cov = coverage_matrix(m)
    if against is None:
        click.echo(manifest_mod.render_coverage_table([cov]), nl=False)
        click.echo(cov.summary())
        return
    references = load_reference_coverage()
    if against in references:
        other = references[against]
    elif Path(against).exists():
        other = coverage_matrix(_read_manifest(against))
    else:
        _fail(f"no reference row or manifest named {against!r} "
              f"(known rows: {', '.join(sorted(references))})", EXIT_USAGE)
        return
    diff = manifest_mod.diff_coverage(cov, other)
    click.echo(manifest_mod.render_coverage_diff(diff), nl=False)


# named explicitly: the module import already uses the name "campaign"
@click.group(name="campaign")
def campaign_group() -> None:
    """Campaign management."""


main.add_command(campaign_group)


@campaign_group.command("init")
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--id", "campaign_id", required=True)
@click.option("--model", "models", multiple=True, required=True,
              help="Repeat per model under evaluation.")
@click.option("--trials", default=5, show_default=True)
@click.option("--max-steps", default=100, show_default=True)
@click.option("--scope", default="tasks", show_default=True,
              type=click.Choice(campaign.SCOPES))
@click.option("--dir", "directory", default=".", show_default=True,
              type=click.Path(file_okay=False))
@handle_errors
def campaign_init(manifest_path: str, campaign_id: str, models: tuple[str, ...],
                  trials: int, max_steps: int, scope: str, directory: str) -> None:
    """Create a campaign log over a manifest."""
    m = _read_manifest(manifest_path)
    cfg = CampaignConfig(
        id=campaign_id,
        manifest=ManifestRef(name=m.name, hash=manifest_mod.manifest_hash(m)),
        models=models,
        trials_per_condition=trials,
        max_steps=max_steps,
        scope=scope,
    )
    store = CampaignStore(directory)
    path = store.create(cfg, m)
    state = store.read_state(campaign_id)
    click.echo(f"created {path} ({state.expected_total} trials expected)")


def _store_for(log_path: str) -> tuple[CampaignStore, str]:
    p = Path(log_path)
    if not p.name.endswith(campaign.LOG_SUFFIX):
        raise click.UsageError(
            f"campaign log must end with {campaign.LOG_SUFFIX}: {p.name}")
    return CampaignStore(p.parent), p.name[: -len(campaign.LOG_SUFFIX)]


_OUTCOME_SHORTCUTS = {"s": "success", "f": "failure", "i": "irrecoverable",
                      "t": "timeout"}


@main.command()
@click.option("--campaign", "log_path", required=True, type=click.Path())
@click.option("--model", default=None)
@click.option("--condition", default=None)
@click.option("--outcome", default=None,
              type=click.Choice([o.value for o in Outcome]))
@click.option("--steps", default=None, type=int)
@click.option("--note", default="")
@click.option("--overflow", is_flag=True,
              help="Allow recording beyond the per-cell quota (trial stays tagged).")
@handle_errors
def trial(log_path: str, model: str | None, condition: str | None,
          outcome: str | None, steps: int | None, note: str,
          overflow: bool) -> None:
    """Record one trial, or loop over remaining cells interactively."""
    store, campaign_id = _store_for(log_path)
    if model and condition and outcome:
        state = store.read_state(campaign_id)
        if steps is None:
            if outcome != "timeout":
                raise click.UsageError("--steps is required unless --outcome timeout")
            steps = state.config.max_steps
        record = TrialRecord(
            model=model, condition=condition, outcome=Outcome(outcome),
            steps=steps, timestamp=utcnow(), note=note, overflow=overflow,
        )
        seq = store.append(campaign_id, record)
        click.echo(f"recorded seq {seq}")
        return
    _interactive_trials(store, campaign_id)


def _interactive_trials(store: CampaignStore, campaign_id: str) -> None:
    """Prompt per remaining cell, condition-major so the physical scene is
    reset as rarely as possible."""
    with store.writer(campaign_id) as writer:
        while True:
            queue = remaining_cells(writer.state)
            if not queue:
                click.echo("campaign complete")
                return
            cell = queue[0]
            click.echo(
                f"[{cell.condition} | {cell.model}] "
                f"{cell.done}/{cell.required} done")
            raw = click.prompt(
                "outcome (s)uccess/(f)ailure/(i)rrecoverable/(t)imeout/(q)uit",
                type=str).strip().lower()
            if raw in ("q", "quit"):
                return
            name = _OUTCOME_SHORTCUTS.get(raw, raw)
            if name not in _OUTCOME_SHORTCUTS.values():
                click.echo(f"unknown outcome {raw!r}", err=True)
                continue
            outcome = Outcome(name)
            max_steps = writer.state.config.max_steps
            if outcome is Outcome.TIMEOUT:
                steps = max_steps
            else:
                steps = click.prompt("steps", type=int)
            note = click.prompt("note", default="", show_default=False)
            try:
                seq = writer.record(TrialRecord(
                    model=cell.model, condition=cell.condition,
                    outcome=outcome, steps=steps, timestamp=utcnow(), note=note))
            except campaign.CampaignError as err:
                click.echo(err.describe(), err=True)
                continue
            click.echo(f"recorded seq {seq}")


@main.command()
@click.option("--campaign", "log_path", required=True, type=click.Path())
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--group", default="condition", show_default=True,
              type=click.Choice(aggregate.GROUPS))
@click.option("--format", "fmt", default="md", show_default=True,
              type=click.Choice(["md", "csv", "chart"]))
@click.option("-o", "--output", default=None, type=click.Path(),
              help="Write to a file instead of stdout.")
@handle_errors
def report(log_path: str, manifest_path: str, group: str, fmt: str,
           output: str | None) -> None:
    """Aggregate a campaign log into condition/axis/category/composition rates."""
    p = Path(log_path)
    if not p.exists():
        raise FileNotFoundError(p)
    m = _read_manifest(manifest_path)
    state = campaign.replay(p.read_bytes())
    rep = aggregate.build_report(state, m)
    fmt_name = {"md": "markdown", "csv": "csv", "chart": "chart-data"}[fmt]
    data = aggregate.export_report(rep, fmt_name, groups=(group,))
    if output:
        Path(output).write_bytes(data)
        click.echo(f"wrote {output}", err=True)
    else:
        sys.stdout.write(data.decode("utf-8"))


@main.command()
@click.option("--campaign", "log_path", required=True, type=click.Path())
@handle_errors
def status(log_path: str) -> None:
    """Progress grid of a campaign (``--`` marks never-attempted cells)."""
    store, campaign_id = _store_for(log_path)
    state = store.read_state(campaign_id)
    click.echo(f"campaign {state.config.id}: {state.total_trials}/"
               f"{state.expected_total} trials")
    for cell in progress(state):
        click.echo(f"{cell.condition}\t{cell.model}\t{cell.render()}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--base-task", "base_task_id", required=True)
@click.option("--axis", "axis_id", required=True)
@click.option("--count", default=proposer.DEFAULT_COUNT, show_default=True)
@click.option("--backend", "backend_kind", default=None,
              type=click.Choice(["mock", "http"]),
              help="Overrides the configured backend kind.")
@click.option("--fixtures-dir", default=None, type=click.Path(),
              help="Mock backend fixture directory.")
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="stargen.toml-style backend settings.")
@click.option("--accept-into", default=None, type=click.Path(),
              help="Append validated drafts to this manifest file.")
@handle_errors
def propose(manifest_path: str, base_task_id: str, axis_id: str, count: int,
            backend_kind: str | None, fixtures_dir: str | None,
            config_path: str | None, accept_into: str | None) -> None:
    """Ask the configured VLM backend for draft conditions along one axis."""
    m = _read_manifest(manifest_path)
    base = m.base_task(base_task_id)
    axis = DEFAULT_REGISTRY.lookup(axis_id)
    settings = config_mod.load_settings(config_path)
    if backend_kind:
        settings.backend = backend_kind
    if fixtures_dir:
        settings.fixtures_dir = fixtures_dir
    backend = config_mod.build_backend(settings)
    req = ProposalRequest(base_task=base, axis=axis, count=count)
    drafts, _, reasons = proposer.propose_conditions(req, backend)
    for reason in reasons:
        click.echo(f"rejected: {reason}", err=True)
    if accept_into is None:
        docs = [manifest_mod.condition_document(d) for d in drafts]
        sys.stdout.write(canonical_bytes(docs).decode("utf-8"))
        return
    target = Path(accept_into)
    merged = _read_manifest(str(target))
    for draft in drafts:
        merged = with_condition(merged, draft)
    issues = manifest_mod.validate_manifest(merged)
    if issues:
        raise ManifestValidationError(issues)
    write_manifest_file(target, merged)
    click.echo(f"accepted {len(drafts)} draft(s) into {target}")


@main.command()
@click.option("--port", default=8377, show_default=True)
@click.option("--campaign-dir", "campaign_dir", required=True,
              type=click.Path(file_okay=False))
@handle_errors
def serve(port: int, campaign_dir: str) -> None:
    """Start the console HTTP API over a campaign directory."""
    import uvicorn

    from .api import create_app

    app = create_app(Path(campaign_dir))
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
