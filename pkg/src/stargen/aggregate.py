"""Success-rate aggregation over replayed campaign state.

All aggregates are trial-weighted: every non-overflow trial counts once, so
per-axis and per-category cells are exact sums of their member condition
cells (numerators and denominators alike). Never-attempted cells are omitted
rather than treated as 0/N. In-distribution performance (the base tasks
themselves) is reported as the pseudo-axis ``ID`` alongside the real axes.

Aggregates are a pure function of (log, manifest); exports are byte-
deterministic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal, ROUND_HALF_UP

from .campaign import CampaignState, ManifestHashMismatch, Outcome
from .canonical import canonical_bytes
from .manifest import BenchmarkManifest, UnsupportedFormat, manifest_hash
from .taxonomy import AxisRegistry, CATEGORY_LABELS, DEFAULT_REGISTRY

ID_AXIS = "ID"
GROUPS = ("condition", "axis", "category", "composition")
FORMATS = ("markdown", "csv", "chart-data")


@dataclass(frozen=True)
class RateCell:
    successes: int
    total: int

    def __post_init__(self):
        if not (0 <= self.successes <= self.total):
            raise ValueError(f"invalid rate cell {self.successes}/{self.total}")

    @property
    def rate(self) -> float | None:
        return self.successes / self.total if self.total else None

    def __add__(self, other: "RateCell") -> "RateCell":
        return RateCell(self.successes + other.successes, self.total + other.total)

    def k_of_n(self) -> str:
        return f"{self.successes}/{self.total}"

    def percent(self) -> str:
        """Half-up rounding to one decimal place, e.g. ``60.0%``."""
        if not self.total:
            return "--"
        value = (Decimal(self.successes) * 100 / Decimal(self.total)).quantize(
            Decimal("0.1"), rounding=ROUND_HALF_UP)
        return f"{value}%"


ZERO = RateCell(0, 0)


@dataclass
class AggregateReport:
    campaign_id: str
    manifest_name: str
    manifest_hash: str
    models: tuple[str, ...]
    conditions: tuple[tuple[str, str], ...]          # grid rows: (id, kind)
    condition: dict[str, dict[str, RateCell]]        # model -> condition id -> cell
    axis: dict[str, dict[str, RateCell]]             # model -> axis id (incl. ID) -> cell
    category: dict[str, dict[str, RateCell]]         # model -> category label -> cell
    in_distribution: dict[str, RateCell]             # model -> cell
    composition: dict[str, dict[str, RateCell]]      # model -> composition id -> cell
    composition_groups: dict[str, dict[str, RateCell]]  # model -> axis signature -> cell
    composition_overall: dict[str, RateCell]
    axis_order: tuple[str, ...]
    category_order: tuple[str, ...]
    group_order: tuple[str, ...]
    generated_at: datetime | None = None  # metadata only; never serialized


def condition_rates(state: CampaignState) -> dict[str, dict[str, RateCell]]:
    """Per (model, condition) success counts over non-overflow trials.
    Cells that were never attempted are absent, not zero."""
    out: dict[str, dict[str, RateCell]] = {m: {} for m in state.config.models}
    for cid, _ in state.conditions:
        for model in state.config.models:
            cell = state.cells[(model, cid)]
            if cell.done > 0:
                out[model][cid] = RateCell(cell.successes, cell.done)
    return out


def _axis_of(manifest: BenchmarkManifest, cid: str, kind: str) -> str | None:
    if kind == "base":
        return ID_AXIS
    if kind == "perturbed":
        return manifest.condition(cid).axis
    return None  # compositions aggregate separately


def axis_rates(state: CampaignState, manifest: BenchmarkManifest,
               registry: AxisRegistry = DEFAULT_REGISTRY) -> dict[str, dict[str, RateCell]]:
    """Pool all trials of all non-composite conditions sharing an axis
    (trial-weighted). Base-task trials pool under the pseudo-axis ``ID``."""
    per_condition = condition_rates(state)
    out: dict[str, dict[str, RateCell]] = {m: {} for m in state.config.models}
    for cid, kind in state.conditions:
        axis = _axis_of(manifest, cid, kind)
        if axis is None:
            continue
        for model in state.config.models:
            cell = per_condition[model].get(cid)
            if cell is None:
                continue
            out[model][axis] = out[model].get(axis, ZERO) + cell
    return out


def category_rates(state: CampaignState, manifest: BenchmarkManifest,
                   registry: AxisRegistry = DEFAULT_REGISTRY) -> dict[str, dict[str, RateCell]]:
    """Pool axis cells by each axis's category (the ``ID`` pseudo-axis has no
    category and is excluded)."""
    per_axis = axis_rates(state, manifest, registry)
    out: dict[str, dict[str, RateCell]] = {m: {} for m in state.config.models}
    for model, cells in per_axis.items():
        for axis_id, cell in cells.items():
            if axis_id == ID_AXIS:
                continue
            label = registry.lookup(axis_id).category.label
            out[model][label] = out[model].get(label, ZERO) + cell
    return out


def composition_signature(manifest: BenchmarkManifest, comp_id: str,
                          registry: AxisRegistry = DEFAULT_REGISTRY) -> str:
    """Axis signature of a composition, e.g. ``S-PROP+S-LANG``; part order is
    normalized to registry order so equal axis sets share one group."""
    comp = manifest.composition(comp_id)
    order = {axis.id: i for i, axis in enumerate(registry)}
    axes = sorted((axis_id for axis_id, _ in comp.parts),
                  key=lambda a: order.get(a, len(order)))
    return "+".join(axes)


def composition_rates(state: CampaignState, manifest: BenchmarkManifest,
                      registry: AxisRegistry = DEFAULT_REGISTRY,
                      ) -> tuple[dict[str, dict[str, RateCell]],
                                 dict[str, dict[str, RateCell]],
                                 dict[str, RateCell]]:
    """(per-composition, per axis-pair group, overall) pooled cells."""
    per_condition = condition_rates(state)
    per_comp: dict[str, dict[str, RateCell]] = {m: {} for m in state.config.models}
    per_group: dict[str, dict[str, RateCell]] = {m: {} for m in state.config.models}
    overall: dict[str, RateCell] = {}
    for cid, kind in state.conditions:
        if kind != "composition":
            continue
        sig = composition_signature(manifest, cid, registry)
        for model in state.config.models:
            cell = per_condition[model].get(cid)
            if cell is None:
                continue
            per_comp[model][cid] = cell
            per_group[model][sig] = per_group[model].get(sig, ZERO) + cell
            overall[model] = overall.get(model, ZERO) + cell
    return per_comp, per_group, overall


def build_report(state: CampaignState, manifest: BenchmarkManifest,
                 registry: AxisRegistry = DEFAULT_REGISTRY) -> AggregateReport:
    actual = manifest_hash(manifest)
    if state.config.manifest.hash != actual:
        raise ManifestHashMismatch(
            f"campaign {state.config.id!r} was created over manifest hash "
            f"{state.config.manifest.hash[:12]}..., got {actual[:12]}...")

    per_axis = axis_rates(state, manifest, registry)
    axes_present = {a for cells in per_axis.values() for a in cells}
    axis_order = tuple(
        [ID_AXIS] * (ID_AXIS in axes_present)
        + [a.id for a in registry if a.id in axes_present]
    )
    per_category = category_rates(state, manifest, registry)
    cats_present = {c for cells in per_category.values() for c in cells}
    category_order = tuple(c for c in CATEGORY_LABELS if c in cats_present)

    per_comp, per_group, overall = composition_rates(state, manifest, registry)
    groups_present = {g for cells in per_group.values() for g in cells}
    order = {axis.id: i for i, axis in enumerate(registry)}
    group_order = tuple(sorted(
        groups_present,
        key=lambda sig: tuple(order.get(a, len(order)) for a in sig.split("+")),
    ))

    return AggregateReport(
        campaign_id=state.config.id,
        manifest_name=manifest.name,
        manifest_hash=actual,
        models=state.config.models,
        conditions=state.conditions,
        condition=condition_rates(state),
        axis=per_axis,
        category=per_category,
        in_distribution={m: cells[ID_AXIS] for m, cells in per_axis.items()
                         if ID_AXIS in cells},
        composition=per_comp,
        composition_groups=per_group,
        composition_overall=overall,
        axis_order=axis_order,
        category_order=category_order,
        group_order=group_order,
    )


# --- exports --------------------------------------------------------------------

def _rows_for_group(report: AggregateReport, group: str) -> list[tuple[str, dict[str, RateCell]]]:
    """(key, model->cell) rows in deterministic order for one grouping."""
    if group == "condition":
        return [
            (cid, {m: report.condition[m][cid] for m in report.models
                   if cid in report.condition[m]})
            for cid, _ in report.conditions
        ]
    if group == "axis":
        return [
            (axis, {m: report.axis[m][axis] for m in report.models
                    if axis in report.axis[m]})
            for axis in report.axis_order
        ]
    if group == "category":
        return [
            (label, {m: report.category[m][label] for m in report.models
                     if label in report.category[m]})
            for label in report.category_order
        ]
    if group == "composition":
        rows = [
            (cid, {m: report.composition[m][cid] for m in report.models
                   if cid in report.composition[m]})
            for cid, kind in report.conditions if kind == "composition"
        ]
        rows.extend(
            (sig, {m: report.composition_groups[m][sig] for m in report.models
                   if sig in report.composition_groups[m]})
            for sig in report.group_order
        )
        if report.composition_overall:
            rows.append(("overall", dict(report.composition_overall)))
        return rows
    raise UnsupportedFormat(f"unknown grouping {group!r}")


def chart_records(report: AggregateReport, group: str) -> list[dict]:
    """Grouped-bar records for the console: one record per (model, key)."""
    records = []
    for key, cells in _rows_for_group(report, group):
        for model in report.models:
            cell = cells.get(model)
            if cell is None:
                continue
            records.append({
                "model": model,
                "group": group,
                "key": key,
                "successes": cell.successes,
                "total": cell.total,
            })
    return records


_KEY_PREFIX = {"condition": "cond", "axis": "axis", "category": "cat",
               "composition": "comp"}


def export_report(report: AggregateReport, fmt: str,
                  groups: tuple[str, ...] = GROUPS) -> bytes:
    """Deterministic bytes in one of ``markdown``, ``csv``, ``chart-data``."""
    for group in groups:
        if group not in GROUPS:
            raise UnsupportedFormat(f"unknown grouping {group!r}")
    if fmt == "csv":
        return _export_csv(report, groups)
    if fmt == "markdown":
        return _export_markdown(report, groups)
    if fmt == "chart-data":
        records = [r for g in groups for r in chart_records(report, g)]
        return canonical_bytes(records)
    raise UnsupportedFormat(f"unknown export format {fmt!r}")


def _export_csv(report: AggregateReport, groups: tuple[str, ...]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "key", "successes", "total", "rate"])
    for group in groups:
        prefix = _KEY_PREFIX[group]
        for key, cells in _rows_for_group(report, group):
            for model in report.models:
                cell = cells.get(model)
                if cell is None:
                    continue
                writer.writerow([model, f"{prefix}:{key}",
                                 cell.successes, cell.total, cell.percent()])
    return buf.getvalue().encode("utf-8")


_GROUP_TITLES = {"condition": "Conditions", "axis": "Axes",
                 "category": "Categories", "composition": "Compositions"}


def _export_markdown(report: AggregateReport, groups: tuple[str, ...]) -> bytes:
    lines = [
        f"# Campaign report: {report.campaign_id}",
        "",
        f"manifest: {report.manifest_name} ({report.manifest_hash[:12]})",
        "",
    ]
    for group in groups:
        lines.append(f"## {_GROUP_TITLES[group]}")
        lines.append("")
        header = [group] + list(report.models)
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join([" --- "] * len(header)) + "|")
        for key, cells in _rows_for_group(report, group):
            row = [key] + [
                cells[m].k_of_n() if m in cells else "--" for m in report.models
            ]
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    return ("\n".join(lines).rstrip("\n") + "\n").encode("utf-8")
