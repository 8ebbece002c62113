"""Acceptance suite.

One test per acceptance criterion, each printing a PASS line when its
assertions hold (run with ``pytest tests/test_acceptance.py -v -s``). All
comparisons are exact integers or exact bytes; no tolerances are deferred.
"""

import json
import time
from collections import defaultdict

from click.testing import CliRunner
from hypothesis import HealthCheck, given, settings, strategies as st

from stargen.aggregate import build_report, export_report
from stargen.api import create_app
from stargen.campaign import (
    CorruptLine, Outcome, ProtocolViolation, QuotaExceeded, TrialRecord,
    create_campaign, record_trial, replay,
)
from stargen.canonical import canonical_bytes
from stargen.cli import main as cli_main
from stargen.manifest import (
    ManifestValidationError, condition_document, coverage_matrix,
    parse_manifest, serialize_manifest,
)
from stargen.proposer import (
    MockBackend, ProposalSchemaError, SUPPORTED_AXES, bundled_fixtures_dir,
    ProposalRequest, propose_conditions,
)
from stargen.taxonomy import (
    BaseTask, BehavioralChange, PerturbationDelta, SceneDescriptor,
    DEFAULT_REGISTRY, categorize, compose, registry_selfcheck,
    validate_condition, VisualChange, normalize_instruction,
)

from fastapi.testclient import TestClient

from conftest import bundled_bytes
from test_campaign import T0, make_config, trial
from test_manifest import manifests

RESULT = "ACCEPTANCE {n} ({name}): PASS"

TABLE_IV_AXES = {
    "V-SC", "V-OBJ", "V-VIEW", "S-PROP", "S-LANG", "S-MO", "S-INT",
    "VB-POSE", "VB-ISC", "VB-MOBJ", "SB-SMO", "SB-VRB", "VSB-NOBJ",
}


def test_criterion_1_main_results_fixture(main_results_log, bundled_manifest):
    """885 trials over 59 conditions; spot cells and axis sums exact."""
    t_start = time.perf_counter()
    state = replay(main_results_log)
    report = build_report(state, bundled_manifest)
    elapsed = time.perf_counter() - t_start

    assert state.total_trials == 885
    assert len(state.conditions) == 59
    kinds = defaultdict(int)
    for _, kind in state.conditions:
        kinds[kind] += 1
    assert kinds == {"base": 4, "perturbed": 55}

    cell = report.condition["openvla-bridge-ft"]["carrot_base"]
    assert (cell.successes, cell.total) == (3, 5)
    cell = report.condition["pi0-bridge-ft"]["knife_camera"]
    assert (cell.successes, cell.total) == (5, 5)
    cell = report.axis["minivla-bridge-ft"]["V-OBJ"]
    assert (cell.successes, cell.total) == (12, 15)
    cell = report.axis["pi0-bridge-ft"]["ID"]
    assert (cell.successes, cell.total) == (18, 20)

    assert elapsed < 1.0, f"replay+aggregate took {elapsed:.3f}s"
    print(RESULT.format(n=1, name="main results fixture"))


def test_criterion_2_compositional_fixture(compositional_log, bundled_manifest,
                                           table_counts):
    """Every aggregated compositional row reproduces from the per-cell log."""
    state = replay(compositional_log)
    report = build_report(state, bundled_manifest)

    # hand-derived sums for every (model, axis-pair) row plus overall
    order = {a.id: i for i, a in enumerate(DEFAULT_REGISTRY)}
    expected_rows = defaultdict(lambda: [0, 0])
    expected_overall = defaultdict(lambda: [0, 0])
    for row in table_counts["compositions"]:
        sig = "+".join(sorted(row["axes"], key=order.get))
        for model, k in row["counts"].items():
            expected_rows[(model, sig)][0] += k
            expected_rows[(model, sig)][1] += 5
            expected_overall[model][0] += k
            expected_overall[model][1] += 5

    for (model, sig), (num, den) in expected_rows.items():
        cell = report.composition_groups[model][sig]
        assert (cell.successes, cell.total) == (num, den), (model, sig)
    for model, (num, den) in expected_overall.items():
        cell = report.composition_overall[model]
        assert (cell.successes, cell.total) == (num, den), model

    cell = report.composition_overall["openvla-oxe-ft"]
    assert (cell.successes, cell.total) == (20, 30)
    cell = report.composition_groups["pi0-bridge-ft"]["VB-POSE+VB-ISC"]
    assert (cell.successes, cell.total) == (8, 10)
    print(RESULT.format(n=2, name="compositional fixture"))


def _scene():
    return SceneDescriptor(image="s.jpg")


@settings(max_examples=1000, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def _union_law_case(data):
    base = BaseTask(id="b", instruction="put carrot on plate", scene=_scene())

    def delta(tag):
        has_v = data.draw(st.booleans(), label=f"visual_{tag}")
        has_s = data.draw(st.booleans(), label=f"semantic_{tag}")
        has_b = data.draw(st.booleans(), label=f"behavioral_{tag}")
        if not (has_v or has_s or has_b):
            has_b = True
        instruction = None
        if has_s:
            instruction = data.draw(
                st.text(min_size=1, max_size=20).filter(
                    lambda s: normalize_instruction(s) not in
                    ("", base.instruction)),
                label=f"instruction_{tag}")
        return PerturbationDelta(
            factor=f"f{tag}",
            visual=VisualChange("v") if has_v else None,
            instruction=instruction,
            behavioral=BehavioralChange("b") if has_b else None)

    d1, d2 = delta(1), delta(2)
    c1, c2 = categorize(base, d1), categorize(base, d2)
    assert c1.members and c2.members
    # composing the two deltas' categories equals the union of the parts
    assert compose([c1, c2]).members == c1.members | c2.members


def test_criterion_3_categorization_suite():
    """Base-task relativity of the orange-object example plus the union law
    over 1000 randomized deltas."""
    scene = _scene()
    carrot = BaseTask(id="c", instruction="pick up carrot", scene=scene)
    apple = BaseTask(id="a", instruction="pick up apple", scene=scene)

    semantic_only = PerturbationDelta(factor="referencing color",
                                      instruction="pick up the orange object")
    assert categorize(carrot, semantic_only).label == "S"

    semantic_behavioral = PerturbationDelta(
        factor="referencing color",
        instruction="pick up the orange object",
        behavioral=BehavioralChange("now grasps the carrot instead of the apple"))
    assert categorize(apple, semantic_behavioral).label == "SB"

    _union_law_case()
    print(RESULT.format(n=3, name="categorization suite"))


def test_criterion_4_registry_and_coverage(bundled_manifest):
    report = registry_selfcheck()
    assert report.total == 22
    assert report.counts() == {
        "V": 4, "S": 5, "B": 2, "VB": 5, "SB": 4, "VS": 1, "VSB": 1}
    assert sum(report.counts().values()) == 22
    assert len(report.counts()) == 7

    cov = coverage_matrix(bundled_manifest)
    assert cov.axes_count == 13
    assert cov.categories_count == 5
    assert set(cov.axes_present) == TABLE_IV_AXES
    print(RESULT.format(n=4, name="registry and coverage"))


@settings(max_examples=200, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(manifests())
def _roundtrip_case(m):
    data = serialize_manifest(m)
    again = parse_manifest(data)
    assert again == m
    assert serialize_manifest(again) == data


def test_criterion_5_manifest_round_trip(bundled_manifest):
    """Round-trip identity (bundled + 200 randomized manifests) and designated
    error codes for seeded corruptions."""
    data = serialize_manifest(bundled_manifest)
    assert parse_manifest(data) == bundled_manifest
    assert serialize_manifest(parse_manifest(data)) == data

    _roundtrip_case()

    def corrupt(mutate):
        doc = json.loads(data)
        mutate(doc)
        try:
            parse_manifest(json.dumps(doc).encode())
        except ManifestValidationError as err:
            return err.codes()
        raise AssertionError("corruption accepted")

    codes = corrupt(lambda d: d["conditions"][0].__setitem__("axis", "X-FOO"))
    assert "UnknownAxis" in codes
    codes = corrupt(lambda d: d["conditions"][0].__setitem__("base_task", "ghost"))
    assert "ReferenceError" in codes
    codes = corrupt(lambda d: next(
        c for c in d["conditions"] if c["id"] == "carrot_color"
    )["delta"].__setitem__("instruction", "put carrot on plate"))
    assert "NoOpInstruction" in codes
    print(RESULT.format(n=5, name="manifest round trip"))


def test_criterion_6_campaign_protocol(main_results_log, bundled_manifest):
    snapshots = {replay(main_results_log).canonical_snapshot() for _ in range(3)}
    assert len(snapshots) == 1

    log = create_campaign(make_config(bundled_manifest), bundled_manifest)
    from datetime import timedelta
    for i in range(5):
        log = record_trial(log, trial(ts=T0 + timedelta(minutes=i)))
    try:
        record_trial(log, trial(ts=T0 + timedelta(minutes=9)))
        raise AssertionError("sixth trial accepted")
    except QuotaExceeded:
        pass

    log = record_trial(log, trial(model="model-b", outcome=Outcome.TIMEOUT,
                                  steps=100))
    try:
        record_trial(log, trial(model="model-b", outcome=Outcome.TIMEOUT,
                                steps=40, ts=T0 + timedelta(minutes=1)))
        raise AssertionError("timeout with steps != 100 accepted")
    except ProtocolViolation:
        pass
    print(RESULT.format(n=6, name="campaign protocol"))


def test_criterion_7_proposer_closed_loop(bundled_manifest):
    backend = MockBackend(fixtures_dir=bundled_fixtures_dir())
    base = bundled_manifest.base_task("carrot_base")

    for axis_id in SUPPORTED_AXES:
        req = ProposalRequest(base_task=base,
                              axis=DEFAULT_REGISTRY.lookup(axis_id))
        runs = []
        for _ in range(2):
            drafts, proposals, reasons = propose_conditions(req, backend)
            assert len(drafts) == 3, axis_id
            assert not reasons
            for draft in drafts:
                assert validate_condition(base, draft) == req.axis.category
            runs.append(canonical_bytes(
                [condition_document(d) for d in drafts]))
        assert runs[0] == runs[1], f"pipeline not deterministic for {axis_id}"

    for malformed in (b"{}", b"not json", b'[{"wrong": 1}, []]'):
        try:
            from stargen.proposer import parse_proposals
            parse_proposals(malformed, DEFAULT_REGISTRY.lookup("VSB-NOBJ"))
            raise AssertionError(f"malformed body accepted: {malformed!r}")
        except ProposalSchemaError:
            pass
    print(RESULT.format(n=7, name="proposer closed loop"))


def test_criterion_8_cross_interface_consistency(tmp_path, bundled_manifest):
    """CLI csv numbers equal API aggregate numbers for the same log, and the
    chart exports are byte-identical, on both bundled fixtures."""
    manifest_file = tmp_path / "bridgev2-star.stargen.json"
    manifest_file.write_bytes(serialize_manifest(bundled_manifest))
    for name in ("main_results", "compositional"):
        (tmp_path / f"{name}.stargen.log").write_bytes(
            bundled_bytes(f"{name}.stargen.log"))

    runner = CliRunner()
    app = create_app(tmp_path, backend=MockBackend(fixtures_dir=tmp_path))
    with TestClient(app) as client:
        for name in ("main_results", "compositional"):
            for group in ("condition", "axis", "category", "composition"):
                cli_result = runner.invoke(cli_main, [
                    "report", "--campaign", str(tmp_path / f"{name}.stargen.log"),
                    "--manifest", str(manifest_file),
                    "--group", group, "--format", "csv"])
                assert cli_result.exit_code == 0
                cli_cells = {}
                for line in cli_result.stdout.splitlines()[1:]:
                    model, key, successes, total, _ = line.split(",")
                    cli_cells[(model, key.split(":", 1)[1])] = (
                        int(successes), int(total))

                resp = client.get(
                    f"/api/campaigns/{name}/aggregates?group={group}")
                assert resp.status_code == 200
                api_cells = {
                    (r["model"], r["key"]): (r["successes"], r["total"])
                    for r in resp.json()}
                assert cli_cells == api_cells, (name, group)

                chart_cli = runner.invoke(cli_main, [
                    "report", "--campaign", str(tmp_path / f"{name}.stargen.log"),
                    "--manifest", str(manifest_file),
                    "--group", group, "--format", "chart"])
                assert chart_cli.stdout.encode() == resp.content, (name, group)
    print(RESULT.format(n=8, name="cross-interface consistency"))
