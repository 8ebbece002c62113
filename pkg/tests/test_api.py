import concurrent.futures
import json

import pytest
from fastapi.testclient import TestClient

from stargen.api import create_app
from stargen.campaign import CampaignConfig, CampaignStore, ManifestRef, replay
from stargen.manifest import manifest_hash, serialize_manifest
from stargen.proposer import MockBackend, bundled_fixtures_dir

from conftest import bundled_bytes


@pytest.fixture
def service_dir(tmp_path, bundled_manifest):
    (tmp_path / "bridgev2-star.stargen.json").write_bytes(
        serialize_manifest(bundled_manifest))
    (tmp_path / "main_results.stargen.log").write_bytes(
        bundled_bytes("main_results.stargen.log"))
    (tmp_path / "compositional.stargen.log").write_bytes(
        bundled_bytes("compositional.stargen.log"))
    store = CampaignStore(tmp_path)
    store.create(
        CampaignConfig(
            id="live",
            manifest=ManifestRef(name=bundled_manifest.name,
                                 hash=manifest_hash(bundled_manifest)),
            models=("model-a", "model-b")),
        bundled_manifest)
    return tmp_path


@pytest.fixture
def client(service_dir):
    app = create_app(service_dir,
                     backend=MockBackend(fixtures_dir=bundled_fixtures_dir()))
    with TestClient(app) as c:
        yield c


class TestReads:
    def test_health(self, client):
        assert client.get("/api/health").json() == {"status": "ok"}

    def test_manifest_mirror(self, client, bundled_manifest):
        doc = client.get("/api/manifest").json()
        assert doc["name"] == "bridgev2-star"
        assert len(doc["base_tasks"]) == 4
        assert len(doc["conditions"]) == 55

    def test_campaign_listing(self, client):
        campaigns = {c["id"]: c for c in client.get("/api/campaigns").json()}
        assert campaigns["main_results"]["total_trials"] == 885
        assert campaigns["live"]["total_trials"] == 0
        assert campaigns["live"]["expected_total"] == 590

    def test_fresh_progress_all_zero(self, client):
        doc = client.get("/api/campaigns/live/progress").json()
        assert doc["expected_total"] == 590
        assert all(c["done"] == 0 and c["required"] == 5 for c in doc["cells"])

    def test_fixture_progress_totals(self, client):
        doc = client.get("/api/campaigns/main_results/progress").json()
        assert doc["total_trials"] == 885
        assert all(c["done"] == 5 for c in doc["cells"])

    def test_unknown_campaign_404(self, client):
        resp = client.get("/api/campaigns/ghost/progress")
        assert resp.status_code == 404
        body = resp.json()
        assert body["code"] == "UnknownCampaign"
        assert body["status"] == 404


class TestTrials:
    def test_valid_success_trial(self, client):
        resp = client.post("/api/campaigns/live/trials", json={
            "model": "model-a", "condition": "carrot_base",
            "outcome": "success", "steps": 55})
        assert resp.status_code == 201
        assert resp.json()["seq"] == 2
        doc = client.get("/api/campaigns/live/progress").json()
        cell = next(c for c in doc["cells"]
                    if c["model"] == "model-a" and c["condition"] == "carrot_base")
        assert cell["done"] == 1 and cell["successes"] == 1

    def test_sixth_trial_conflicts(self, client):
        for _ in range(5):
            assert client.post("/api/campaigns/live/trials", json={
                "model": "model-a", "condition": "knife_base",
                "outcome": "failure", "steps": 10}).status_code == 201
        resp = client.post("/api/campaigns/live/trials", json={
            "model": "model-a", "condition": "knife_base",
            "outcome": "failure", "steps": 10})
        assert resp.status_code == 409
        assert resp.json()["code"] == "QuotaExceeded"

    def test_timeout_steps_rule(self, client):
        resp = client.post("/api/campaigns/live/trials", json={
            "model": "model-a", "condition": "carrot_base",
            "outcome": "timeout", "steps": 40})
        assert resp.status_code == 422
        assert resp.json()["code"] == "ProtocolViolation"

    def test_timeout_defaults_to_max_steps(self, client):
        resp = client.post("/api/campaigns/live/trials", json={
            "model": "model-a", "condition": "carrot_base",
            "outcome": "timeout"})
        assert resp.status_code == 201

    def test_unknown_ids_404(self, client):
        assert client.post("/api/campaigns/live/trials", json={
            "model": "mystery", "condition": "carrot_base",
            "outcome": "success", "steps": 5}).status_code == 404
        assert client.post("/api/campaigns/live/trials", json={
            "model": "model-a", "condition": "mystery",
            "outcome": "success", "steps": 5}).status_code == 404

    def test_idempotency_key_dedupes(self, client):
        body = {"model": "model-a", "condition": "carrot_base",
                "outcome": "success", "steps": 50, "idempotency_key": "retry-1"}
        first = client.post("/api/campaigns/live/trials", json=body)
        second = client.post("/api/campaigns/live/trials", json=body)
        assert first.status_code == 201
        assert second.status_code == 200
        assert first.json()["seq"] == second.json()["seq"]
        doc = client.get("/api/campaigns/live/progress").json()
        assert doc["total_trials"] == 1

    def test_concurrent_posts_serialize_without_gaps(self, client, service_dir):
        def post(i):
            model = "model-a" if i % 2 == 0 else "model-b"
            return client.post("/api/campaigns/live/trials", json={
                "model": model, "condition": "pot_base",
                "outcome": "success", "steps": 30 + i})

        with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
            responses = list(pool.map(post, range(8)))
        assert all(r.status_code == 201 for r in responses)
        seqs = sorted(r.json()["seq"] for r in responses)
        assert seqs == list(range(2, 10))


class TestAggregatesEndpoint:
    def test_axis_group_matches_fixture(self, client):
        resp = client.get("/api/campaigns/main_results/aggregates?group=axis")
        assert resp.status_code == 200
        records = {(r["model"], r["key"]): r for r in resp.json()}
        cell = records[("minivla-bridge-ft", "V-OBJ")]
        assert (cell["successes"], cell["total"]) == (12, 15)

    def test_byte_equal_to_aggregate_module(self, client, service_dir,
                                            bundled_manifest):
        from stargen.aggregate import build_report, export_report
        state = replay((service_dir / "main_results.stargen.log").read_bytes())
        report = build_report(state, bundled_manifest)
        for group in ("condition", "axis", "category", "composition"):
            expected = export_report(report, "chart-data", groups=(group,))
            resp = client.get(
                f"/api/campaigns/main_results/aggregates?group={group}")
            assert resp.content == expected

    def test_empty_category_group(self, client):
        resp = client.get("/api/campaigns/live/aggregates?group=category")
        assert resp.status_code == 200
        assert resp.json() == []

    def test_bad_group_400(self, client):
        resp = client.get("/api/campaigns/live/aggregates?group=foo")
        assert resp.status_code == 400


class TestProposals:
    def test_semantic_only_drafts(self, client):
        resp = client.post("/api/proposals",
                           json={"base_task": "carrot_base", "axis": "S-PROP"})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["drafts"]) == 3
        for draft in body["drafts"]:
            delta = draft["condition"]["delta"]
            assert "instruction" in delta
            assert "visual" not in delta
        for proposal in body["proposals"]:
            assert proposal["visualChange"] is None

    def test_unsupported_axis_400(self, client):
        resp = client.post("/api/proposals",
                           json={"base_task": "carrot_base", "axis": "V-VIEW"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "UnsupportedAxis"

    def test_unknown_base_task_404(self, client):
        resp = client.post("/api/proposals",
                           json={"base_task": "ghost", "axis": "S-PROP"})
        assert resp.status_code == 404

    def test_transport_error_502(self, service_dir, tmp_path):
        app = create_app(service_dir, backend=MockBackend(fixtures_dir=tmp_path))
        with TestClient(app) as client:
            resp = client.post("/api/proposals",
                               json={"base_task": "carrot_base", "axis": "S-PROP"})
        assert resp.status_code == 502
        assert resp.json()["code"] == "TransportError"


class TestDraftAcceptance:
    def _draft(self, client, axis="VSB-NOBJ"):
        resp = client.post("/api/proposals",
                           json={"base_task": "carrot_base", "axis": axis})
        return resp.json()["drafts"][0]["condition"]

    def test_accept_grows_draft_only(self, client, service_dir):
        cond = self._draft(client)
        resp = client.post("/api/manifest/conditions",
                           json={"condition": cond})
        assert resp.status_code == 201
        assert not resp.json()["committed"]
        draft_path = service_dir / "bridgev2-star.draft.stargen.json"
        assert draft_path.exists()
        # original untouched; draft visible through ?draft=true
        assert len(client.get("/api/manifest").json()["conditions"]) == 55
        draft_doc = client.get("/api/manifest?draft=true").json()
        assert len(draft_doc["conditions"]) == 56
        assert draft_doc["conditions"][-1]["id"] == cond["id"]

    def test_commit_flag_rewrites_original(self, client, service_dir):
        cond = self._draft(client)
        resp = client.post("/api/manifest/conditions",
                           json={"condition": cond, "commit": True})
        assert resp.status_code == 201
        assert resp.json()["committed"]
        assert len(client.get("/api/manifest").json()["conditions"]) == 56

    def test_mislabeled_draft_422(self, client):
        cond = self._draft(client)
        cond["axis"] = "S-PROP"  # delta carries all three channels
        resp = client.post("/api/manifest/conditions", json={"condition": cond})
        assert resp.status_code == 422
        body = resp.json()
        assert body["code"] == "ManifestInvalid"
        assert any("CategoryMismatch" in d for d in body["detail"])

    def test_draft_validates_cleanly_end_to_end(self, client):
        cond = self._draft(client)
        assert client.post("/api/manifest/conditions",
                           json={"condition": cond}).status_code == 201
        draft_doc = client.get("/api/manifest?draft=true").json()
        from stargen.manifest import parse_manifest
        from stargen.canonical import canonical_bytes
        parsed = parse_manifest(canonical_bytes(draft_doc))
        assert any(c.id == cond["id"] for c in parsed.conditions)


class TestCommitEndpoint:
    def test_commit_promotes_staged_draft(self, client, service_dir):
        resp = client.post("/api/proposals",
                           json={"base_task": "carrot_base", "axis": "VSB-NOBJ"})
        cond = resp.json()["drafts"][0]["condition"]
        assert client.post("/api/manifest/conditions",
                           json={"condition": cond}).status_code == 201
        assert len(client.get("/api/manifest").json()["conditions"]) == 55
        commit = client.post("/api/manifest/commit")
        assert commit.status_code == 200
        assert commit.json()["conditions"] == 56
        assert len(client.get("/api/manifest").json()["conditions"]) == 56

    def test_commit_without_staged_changes_is_noop(self, client):
        resp = client.post("/api/manifest/commit")
        assert resp.status_code == 200
        assert resp.json()["conditions"] == 55
