import json
import shutil

import pytest
from fastapi.testclient import TestClient

from conftest import write_untrained_checkpoint

from echoph.service import (
    RECOMMEND_REFERRAL,
    RECOMMEND_RHC,
    RECOMMEND_ROUTINE,
    create_app,
    recommendation_for,
)
from echoph.training import DiskCohort


@pytest.fixture(scope="module")
def service(smoke_dataset, tmp_path_factory):
    root = tmp_path_factory.mktemp("service")
    checkpoint = write_untrained_checkpoint(root / "model.pt")
    store_dir = root / "store"
    store_dir.mkdir()
    cohort = DiskCohort(smoke_dataset)
    ids = cohort.ids("test")[:2]
    for cid in ids:
        shutil.copytree(smoke_dataset / "cases" / cid, store_dir / cid)
    # second case carries a pre-treatment PVR
    followup = store_dir / ids[1] / "record.json"
    doc = json.loads(followup.read_text())
    doc["prior_pvr"] = round(doc["rhc"]["pvr"] * 1.5, 3)
    followup.write_text(json.dumps(doc, indent=2, sort_keys=True))
    app = create_app(checkpoint, store_dir)
    return TestClient(app), store_dir, smoke_dataset, ids


class TestRecommendationRule:
    @pytest.mark.parametrize(
        "pvr_hat,prior,expected",
        [
            (8.0, None, RECOMMEND_REFERRAL),
            (5.0, None, RECOMMEND_REFERRAL),        # boundary inclusive
            (5.0, 3.0, RECOMMEND_REFERRAL),         # severity dominates progression
            (4.0, 3.0, RECOMMEND_RHC),              # +33% rise
            (3.1, 3.0, RECOMMEND_ROUTINE),          # +3.3%, below progression cutoff
            (2.5, 2.0, RECOMMEND_RHC),              # +25% rise
            (2.08, 2.0, RECOMMEND_ROUTINE),         # +4%, below cutoff
            (2.0, 3.0, RECOMMEND_ROUTINE),          # improvement
            (1.0, None, RECOMMEND_ROUTINE),
            (4.9, None, RECOMMEND_ROUTINE),
        ],
    )
    def test_table(self, pvr_hat, prior, expected):
        assert recommendation_for(pvr_hat, prior) == expected


class TestEndpoints:
    def test_healthz(self, service):
        client, *_ = service
        res = client.get("/healthz")
        assert res.status_code == 200
        body = res.json()
        assert body["status"] == "ok"
        assert body["model_version"].startswith("mvml-")
        assert body["thresholds"] == {
            "mpap": [20.0, 35.0, 50.0],
            "pvr": [2.0, 5.0],
            "delta_pvr_percent": [-30.0, -5.0],
        }

    def test_list_cases(self, service):
        client, _, _, ids = service
        res = client.get("/v1/cases")
        assert res.status_code == 200
        cases = res.json()["cases"]
        assert [c["case_id"] for c in cases][: len(ids)] == ids
        assert all(set(c) >= {"case_id", "assessed", "taxonomy", "metadata"} for c in cases)

    def test_assess_idempotent_and_consistent(self, service):
        from echoph.domain import classify

        client, _, _, ids = service
        first = client.post(f"/v1/cases/{ids[0]}/assess")
        second = client.post(f"/v1/cases/{ids[0]}/assess")
        assert first.status_code == 200
        assert first.content == second.content
        body = first.json()
        # taxonomy is recomputable from the returned predictions
        expected = classify(max(body["mpap_hat"], 0.0), max(body["pvr_hat"], 0.0))
        assert body["taxonomy"] == expected.to_dict()
        assert body["recommendation"] == recommendation_for(body["pvr_hat"], body["prior_pvr"])
        assert body["disclaimer"]
        assert "thresholds" in body
        # no prior on this case: follow-up fields stay null
        assert body["prior_pvr"] is None
        assert body["delta_pvr_percent"] is None
        assert body["delta_pvr_category"] is None

    def test_assessed_flag_appears_in_listing(self, service):
        client, _, _, ids = service
        client.post(f"/v1/cases/{ids[0]}/assess")
        cases = client.get("/v1/cases").json()["cases"]
        entry = next(c for c in cases if c["case_id"] == ids[0])
        assert entry["assessed"] is True
        assert entry["taxonomy"] is not None

    def test_followup_fields_served(self, service):
        from echoph.domain import delta_pvr_category, delta_pvr_percent

        client, _, _, ids = service
        body = client.post(f"/v1/cases/{ids[1]}/assess").json()
        assert body["prior_pvr"] is not None
        want_pct = delta_pvr_percent(body["prior_pvr"], max(body["pvr_hat"], 0.0))
        assert body["delta_pvr_percent"] == pytest.approx(want_pct, abs=1e-4)
        want_cat = delta_pvr_category(body["prior_pvr"], max(body["pvr_hat"], 0.0))
        assert body["delta_pvr_category"] == want_cat.value

    def test_unknown_case_404(self, service):
        client, *_ = service
        res = client.post("/v1/cases/nope/assess")
        assert res.status_code == 404
        assert res.json()["code"] == "unknown_case"

    def test_upload_bundle_roundtrip(self, service, smoke_dataset):
        client, _, _, _ = service
        cohort = DiskCohort(smoke_dataset)
        source = smoke_dataset / "cases" / cohort.ids("val")[0]
        record = json.loads((source / "record.json").read_text())
        record["case_id"] = "uploaded-001"
        files = [("record", ("record.json", json.dumps(record).encode(), "application/json"))]
        for path in sorted(source.glob("video_*.npy.z")):
            files.append((path.name.replace(".npy.z", ""), (path.name, path.read_bytes())))
        for path in sorted(source.glob("doppler_*.png")):
            files.append((path.name.replace(".png", ""), (path.name, path.read_bytes())))
        res = client.post("/v1/cases", files=files)
        assert res.status_code == 201
        assert res.json() == {"case_id": "uploaded-001"}
        assess = client.post("/v1/cases/uploaded-001/assess")
        assert assess.status_code == 200

    def test_upload_missing_view_400(self, service, smoke_dataset):
        client, _, _, _ = service
        cohort = DiskCohort(smoke_dataset)
        source = smoke_dataset / "cases" / cohort.ids("val")[0]
        record = json.loads((source / "record.json").read_text())
        record["case_id"] = "broken-001"
        files = [("record", ("record.json", json.dumps(record).encode(), "application/json"))]
        for path in sorted(source.glob("video_*.npy.z")):
            files.append((path.name.replace(".npy.z", ""), (path.name, path.read_bytes())))
        for path in sorted(source.glob("doppler_*.png")):
            if "TR" in path.name:
                continue
            files.append((path.name.replace(".png", ""), (path.name, path.read_bytes())))
        res = client.post("/v1/cases", files=files)
        assert res.status_code == 400
        body = res.json()
        assert body["code"] == "malformed_bundle"
        assert "TR" in body["message"]

    def test_explanation_endpoint(self, service):
        client, _, _, ids = service
        res = client.get(f"/v1/cases/{ids[0]}/explanation", params={"view": "A4C"})
        assert res.status_code == 200
        body = res.json()
        assert body["legend"] == {"min": 0.0, "max": 1.0}
        assert len(body["frames"]) == 8  # pipeline frame budget
        assert body["layer"].startswith("video_encoder")

    def test_explanation_unknown_view_400(self, service):
        client, _, _, ids = service
        res = client.get(f"/v1/cases/{ids[0]}/explanation", params={"view": "XXX"})
        assert res.status_code == 400

    def test_responses_replay_byte_identical(self, service):
        client, _, _, ids = service
        for method, url in [
            ("GET", "/healthz"),
            ("GET", "/v1/cases"),
            ("POST", f"/v1/cases/{ids[1]}/assess"),
            ("GET", f"/v1/cases/{ids[1]}/explanation?view=TR"),
        ]:
            first = client.request(method, url)
            second = client.request(method, url)
            assert first.content == second.content, url
