"""JSON-over-HTTP assessment service.

Endpoints (documented in docs/api.md):
  GET  /healthz                      -> {status, model_version}
  POST /v1/cases                     -> store a multipart case bundle
  POST /v1/cases/{id}/assess         -> AssessmentResponse
  GET  /v1/cases/{id}/explanation    -> saliency overlay frames (base64 PNG)
  GET  /v1/cases                     -> case list with taxonomy summaries

Responses are serialized through one canonical JSON encoder (sorted keys,
floats rounded to 6 decimals) so that identical state replays byte-identical
bodies. The case store is a directory of case bundles in the dataset layout
plus a cached assessment.json per case.
"""

from __future__ import annotations

import base64
import collections
import io
import json
import threading
import uuid
import zlib
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import Response
from starlette.datastructures import UploadFile as StarletteUploadFile

from echoph.domain import (
    DELTA_PVR_THRESHOLDS,
    DOPPLER_VIEWS,
    MPAP_THRESHOLDS,
    PVR_THRESHOLDS,
    VIDEO_VIEWS,
    classify,
    delta_pvr_category,
    delta_pvr_percent,
    mpap_from_echo,
    pvr_from_echo,
)
from echoph.evaluation.infer import load_model_bundle, predict_records
from echoph.explain import eigencam_for_case, overlay
from echoph.pipeline import BpeTokenizer, sample_frames
from echoph.synth.cohort import load_case
from echoph.training.checkpoint import checkpoint_digest
from echoph.domain import validate_case

RECOMMEND_ROUTINE = "Routine follow-up"
RECOMMEND_REFERRAL = "Specialist referral"
RECOMMEND_RHC = "Confirmatory RHC advised"

PROGRESSION_DELTA_PERCENT = 5.0  # predicted PVR rise beyond this flags progression
DISCLAIMER = "Decision support only; not a diagnosis."

# Guideline boundaries served to clients: the UI renders bands from these
# values instead of hard-coding thresholds.
THRESHOLDS = {
    "mpap": list(MPAP_THRESHOLDS),
    "pvr": list(PVR_THRESHOLDS),
    "delta_pvr_percent": list(DELTA_PVR_THRESHOLDS),
}


def _round_floats(obj, ndigits: int = 6):
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


def canonical_response(payload: dict, status_code: int = 200) -> Response:
    body = json.dumps(_round_floats(payload), sort_keys=True, separators=(",", ":"))
    return Response(content=body, status_code=status_code, media_type="application/json")


def error_response(status_code: int, code: str, message: str, **extra) -> Response:
    return canonical_response({"code": code, "message": message, **extra}, status_code)


def recommendation_for(pvr_hat: float, prior_pvr: float | None) -> str:
    """Pure mapping from predicted hemodynamics to the decision-support hint.
    Severe predicted resistance dominates; otherwise a predicted PVR rise of
    more than PROGRESSION_DELTA_PERCENT vs the stored prior asks for
    confirmatory RHC."""
    if pvr_hat >= 5.0:
        return RECOMMEND_REFERRAL
    if prior_pvr is not None and prior_pvr > 0:
        delta_percent = 100.0 * (pvr_hat - prior_pvr) / prior_pvr
        if delta_percent >= PROGRESSION_DELTA_PERCENT:
            return RECOMMEND_RHC
    return RECOMMEND_ROUTINE


class CaseStore:
    """Directory-backed case store, one subdirectory per case id. Writes are
    serialized per case id; reads are lock-free."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = collections.defaultdict(threading.Lock)

    def lock_for(self, case_id: str) -> threading.Lock:
        return self._locks[case_id]

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "record.json").exists())

    def dir_of(self, case_id: str) -> Path:
        return self.root / case_id

    def exists(self, case_id: str) -> bool:
        return (self.dir_of(case_id) / "record.json").exists()

    def load(self, case_id: str):
        return load_case(self.dir_of(case_id))

    def store_bundle(self, record_json: bytes, media: dict[str, bytes]) -> str:
        doc = json.loads(record_json)
        case_id = doc.get("case_id")
        if not case_id or not isinstance(case_id, str):
            raise ValueError("record.json must provide a string case_id")
        with self.lock_for(case_id):
            case_dir = self.dir_of(case_id)
            case_dir.mkdir(parents=True, exist_ok=True)
            (case_dir / "record.json").write_bytes(record_json)
            for name, blob in media.items():
                if not (name.startswith("video_") or name.startswith("doppler_")):
                    raise ValueError(f"unexpected bundle member {name!r}")
                suffix = ".npy.z" if name.startswith("video_") else ".png"
                (case_dir / f"{name}{suffix}").write_bytes(blob)
            record = self.load(case_id)
            violations = validate_case(record)
            if violations:
                raise ValueError(
                    "; ".join(f"{v.code}({v.detail})" for v in violations)
                )
        return case_id


def create_app(checkpoint_path: str | Path, store_dir: str | Path) -> FastAPI:
    model, pcfg, _payload = load_model_bundle(checkpoint_path)
    tokenizer = BpeTokenizer.from_asset()
    store = CaseStore(store_dir)
    model_version = f"mvml-{checkpoint_digest(checkpoint_path)}"

    app = FastAPI(title="echoph assessment service")

    def assess_case(case_id: str) -> dict:
        record = store.load(case_id)
        preds = predict_records(model, [record], pcfg, tokenizer)
        mpap_hat, pvr_hat = float(preds[0, 0]), float(preds[0, 1])
        taxonomy = classify(max(mpap_hat, 0.0), max(pvr_hat, 0.0))
        ep = record.echo_params
        baseline_mpap = mpap_from_echo(ep.trv_max, ep.erap)
        baseline_pvr, nonphysical = pvr_from_echo(ep.trv_max, ep.tvi_rvot)
        delta_percent = None
        delta_category = None
        if record.prior_pvr is not None and record.prior_pvr > 0:
            delta_percent = delta_pvr_percent(record.prior_pvr, max(pvr_hat, 0.0))
            delta_category = delta_pvr_category(record.prior_pvr, max(pvr_hat, 0.0)).value
        body = {
            "case_id": case_id,
            "mpap_hat": mpap_hat,
            "pvr_hat": pvr_hat,
            "taxonomy": taxonomy.to_dict(),
            "baseline_mpap": baseline_mpap,
            "baseline_pvr": baseline_pvr,
            "baseline_pvr_nonphysical": nonphysical,
            "prior_pvr": record.prior_pvr,
            "delta_pvr_percent": delta_percent,
            "delta_pvr_category": delta_category,
            "recommendation": recommendation_for(pvr_hat, record.prior_pvr),
            "model_version": model_version,
            "explanation_uri": f"/v1/cases/{case_id}/explanation",
            "thresholds": THRESHOLDS,
            "disclaimer": DISCLAIMER,
        }
        cache = store.dir_of(case_id) / "assessment.json"
        with store.lock_for(case_id):
            cache.write_text(json.dumps(_round_floats(body), sort_keys=True, indent=2))
        return body

    @app.get("/healthz")
    def healthz():
        return canonical_response({
            "status": "ok",
            "model_version": model_version,
            "thresholds": THRESHOLDS,
        })

    @app.get("/v1/cases")
    def list_cases():
        cases = []
        for case_id in store.ids():
            record = store.load(case_id)
            entry = {
                "case_id": case_id,
                "metadata": {
                    "sex": record.metadata.sex.value,
                    "age": record.metadata.age,
                    "device": record.metadata.device.value,
                    "subtype": record.metadata.subtype.value,
                },
                "assessed": (store.dir_of(case_id) / "assessment.json").exists(),
                "taxonomy": None,
                "mpap_hat": None,
                "pvr_hat": None,
            }
            if entry["assessed"]:
                cached = json.loads((store.dir_of(case_id) / "assessment.json").read_text())
                entry["taxonomy"] = cached["taxonomy"]
                entry["mpap_hat"] = cached["mpap_hat"]
                entry["pvr_hat"] = cached["pvr_hat"]
            cases.append(entry)
        return canonical_response({"cases": cases})

    @app.post("/v1/cases")
    async def upload_case(request: Request):
        form = await request.form()
        record_json = None
        media: dict[str, bytes] = {}
        for name, value in form.multi_items():
            if not isinstance(value, StarletteUploadFile):
                continue
            blob = await value.read()
            if name == "record":
                record_json = blob
            else:
                media[name] = blob
        if record_json is None:
            return error_response(400, "malformed_bundle", "missing record.json part")
        try:
            case_id = store.store_bundle(record_json, media)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            return error_response(400, "malformed_bundle", str(exc))
        return canonical_response({"case_id": case_id}, status_code=201)

    @app.post("/v1/cases/{case_id}/assess")
    def assess(case_id: str):
        if not store.exists(case_id):
            return error_response(404, "unknown_case", f"case {case_id!r} not found")
        try:
            return canonical_response(assess_case(case_id))
        except Exception as exc:  # inference failure -> diagnostic id
            diagnostic_id = uuid.uuid5(uuid.NAMESPACE_URL, f"assess:{case_id}").hex[:12]
            return error_response(500, "inference_failure", str(exc),
                                  diagnostic_id=diagnostic_id)

    @app.get("/v1/cases/{case_id}/explanation")
    def explanation(case_id: str, view: str = "A4C"):
        if not store.exists(case_id):
            return error_response(404, "unknown_case", f"case {case_id!r} not found")
        valid_views = {v.value for v in VIDEO_VIEWS} | {v.value for v in DOPPLER_VIEWS}
        if view not in valid_views:
            return error_response(400, "unknown_view", f"view must be one of {sorted(valid_views)}")
        try:
            record = store.load(case_id)
            saliency = eigencam_for_case(model, record, view, pcfg, tokenizer=tokenizer)
            if view in {v.value for v in VIDEO_VIEWS}:
                frames = sample_frames(record.videos[view], pcfg.frame_budget)
                import cv2

                h, w = saliency.values.shape[1:]
                resized = np.stack([cv2.resize(f, (w, h)) for f in frames])
                rendered = overlay(saliency, resized)
            else:
                img = record.dopplers[view]
                import cv2

                h, w = saliency.values.shape
                rendered = overlay(saliency, cv2.resize(img, (w, h)))[None]
            encoded = []
            from PIL import Image

            for frame in rendered:
                buf = io.BytesIO()
                Image.fromarray(frame).save(buf, format="PNG")
                encoded.append(base64.b64encode(buf.getvalue()).decode("ascii"))
            return canonical_response({
                "case_id": case_id,
                "view": view,
                "layer": saliency.layer,
                "normalization_max": saliency.normalization_max,
                "degenerate": saliency.degenerate,
                "legend": {"min": 0.0, "max": 1.0},
                "frames": encoded,
            })
        except Exception as exc:
            diagnostic_id = uuid.uuid5(uuid.NAMESPACE_URL, f"explain:{case_id}:{view}").hex[:12]
            return error_response(500, "inference_failure", str(exc),
                                  diagnostic_id=diagnostic_id)

    return app


def compress_video_array(arr: np.ndarray) -> bytes:
    """Client-side helper matching the bundle's video encoding."""
    buf = io.BytesIO()
    np.save(buf, arr)
    return zlib.compress(buf.getvalue(), level=6)
