#!/usr/bin/env python3
"""Record the service contract fixtures: a tiny deterministic checkpoint, a
three-case store, an upload bundle, and the exact request/response bytes for
every endpoint. The recordings are committed and replayed by the acceptance
suite and consumed by the frontend's fixture mode."""

from __future__ import annotations

import argparse
import base64
import json
import shutil
import tempfile
from pathlib import Path

import torch

from fastapi.testclient import TestClient

from echoph.model import ModelConfig, build_model
from echoph.pipeline import AugmentConfig
from echoph.service import create_app
from echoph.synth import CohortConfig, EchoNoise, RenderConfig, generate_dataset
from echoph.training import PipelineConfig, TrainConfig, save_checkpoint

FIXTURE_SEED = 60311


def fixture_model_config() -> ModelConfig:
    return ModelConfig(
        channels=8, embed_dim=8, text_embed_dim=4, head_hidden=8,
        video_stem_channels=4, video_stage_channels=(4, 8),
        video_stage_strides=((2, 2, 2), (2, 2, 2)),
        doppler_stem_channels=4, doppler_stage_channels=(4, 8),
        doppler_stem_stride=4, doppler_stage_strides=((2, 2), (2, 2)),
    )


def fixture_pipeline_config() -> PipelineConfig:
    return PipelineConfig(
        frame_budget=8,
        augment=AugmentConfig(crop_size=48, rotation_degrees=5.0),
        doppler_target=(200, 150),
        mask_prob=0.15,
    )


def fixture_cohort_config() -> CohortConfig:
    return CohortConfig(
        n_cases=4,
        split_fractions=(0.25, 0.25, 0.5),
        echo_noise=EchoNoise(),
        render=RenderConfig(frame_count=16, frame_size=(64, 64), doppler_size=(200, 150)),
        master_seed=FIXTURE_SEED,
    )


def build_fixture_assets(out_dir: Path) -> tuple[Path, Path, Path]:
    """Write checkpoint + store + upload bundle; returns their paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = out_dir / "checkpoint.pt"
    cfg = fixture_model_config()
    model = build_model(cfg, init_seed=FIXTURE_SEED)
    optimizer = torch.optim.Adam(model.trainable_parameters())
    save_checkpoint(checkpoint, {
        "kind": "mvml",
        "model_config": cfg.to_dict(),
        "train_config": TrainConfig(seed=FIXTURE_SEED, init_seed=FIXTURE_SEED).to_dict(),
        "pipeline_config": fixture_pipeline_config().to_dict(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict(),
        "epoch": 0,
        "step": 0,
        "val_log": [],
    })

    with tempfile.TemporaryDirectory() as tmp:
        data_dir = Path(tmp) / "data"
        generate_dataset(fixture_cohort_config(), data_dir, workers=1)
        store = out_dir / "store"
        if store.exists():
            shutil.rmtree(store)
        store.mkdir(parents=True)
        case_dirs = sorted((data_dir / "cases").iterdir())
        for case_dir in case_dirs[:3]:
            shutil.copytree(case_dir, store / case_dir.name)
        # second case carries a pre-treatment PVR so follow-up fields appear
        followup = store / case_dirs[1].name / "record.json"
        record = json.loads(followup.read_text())
        record["prior_pvr"] = round(record["rhc"]["pvr"] * 1.3, 3)
        followup.write_text(json.dumps(record, indent=2, sort_keys=True))
        upload_dir = out_dir / "upload_case"
        if upload_dir.exists():
            shutil.rmtree(upload_dir)
        shutil.copytree(case_dirs[3], upload_dir)
        record = json.loads((upload_dir / "record.json").read_text())
        record["case_id"] = "uploaded-0001"
        (upload_dir / "record.json").write_text(json.dumps(record, indent=2, sort_keys=True))
    return checkpoint, out_dir / "store", out_dir / "upload_case"


def upload_files(upload_dir: Path) -> list:
    files = [("record", ("record.json", (upload_dir / "record.json").read_bytes(),
                         "application/json"))]
    for path in sorted(upload_dir.glob("video_*.npy.z")):
        files.append((path.name.replace(".npy.z", ""), (path.name, path.read_bytes())))
    for path in sorted(upload_dir.glob("doppler_*.png")):
        files.append((path.name.replace(".png", ""), (path.name, path.read_bytes())))
    return files


FIXTURE_REQUESTS = [
    {"name": "healthz", "method": "GET", "path": "/healthz"},
    {"name": "cases_initial", "method": "GET", "path": "/v1/cases"},
    {"name": "assess_case0", "method": "POST", "path": "/v1/cases/{case0}/assess"},
    {"name": "assess_case1", "method": "POST", "path": "/v1/cases/{case1}/assess"},
    {"name": "cases_after_assess", "method": "GET", "path": "/v1/cases"},
    {"name": "explanation_video", "method": "GET",
     "path": "/v1/cases/{case0}/explanation?view=A4C"},
    {"name": "explanation_doppler", "method": "GET",
     "path": "/v1/cases/{case0}/explanation?view=TR"},
    {"name": "upload", "method": "POST", "path": "/v1/cases", "upload": True},
    {"name": "assess_uploaded", "method": "POST", "path": "/v1/cases/uploaded-0001/assess"},
    {"name": "cases_final", "method": "GET", "path": "/v1/cases"},
    {"name": "unknown_case", "method": "POST", "path": "/v1/cases/no-such-case/assess"},
    {"name": "unknown_view", "method": "GET",
     "path": "/v1/cases/{case0}/explanation?view=XXX"},
]


def replay_requests(client: TestClient, case_ids: list[str], upload_dir: Path) -> list[dict]:
    """Issue the canonical request sequence; returns recorded entries."""
    entries = []
    subst = {"case0": case_ids[0], "case1": case_ids[1]}
    for req in FIXTURE_REQUESTS:
        path = req["path"].format(**subst)
        if req.get("upload"):
            response = client.post(path, files=upload_files(upload_dir))
        else:
            response = client.request(req["method"], path)
        entries.append({
            "name": req["name"],
            "method": req["method"],
            "path": path,
            "upload": bool(req.get("upload")),
            "status": response.status_code,
            "body_b64": base64.b64encode(response.content).decode("ascii"),
        })
    return entries


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", type=Path,
        default=Path(__file__).resolve().parents[1] / "fixtures" / "service",
    )
    args = parser.parse_args()
    checkpoint, store, upload_dir = build_fixture_assets(args.out)

    with tempfile.TemporaryDirectory() as tmp:
        live_store = Path(tmp) / "store"
        shutil.copytree(store, live_store)
        app = create_app(checkpoint, live_store)
        client = TestClient(app)
        case_ids = sorted(p.name for p in store.iterdir())
        entries = replay_requests(client, case_ids, upload_dir)

    (args.out / "fixtures.json").write_text(json.dumps({
        "seed": FIXTURE_SEED,
        "case_ids": case_ids,
        "requests": entries,
    }, indent=2, sort_keys=True))
    print(f"recorded {len(entries)} fixtures under {args.out}")


if __name__ == "__main__":
    main()
