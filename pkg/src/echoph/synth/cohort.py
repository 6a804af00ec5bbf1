"""Cohort generation and the on-disk dataset layout.

One directory per case: zlib-compressed .npy video arrays, PNG Doppler
images, and a record.json with metadata/params/ground truth. The manifest
lists ids, splits, and latent ground truth. Per-case RNG streams are keyed by
(master_seed, case_index, purpose), so output bytes are independent of the
number of workers. Field names are documented in docs/dataset_schema.md.
"""

from __future__ import annotations

import io
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from PIL import Image

from echoph import rngs
from echoph.domain import (
    CaseRecord,
    Device,
    DOPPLER_VIEWS,
    EchoParams,
    PatientMetadata,
    RhcMeasurement,
    Sex,
    Subtype,
    VIDEO_VIEWS,
    validate_case,
)
from echoph.synth.latent import (
    DEFAULT_MPAP_BINS,
    EchoNoise,
    LatentHemodynamics,
    PvrLink,
    derive_echo_params,
    sample_latent,
    synthesize_metadata,
)
from echoph.synth.render import RenderConfig, render_doppler, render_video

SCHEMA_VERSION = 1


@dataclass
class CohortConfig:
    n_cases: int = 100
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)  # train/val/test
    mpap_bins: tuple = DEFAULT_MPAP_BINS
    pvr_link: PvrLink = field(default_factory=PvrLink)
    echo_noise: EchoNoise = field(default_factory=EchoNoise)
    render: RenderConfig = field(default_factory=RenderConfig)
    master_seed: int = 2024

    def validate(self) -> "CohortConfig":
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {self.split_fractions}")
        self.echo_noise.validate()
        self.render.validate()
        return self

    def split_counts(self) -> tuple[int, int, int]:
        raw = [f * self.n_cases for f in self.split_fractions]
        counts = [int(np.floor(r)) for r in raw]
        # hand leftover cases to the largest fractional remainders
        remainder = self.n_cases - sum(counts)
        order = np.argsort([c - r for c, r in zip(counts, raw)])
        for i in range(remainder):
            counts[order[i]] += 1
        return tuple(counts)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mpap_bins"] = [list(b) for b in self.mpap_bins]
        d["split_fractions"] = list(self.split_fractions)
        d["render"]["frame_size"] = list(self.render.frame_size)
        d["render"]["doppler_size"] = list(self.render.doppler_size)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CohortConfig":
        d = dict(d)
        if "mpap_bins" in d:
            d["mpap_bins"] = tuple(tuple(b) for b in d["mpap_bins"])
        if "split_fractions" in d:
            d["split_fractions"] = tuple(d["split_fractions"])
        if "pvr_link" in d and isinstance(d["pvr_link"], dict):
            d["pvr_link"] = PvrLink(**d["pvr_link"])
        if "echo_noise" in d and isinstance(d["echo_noise"], dict):
            d["echo_noise"] = EchoNoise(**d["echo_noise"])
        if "render" in d and isinstance(d["render"], dict):
            r = dict(d["render"])
            r["frame_size"] = tuple(r["frame_size"])
            r["doppler_size"] = tuple(r["doppler_size"])
            d["render"] = RenderConfig(**r)
        return cls(**d)


def split_of_index(config: CohortConfig, index: int) -> str:
    n_train, n_val, _ = config.split_counts()
    if index < n_train:
        return "train"
    if index < n_train + n_val:
        return "val"
    return "test"


def generate_case(config: CohortConfig, index: int) -> tuple[CaseRecord, LatentHemodynamics]:
    """Build one fully rendered case. Deterministic in (config, index)."""
    seed = config.master_seed
    latent = sample_latent(rngs.stream(seed, index, "latent"), config.mpap_bins, config.pvr_link)
    echo = derive_echo_params(latent, config.echo_noise, rngs.stream(seed, index, "echo"))
    metadata = synthesize_metadata(latent, rngs.stream(seed, index, "meta"))
    videos = {
        v.value: render_video(latent, v, config.render, rngs.stream(seed, index, "video", v.value))
        for v in VIDEO_VIEWS
    }
    dopplers = {
        v.value: render_doppler(latent, v, config.render, rngs.stream(seed, index, "doppler", v.value))
        for v in DOPPLER_VIEWS
    }
    aux = rngs.stream(seed, index, "rhc")
    rhc = RhcMeasurement(
        mpap=latent.mpap,
        pvr=latent.pvr,
        # the deterministic pressure link dips below mPAP for mPAP < 5.13;
        # clamp to keep the RHC invariant
        spap=max(latent.spap, latent.mpap),
        mrap=latent.erap,
        pawp=float(aux.uniform(4.0, 14.0)),
    ).validate()
    record = CaseRecord(
        case_id=f"case-{index:05d}",
        videos=videos,
        dopplers=dopplers,
        metadata=metadata,
        echo_params=echo,
        rhc=rhc,
        split=split_of_index(config, index),
    )
    violations = validate_case(record)
    if violations:
        raise RuntimeError(f"generated case failed validation: {violations}")
    return record, latent


# ---------------------------------------------------------------------------
# Disk layout


def _compress_array(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, arr)
    return zlib.compress(buf.getvalue(), level=6)


def _decompress_array(data: bytes) -> np.ndarray:
    return np.load(io.BytesIO(zlib.decompress(data)))


def _canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _metadata_dict(m: PatientMetadata) -> dict:
    return {
        "sex": m.sex.value, "age": m.age, "height": m.height, "weight": m.weight,
        "center": m.center, "device": m.device.value, "subtype": m.subtype.value,
    }


def save_case(record: CaseRecord, case_dir: Path) -> None:
    case_dir = Path(case_dir)
    case_dir.mkdir(parents=True, exist_ok=True)
    for view, arr in sorted(record.videos.items()):
        (case_dir / f"video_{view}.npy.z").write_bytes(_compress_array(arr))
    for view, arr in sorted(record.dopplers.items()):
        Image.fromarray(arr).save(case_dir / f"doppler_{view}.png")
    doc = {
        "case_id": record.case_id,
        "split": record.split,
        "metadata": _metadata_dict(record.metadata),
        "echo_params": asdict(record.echo_params),
        "rhc": asdict(record.rhc) if record.rhc is not None else None,
        "prior_pvr": record.prior_pvr,
    }
    (case_dir / "record.json").write_text(_canonical_json(doc))


def load_case(case_dir: Path, load_media: bool = True) -> CaseRecord:
    case_dir = Path(case_dir)
    doc = json.loads((case_dir / "record.json").read_text())
    videos, dopplers = {}, {}
    if load_media:
        for v in VIDEO_VIEWS:
            path = case_dir / f"video_{v.value}.npy.z"
            if path.exists():
                videos[v.value] = _decompress_array(path.read_bytes())
        for v in DOPPLER_VIEWS:
            path = case_dir / f"doppler_{v.value}.png"
            if path.exists():
                dopplers[v.value] = np.asarray(Image.open(path).convert("RGB"))
    m = doc["metadata"]
    metadata = PatientMetadata(
        sex=Sex(m["sex"]), age=m["age"], height=m["height"], weight=m["weight"],
        center=m["center"], device=Device(m["device"]), subtype=Subtype(m["subtype"]),
    )
    rhc = RhcMeasurement(**doc["rhc"]) if doc.get("rhc") else None
    return CaseRecord(
        case_id=doc["case_id"],
        videos=videos,
        dopplers=dopplers,
        metadata=metadata,
        echo_params=EchoParams(**doc["echo_params"]),
        rhc=rhc,
        split=doc.get("split", "test"),
        prior_pvr=doc.get("prior_pvr"),
    )


def _generate_and_save(args) -> dict:
    config_dict, index, out_dir = args
    config = CohortConfig.from_dict(config_dict)
    record, latent = generate_case(config, index)
    save_case(record, Path(out_dir) / "cases" / record.case_id)
    return {
        "case_id": record.case_id,
        "split": record.split,
        "path": f"cases/{record.case_id}",
        "latent": latent.to_dict(),
    }


def generate_dataset(config: CohortConfig, out_dir: Path, workers: int = 1) -> Path:
    """Write the full cohort and its manifest; returns the manifest path.

    Output bytes depend only on the config (parallelism degree included in
    neither the streams nor the manifest order).
    """
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(config.to_dict(), i, str(out_dir)) for i in range(config.n_cases)]
    if workers <= 1:
        entries = [_generate_and_save(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_generate_and_save, jobs, chunksize=8))
    entries.sort(key=lambda e: e["case_id"])
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "cases": entries,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(_canonical_json(manifest))
    return manifest_path


def load_manifest(dataset_dir: Path) -> dict:
    return json.loads((Path(dataset_dir) / "manifest.json").read_text())


def case_ids_for_split(manifest: dict, split: str) -> list[str]:
    return [e["case_id"] for e in manifest["cases"] if e["split"] == split]
