"""Command-line entry points.

Subcommands: generate, train, eval, assess, explain, efficacy, serve.
Exit codes: 0 success, 2 usage errors (bad flags, missing files), 1 runtime
failures (reported as one JSON object on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _fail_usage(message: str) -> int:
    print(json.dumps({"error": {"type": "usage", "message": message}}), file=sys.stderr)
    return 2


def _fail_runtime(exc: Exception) -> int:
    print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
          file=sys.stderr)
    return 1


def _require_file(path: Path, what: str) -> None:
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")


def _resolve_checkpoint(run: Path) -> Path:
    if run.is_file():
        return run
    for name in ("best.pt", "last.pt"):
        candidate = run / "checkpoints" / name
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"no checkpoint under run directory {run}")


def cmd_generate(args) -> int:
    from echoph.synth import CohortConfig, generate_dataset

    config_doc = {}
    if args.config:
        _require_file(Path(args.config), "config file")
        config_doc = json.loads(Path(args.config).read_text())
    config = CohortConfig.from_dict(config_doc) if config_doc else CohortConfig()
    if args.seed is not None:
        config.master_seed = args.seed
    if args.n_cases is not None:
        config.n_cases = args.n_cases
    manifest = generate_dataset(config, Path(args.out), workers=args.workers)
    print(json.dumps({"manifest": str(manifest), "n_cases": config.n_cases}))
    return 0


def _load_train_configs(path: Path | None):
    from echoph.model import ModelConfig
    from echoph.training import PipelineConfig, TrainConfig

    doc = {}
    if path is not None:
        _require_file(path, "config file")
        doc = json.loads(path.read_text())
    model_config = ModelConfig.from_dict(doc.get("model_config", {}))
    train_config = TrainConfig.from_dict(doc.get("train_config", {}))
    pipeline_config = PipelineConfig.from_dict(doc.get("pipeline_config", {}))
    return model_config, train_config, pipeline_config


def cmd_train(args) -> int:
    from echoph.training import train

    _require_file(Path(args.data) / "manifest.json", "dataset manifest")
    model_config, train_config, pipeline_config = _load_train_configs(
        Path(args.config) if args.config else None
    )
    run_dir = train(
        Path(args.data), model_config, train_config, pipeline_config, Path(args.out),
        resume_from=Path(args.resume) if args.resume else None,
        epochs_override=args.epochs,
    )
    best = json.loads((run_dir / "best.json").read_text())
    print(json.dumps({"run_dir": str(run_dir), "best": best}))
    return 0


def cmd_eval(args) -> int:
    from echoph.evaluation import evaluate_split, write_report, predict_records, load_model_bundle
    from echoph.training import DiskCohort

    run = Path(args.run)
    checkpoint = _resolve_checkpoint(run)
    data = args.data
    if data is None:
        config_path = (run if run.is_dir() else run.parent.parent) / "config.json"
        _require_file(config_path, "run config")
        data = json.loads(config_path.read_text())["dataset_dir"]
    _require_file(Path(data) / "manifest.json", "dataset manifest")
    report = evaluate_split(checkpoint, Path(data), args.split, group_by=args.group_by)
    out_dir = Path(args.report)
    records = preds = None
    if args.plots:
        cohort = DiskCohort(Path(data))
        records = [cohort.load(cid) for cid in cohort.ids(args.split)]
        model, pcfg, _ = load_model_bundle(checkpoint)
        preds = predict_records(model, records, pcfg)
    path = write_report(report, out_dir, plots=args.plots, records=records, preds=preds)
    print(json.dumps({"report": str(path)}))
    return 0


def cmd_assess(args) -> int:
    import numpy as np

    from echoph.domain import classify, mpap_from_echo, pvr_from_echo, validate_case
    from echoph.evaluation import load_model_bundle, predict_records
    from echoph.service import recommendation_for, DISCLAIMER
    from echoph.synth import load_case
    from echoph.training.checkpoint import checkpoint_digest

    checkpoint = _resolve_checkpoint(Path(args.run))
    case_dir = Path(args.case)
    _require_file(case_dir / "record.json", "case record")
    record = load_case(case_dir)
    violations = validate_case(record)
    if violations:
        raise ValueError("; ".join(f"{v.code}({v.detail})" for v in violations))
    model, pcfg, _ = load_model_bundle(checkpoint)
    preds = predict_records(model, [record], pcfg)
    mpap_hat, pvr_hat = float(preds[0, 0]), float(preds[0, 1])
    taxonomy = classify(max(mpap_hat, 0.0), max(pvr_hat, 0.0))
    baseline_pvr, nonphysical = pvr_from_echo(record.echo_params.trv_max,
                                              record.echo_params.tvi_rvot)
    body = {
        "case_id": record.case_id,
        "mpap_hat": mpap_hat,
        "pvr_hat": pvr_hat,
        "taxonomy": taxonomy.to_dict(),
        "baseline_mpap": mpap_from_echo(record.echo_params.trv_max, record.echo_params.erap),
        "baseline_pvr": baseline_pvr,
        "baseline_pvr_nonphysical": nonphysical,
        "prior_pvr": record.prior_pvr,
        "recommendation": recommendation_for(pvr_hat, record.prior_pvr),
        "model_version": f"mvml-{checkpoint_digest(checkpoint)}",
        "disclaimer": DISCLAIMER,
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(body, indent=2, sort_keys=True))
    print(json.dumps({"assessment": str(out)}))
    return 0


def cmd_explain(args) -> int:
    from echoph.domain import VIDEO_VIEWS
    from echoph.evaluation import load_model_bundle
    from echoph.explain import eigencam_for_case, write_saliency
    from echoph.pipeline import sample_frames
    from echoph.synth import load_case

    checkpoint = _resolve_checkpoint(Path(args.run))
    case_dir = Path(args.case)
    _require_file(case_dir / "record.json", "case record")
    record = load_case(case_dir)
    model, pcfg, _ = load_model_bundle(checkpoint)
    saliency = eigencam_for_case(model, record, args.view, pcfg, layer=args.layer)
    import cv2
    import numpy as np

    if args.view in {v.value for v in VIDEO_VIEWS}:
        frames = sample_frames(record.videos[args.view], pcfg.frame_budget)
        h, w = saliency.values.shape[1:]
        frames = np.stack([cv2.resize(f, (w, h)) for f in frames])
    else:
        h, w = saliency.values.shape
        frames = cv2.resize(record.dopplers[args.view], (w, h))
    sidecar = write_saliency(saliency, frames, Path(args.out))
    print(json.dumps({"saliency": str(sidecar), "degenerate": saliency.degenerate}))
    return 0


def cmd_efficacy(args) -> int:
    from echoph.evaluation import efficacy_eval, load_model_bundle, predict_records
    from echoph.training import DiskCohort

    checkpoint = _resolve_checkpoint(Path(args.run))
    pairs_path = Path(args.pairs)
    _require_file(pairs_path, "pairs file")
    doc = json.loads(pairs_path.read_text())
    dataset = Path(doc["dataset"])
    _require_file(dataset / "manifest.json", "dataset manifest")
    cohort = DiskCohort(dataset)
    model, pcfg, _ = load_model_bundle(checkpoint)
    records = [cohort.load(p["case_id"]) for p in doc["pairs"]]
    preds = predict_records(model, records, pcfg)
    report = efficacy_eval(
        [p["pre_pvr"] for p in doc["pairs"]],
        [float(p[1]) for p in preds],
        [r.rhc.pvr if r.rhc else None for r in records],
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    print(json.dumps({"efficacy_report": str(out)}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from echoph.service import create_app

    checkpoint = _resolve_checkpoint(Path(args.run))
    app = create_app(checkpoint, Path(args.store))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echoph",
        description="Synthetic multi-view echo PH assessment: data generation, "
                    "training, evaluation, explanation, and serving.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic cohort")
    p.add_argument("--config", help="CohortConfig JSON file")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--n-cases", type=int, help="override cohort size")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--workers", type=int, default=1, help="parallel case writers")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train the assessment model")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--config", help="JSON with model_config/train_config/pipeline_config")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--resume", help="checkpoint to resume from")
    p.add_argument("--epochs", type=int, help="stop after this many epochs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--run", required=True, help="run directory or checkpoint file")
    p.add_argument("--data", help="dataset directory (defaults to the run's dataset)")
    p.add_argument("--split", default="test", choices=["train", "val", "test", "external"])
    p.add_argument("--report", required=True, help="report output directory")
    p.add_argument("--group-by", choices=["device", "subtype"], default=None)
    p.add_argument("--plots", action="store_true", help="emit SVG plots")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("assess", help="assess one stored case")
    p.add_argument("--run", required=True)
    p.add_argument("--case", required=True, help="case directory")
    p.add_argument("--out", required=True, help="assessment JSON path")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("explain", help="saliency overlay for a case view")
    p.add_argument("--run", required=True)
    p.add_argument("--case", required=True, help="case directory")
    p.add_argument("--view", required=True)
    p.add_argument("--layer", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("efficacy", help="treatment-efficacy evaluation over pre/post pairs")
    p.add_argument("--run", required=True)
    p.add_argument("--pairs", required=True, help="JSON: {dataset, pairs:[{case_id, pre_pvr}]}")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_efficacy)

    p = sub.add_parser("serve", help="run the HTTP assessment service")
    p.add_argument("--run", required=True)
    p.add_argument("--store", required=True, help="case store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail_usage(str(exc))
    except Exception as exc:  # surfaced as machine-readable error
        return _fail_runtime(exc)


if __name__ == "__main__":
    sys.exit(main())
