#!/usr/bin/env python3
"""Full desk-scale experiment: generate the noisy synthetic cohort, train the
multi-view model, and compare it against the clinical formula baseline on the
test split. Writes summary.json into the work directory.

    python scripts/run_desk_experiment.py --workdir /tmp/exp \
        --config configs/desk_e2e.json
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np


def run_experiment(
    workdir: Path,
    config_path: Path,
    epochs: int | None = None,
    workers: int = 2,
    reuse: bool = True,
) -> dict:
    from echoph.evaluation import evaluate_split
    from echoph.model import ModelConfig
    from echoph.synth import CohortConfig, generate_dataset
    from echoph.training import PipelineConfig, TrainConfig, train

    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    doc = json.loads(Path(config_path).read_text())
    cohort_config = CohortConfig.from_dict(doc["cohort"])
    model_config = ModelConfig.from_dict(doc.get("model_config", {}))
    train_config = TrainConfig.from_dict(doc.get("train_config", {}))
    pipeline_config = PipelineConfig.from_dict(doc.get("pipeline_config", {}))
    if epochs is not None:
        train_config.epochs = epochs

    timings = {}
    data_dir = workdir / "data"
    t0 = time.time()
    if not (reuse and (data_dir / "manifest.json").exists()):
        generate_dataset(cohort_config, data_dir, workers=workers)
    timings["generate_s"] = round(time.time() - t0, 1)

    run_dir = workdir / "run"
    t0 = time.time()
    best_path = run_dir / "checkpoints" / "best.pt"
    if not (reuse and best_path.exists() and (run_dir / "best.json").exists()):
        train(data_dir, model_config, train_config, pipeline_config, run_dir)
    timings["train_s"] = round(time.time() - t0, 1)

    t0 = time.time()
    report = evaluate_split(best_path, data_dir, "test")
    timings["eval_s"] = round(time.time() - t0, 1)

    mpap = report["targets"]["mpap"]
    pvr = report["targets"]["pvr"]
    summary = {
        "timings": timings,
        "best": json.loads((run_dir / "best.json").read_text()),
        "model_mae_mpap": mpap["model"]["mae"],
        "baseline_mae_mpap": mpap["baseline"]["mae"],
        "model_r2_mpap": mpap["model"]["r2"],
        "model_mae_pvr": pvr["model"]["mae"],
        "baseline_mae_pvr": pvr["baseline"]["mae"],
        "model_r2_pvr": pvr["model"]["r2"],
        "p_mpap": mpap["ttest_model_vs_baseline"]["p_value"],
        "p_pvr": pvr["ttest_model_vs_baseline"]["p_value"],
        "criteria": {},
    }
    summary["criteria"] = {
        "mae_mpap_below_baseline": summary["model_mae_mpap"] < summary["baseline_mae_mpap"],
        "mae_pvr_below_baseline": summary["model_mae_pvr"] < summary["baseline_mae_pvr"],
        "p_mpap_significant": summary["p_mpap"] <= 0.05,
        "p_pvr_significant": summary["p_pvr"] <= 0.05,
        "r2_mpap_above_half": (summary["model_r2_mpap"] or 0.0) > 0.5,
    }
    (workdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    (workdir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    return summary


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, required=True)
    parser.add_argument("--config", type=Path,
                        default=Path(__file__).resolve().parents[1] / "configs" / "desk_e2e.json")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--fresh", action="store_true",
                        help="regenerate data and retrain even if artifacts exist")
    args = parser.parse_args()
    summary = run_experiment(args.workdir, args.config, epochs=args.epochs,
                             workers=args.workers, reuse=not args.fresh)
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
