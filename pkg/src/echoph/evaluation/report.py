"""Split evaluation: model vs formula baseline with the full statistics
battery, subgroup breakdowns, JSON/CSV serialization, and optional SVG plots.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from echoph.domain import mpap_from_echo, pvr_from_echo
from echoph.evaluation.infer import load_model_bundle, predict_records
from echoph.evaluation.metrics import bland_altman, regression_metrics
from echoph.evaluation.stats import auc_roc, delong_test, paired_ttest
from echoph.training.data import DiskCohort

MIN_GROUP_SIZE = 5

# ROC task definitions: (name, labeling threshold on the RHC target, which
# predicted value serves as the score, optional restriction)
ROC_TASKS = (
    ("ph_by_mpap", "mpap", 20.0, None),
    ("pvr_abnormal", "pvr", 2.0, None),
    ("pvr_severity", "pvr", 5.0, ("pvr", 2.0)),
)


def formula_baseline(records) -> np.ndarray:
    rows = []
    for record in records:
        ep = record.echo_params
        mpap = mpap_from_echo(ep.trv_max, ep.erap)
        pvr, _ = pvr_from_echo(ep.trv_max, ep.tvi_rvot)
        rows.append((mpap, pvr))
    return np.array(rows, dtype=np.float64)


def _target_array(records) -> np.ndarray:
    return np.array([(r.rhc.mpap, r.rhc.pvr) for r in records], dtype=np.float64)


def _roc_block(preds: np.ndarray, baseline: np.ndarray, targets: np.ndarray) -> dict:
    out = {}
    for name, target_key, threshold, restrict in ROC_TASKS:
        col = 0 if target_key == "mpap" else 1
        mask = np.ones(len(targets), dtype=bool)
        if restrict is not None:
            rcol = 0 if restrict[0] == "mpap" else 1
            mask = targets[:, rcol] >= restrict[1]
        labels = targets[mask, col] >= threshold
        if labels.all() or not labels.any():
            out[name] = {"note": "single-class labels; AUC omitted", "n": int(mask.sum())}
            continue
        model_auc = auc_roc(preds[mask, col], labels)
        base_auc = auc_roc(baseline[mask, col], labels)
        entry = {
            "model": model_auc.to_dict(),
            "baseline": base_auc.to_dict(),
            "threshold": threshold,
            "score": target_key,
        }
        entry["delong_vs_baseline"] = delong_test(
            preds[mask, col], baseline[mask, col], labels
        ).to_dict()
        out[name] = entry
    return out


def build_report(records, preds: np.ndarray, split: str, checkpoint_id: str) -> dict:
    """Assemble the metrics report for already-computed predictions."""
    targets = _target_array(records)
    baseline = formula_baseline(records)
    report = {
        "split": split,
        "n_cases": len(records),
        "checkpoint": checkpoint_id,
        "targets": {},
        "roc": _roc_block(preds, baseline, targets),
    }
    for col, name in ((0, "mpap"), (1, "pvr")):
        model_err = np.abs(preds[:, col] - targets[:, col])
        base_err = np.abs(baseline[:, col] - targets[:, col])
        block = {
            "model": regression_metrics(preds[:, col], targets[:, col]).to_dict(),
            "baseline": regression_metrics(baseline[:, col], targets[:, col]).to_dict(),
        }
        if len(records) >= 2:
            block["bland_altman_model"] = bland_altman(preds[:, col], targets[:, col]).to_dict()
            block["bland_altman_baseline"] = bland_altman(baseline[:, col], targets[:, col]).to_dict()
            block["ttest_model_vs_baseline"] = paired_ttest(model_err, base_err).to_dict()
        report["targets"][name] = block
    return report


def evaluate_split(
    checkpoint_path: str | Path,
    dataset_dir: str | Path,
    split: str,
    group_by: str | None = None,
    batch_size: int = 8,
) -> dict:
    """Run inference on a split and compute the full report; optionally add
    per-device or per-subtype subgroup reports."""
    model, pcfg, payload = load_model_bundle(checkpoint_path)
    cohort = DiskCohort(dataset_dir)
    ids = cohort.ids(split)
    if not ids:
        raise ValueError(f"split {split!r} is empty")
    records = [cohort.load(cid) for cid in ids]
    preds = predict_records(model, records, pcfg, batch_size=batch_size)
    checkpoint_id = f"mvml-epoch{payload.get('epoch', -1)}"
    report = build_report(records, preds, split, checkpoint_id)
    report["case_predictions"] = {
        r.case_id: {"mpap_hat": float(p[0]), "pvr_hat": float(p[1])}
        for r, p in zip(records, preds)
    }
    if group_by is not None:
        report["subgroups"] = subgroup_report(records, preds, split, checkpoint_id, group_by)
    return report


def subgroup_report(records, preds: np.ndarray, split: str, checkpoint_id: str,
                    group_by: str) -> dict:
    if group_by not in ("device", "subtype"):
        raise ValueError(f"group_by must be 'device' or 'subtype', got {group_by!r}")
    keys = [getattr(r.metadata, group_by).value for r in records]
    out = {}
    for key in sorted(set(keys)):
        mask = np.array([k == key for k in keys])
        group_records = [r for r, m in zip(records, mask) if m]
        if not group_records:
            continue
        sub = build_report(group_records, preds[mask], split, checkpoint_id)
        sub["group"] = {group_by: key, "n": len(group_records),
                        "small_group": len(group_records) < MIN_GROUP_SIZE}
        out[key] = sub
    return out


def canonical_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def write_report(report: dict, out_dir: str | Path, plots: bool = False,
                 records=None, preds=None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(canonical_json(report))
    _write_csv(report, out_dir / "report.csv")
    if plots and records is not None and preds is not None:
        write_plots(records, preds, out_dir)
    return json_path


def _write_csv(report: dict, path: Path) -> None:
    rows = []
    for target, block in report.get("targets", {}).items():
        for source in ("model", "baseline"):
            m = block[source]
            rows.append({
                "target": target, "source": source, "mae": m["mae"],
                "r2": m["r2"], "rmse": m["rmse"], "n": m["n"],
            })
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["target", "source", "mae", "r2", "rmse", "n"])
        writer.writeheader()
        writer.writerows(rows)


def write_plots(records, preds: np.ndarray, out_dir: str | Path) -> list[Path]:
    """Scatter, Bland-Altman, and ROC figures as byte-stable SVG files."""
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "echoph"

    out_dir = Path(out_dir)
    targets = _target_array(records)
    written = []
    for col, name in ((0, "mpap"), (1, "pvr")):
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        axes[0].scatter(targets[:, col], preds[:, col], s=12, alpha=0.7)
        lims = [targets[:, col].min(), targets[:, col].max()]
        axes[0].plot(lims, lims, "k--", linewidth=1)
        axes[0].set_xlabel(f"RHC {name}")
        axes[0].set_ylabel(f"predicted {name}")
        diffs = preds[:, col] - targets[:, col]
        means = (preds[:, col] + targets[:, col]) / 2
        md, sd = diffs.mean(), diffs.std(ddof=1)
        axes[1].scatter(means, diffs, s=12, alpha=0.7)
        for y, style in ((md, "-"), (md - 1.96 * sd, ":"), (md + 1.96 * sd, ":")):
            axes[1].axhline(y, color="k", linestyle=style, linewidth=1)
        axes[1].set_xlabel(f"mean of methods ({name})")
        axes[1].set_ylabel("difference")
        fig.tight_layout()
        path = out_dir / f"agreement_{name}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(5, 4))
    for name, target_key, threshold, restrict in ROC_TASKS:
        col = 0 if target_key == "mpap" else 1
        mask = np.ones(len(targets), dtype=bool)
        if restrict is not None:
            rcol = 0 if restrict[0] == "mpap" else 1
            mask = targets[:, rcol] >= restrict[1]
        labels = targets[mask, col] >= threshold
        if labels.all() or not labels.any():
            continue
        scores = preds[mask, col]
        order = np.argsort(-scores)
        tp = np.cumsum(labels[order]) / max(labels.sum(), 1)
        fp = np.cumsum(~labels[order]) / max((~labels).sum(), 1)
        ax.plot(np.concatenate([[0], fp]), np.concatenate([[0], tp]), label=name)
    ax.plot([0, 1], [0, 1], "k--", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "roc.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    written.append(path)
    return written
