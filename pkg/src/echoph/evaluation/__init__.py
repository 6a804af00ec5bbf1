from echoph.evaluation.efficacy import CATEGORIES, EfficacyReport, efficacy_eval
from echoph.evaluation.infer import load_model_bundle, predict_records
from echoph.evaluation.metrics import (
    AucResult,
    BlandAltmanStats,
    RegressionMetrics,
    bland_altman,
    regression_metrics,
)
from echoph.evaluation.report import (
    build_report,
    canonical_json,
    evaluate_split,
    formula_baseline,
    subgroup_report,
    write_plots,
    write_report,
)
from echoph.evaluation.stats import (
    DegenerateLabelsError,
    DelongTestResult,
    PairedTestResult,
    auc_roc,
    delong_test,
    paired_ttest,
)

__all__ = [
    "AucResult",
    "BlandAltmanStats",
    "CATEGORIES",
    "DegenerateLabelsError",
    "DelongTestResult",
    "EfficacyReport",
    "PairedTestResult",
    "RegressionMetrics",
    "auc_roc",
    "bland_altman",
    "build_report",
    "canonical_json",
    "delong_test",
    "efficacy_eval",
    "evaluate_split",
    "formula_baseline",
    "load_model_bundle",
    "paired_ttest",
    "predict_records",
    "regression_metrics",
    "subgroup_report",
    "write_plots",
    "write_report",
]
