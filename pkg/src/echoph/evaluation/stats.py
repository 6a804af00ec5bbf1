"""ROC AUC with DeLong confidence intervals, the paired-AUC DeLong test, and
the paired t-test.

AUC uses the midrank (Mann-Whitney) formulation with half credit for ties;
its numerator is exact half-integer arithmetic, so it agrees bit-for-bit with
explicit pair counting. Variances follow DeLong's structural components over
midranks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from echoph.evaluation.metrics import AucResult


class DegenerateLabelsError(ValueError):
    pass


def _midranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    z = x[order]
    n = len(x)
    ranks = np.zeros(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + j - 1) + 1.0
        i = j
    out = np.empty(n, dtype=np.float64)
    out[order] = ranks
    return out


def _delong_components(scores: np.ndarray, labels: np.ndarray):
    """Returns (auc, v01, v10): structural components for positives/negatives."""
    pos = scores[labels]
    neg = scores[~labels]
    m, n = len(pos), len(neg)
    if m == 0 or n == 0:
        raise DegenerateLabelsError("both classes must be present")
    tx = _midranks(pos)
    ty = _midranks(neg)
    tz = _midranks(np.concatenate([pos, neg]))
    auc = (tz[:m].sum() - m * (m + 1) / 2.0) / (m * n)
    v01 = (tz[:m] - tx) / n          # per-positive components
    v10 = 1.0 - (tz[m:] - ty) / m    # per-negative components
    return auc, v01, v10


def auc_roc(scores, labels, alpha: float = 0.05) -> AucResult:
    """AUC with a DeLong-variance normal CI, truncated to [0, 1]."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must be equal length")
    auc, v01, v10 = _delong_components(scores, labels)
    m, n = len(v01), len(v10)
    var = (v01.var(ddof=1) / m if m > 1 else 0.0) + (v10.var(ddof=1) / n if n > 1 else 0.0)
    z = scipy.stats.norm.ppf(1.0 - alpha / 2.0)
    half = z * np.sqrt(max(var, 0.0))
    return AucResult(
        auc=float(auc),
        ci_low=float(max(0.0, auc - half)),
        ci_high=float(min(1.0, auc + half)),
        n_pos=m,
        n_neg=n,
    )


@dataclass
class DelongTestResult:
    p_value: float
    auc_a: float
    auc_b: float
    z: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value, "auc_a": self.auc_a, "auc_b": self.auc_b,
            "z": self.z, "degenerate": self.degenerate,
        }


def delong_test(scores_a, scores_b, labels) -> DelongTestResult:
    """Two-sided test of AUC_a == AUC_b for paired scores on the same cases,
    using the DeLong covariance of the correlated AUCs."""
    scores_a = np.asarray(scores_a, dtype=np.float64)
    scores_b = np.asarray(scores_b, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if not (scores_a.shape == scores_b.shape == labels.shape):
        raise ValueError("paired scores and labels must be equal length")
    auc_a, v01_a, v10_a = _delong_components(scores_a, labels)
    auc_b, v01_b, v10_b = _delong_components(scores_b, labels)
    m, n = len(v01_a), len(v10_a)
    s01 = np.cov(np.stack([v01_a, v01_b]), ddof=1) if m > 1 else np.zeros((2, 2))
    s10 = np.cov(np.stack([v10_a, v10_b]), ddof=1) if n > 1 else np.zeros((2, 2))
    cov = s01 / m + s10 / n
    var_diff = cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]
    if var_diff <= 1e-16:
        # identical or perfectly coupled scorers: no evidence of a difference
        return DelongTestResult(p_value=1.0, auc_a=float(auc_a), auc_b=float(auc_b),
                                z=0.0, degenerate=True)
    z = (auc_a - auc_b) / np.sqrt(var_diff)
    p = 2.0 * scipy.stats.norm.sf(abs(z))
    return DelongTestResult(p_value=float(p), auc_a=float(auc_a), auc_b=float(auc_b),
                            z=float(z))


@dataclass
class PairedTestResult:
    p_value: float
    t: float
    n: int
    mean_diff: float
    zero_variance: bool = False

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value, "t": self.t, "n": self.n,
            "mean_diff": self.mean_diff, "zero_variance": self.zero_variance,
        }


def paired_ttest(errors_a, errors_b) -> PairedTestResult:
    """Two-sided paired t-test on per-case error differences a - b.
    Zero-variance differences are flagged and reported as p = 1.0."""
    a = np.asarray(errors_a, dtype=np.float64)
    b = np.asarray(errors_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise ValueError("need >= 2 paired values")
    d = a - b
    sd = d.std(ddof=1)
    n = len(d)
    if sd == 0.0:
        return PairedTestResult(p_value=1.0, t=0.0, n=n, mean_diff=float(d.mean()),
                                zero_variance=True)
    t = d.mean() / (sd / np.sqrt(n))
    p = 2.0 * scipy.stats.t.sf(abs(t), df=n - 1)
    return PairedTestResult(p_value=float(p), t=float(t), n=n, mean_diff=float(d.mean()))
