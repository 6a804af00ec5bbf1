"""Treatment-efficacy evaluation over paired pre/post PVR measurements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from echoph.domain import EfficacyCategory, delta_pvr_category

CATEGORIES = (
    EfficacyCategory.STRONG_RESPONSE,
    EfficacyCategory.PARTIAL_RESPONSE,
    EfficacyCategory.NO_RESPONSE,
)


@dataclass
class EfficacyReport:
    transitions: list[list[int]]          # [actual][predicted] counts, 3x3
    per_category_accuracy: dict           # category -> accuracy or None (no actuals)
    mae_post_pvr: float
    n: int
    n_excluded: int = 0

    def to_dict(self) -> dict:
        return {
            "transitions": self.transitions,
            "per_category_accuracy": self.per_category_accuracy,
            "mae_post_pvr": self.mae_post_pvr,
            "n": self.n,
            "n_excluded": self.n_excluded,
            "category_order": [c.value for c in CATEGORIES],
        }


def efficacy_eval(pre_pvr, predicted_post, actual_post) -> EfficacyReport:
    """Categorize predicted and actual relative PVR change per case and build
    the 3x3 transition table (rows = actual, columns = predicted). Cases with
    a missing member of the pair are excluded and counted."""
    rows = list(zip(pre_pvr, predicted_post, actual_post))
    kept = [(p, pp, ap) for p, pp, ap in rows if None not in (p, pp, ap)]
    n_excluded = len(rows) - len(kept)
    if not kept:
        raise ValueError("no complete pre/post pairs")
    index = {c: i for i, c in enumerate(CATEGORIES)}
    transitions = [[0, 0, 0] for _ in CATEGORIES]
    abs_err = []
    for pre, pred_post, act_post in kept:
        predicted_cat = delta_pvr_category(pre, pred_post)
        actual_cat = delta_pvr_category(pre, act_post)
        transitions[index[actual_cat]][index[predicted_cat]] += 1
        abs_err.append(abs(pred_post - act_post))
    accuracy = {}
    for cat in CATEGORIES:
        i = index[cat]
        total = sum(transitions[i])
        accuracy[cat.value] = (transitions[i][i] / total) if total > 0 else None
    return EfficacyReport(
        transitions=transitions,
        per_category_accuracy=accuracy,
        mae_post_pvr=float(np.mean(abs_err)),
        n=len(kept),
        n_excluded=n_excluded,
    )
