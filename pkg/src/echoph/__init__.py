"""Synthetic multi-view, multi-modal echocardiography toolkit for
pulmonary-hypertension assessment: cohort generation, model, training,
evaluation statistics, saliency, and an assessment service."""

__version__ = "0.1.0"
