from echoph.training.checkpoint import (
    FORMAT_VERSION,
    checkpoint_digest,
    load_checkpoint,
    save_checkpoint,
)
from echoph.training.data import DiskCohort, PipelineConfig, batch_tensors, case_tensors
from echoph.training.loop import TrainConfig, TrainingDiverged, select_best, train
from echoph.training.losses import alignment_loss, prediction_loss, total_loss, weighted_mse
from echoph.training.schedule import lr_schedule

__all__ = [
    "DiskCohort",
    "FORMAT_VERSION",
    "PipelineConfig",
    "TrainConfig",
    "TrainingDiverged",
    "alignment_loss",
    "batch_tensors",
    "case_tensors",
    "checkpoint_digest",
    "load_checkpoint",
    "lr_schedule",
    "prediction_loss",
    "save_checkpoint",
    "select_best",
    "total_loss",
    "train",
    "weighted_mse",
]
