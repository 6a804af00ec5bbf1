from echoph.pipeline.bpe import BpeTokenizer, train_merges
from echoph.pipeline.doppler import DEFAULT_DOPPLER_SIZE, scale_doppler
from echoph.pipeline.masking import mask_views
from echoph.pipeline.text import serialize_metadata
from echoph.pipeline.video import AugmentConfig, crop_and_augment_video, sample_frames

__all__ = [
    "AugmentConfig",
    "BpeTokenizer",
    "DEFAULT_DOPPLER_SIZE",
    "crop_and_augment_video",
    "mask_views",
    "sample_frames",
    "scale_doppler",
    "serialize_metadata",
    "train_merges",
]
