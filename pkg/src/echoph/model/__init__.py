from echoph.model.attention import CrossViewAttention, NoActiveViewsError, flatten_grid
from echoph.model.config import ModelConfig, full_scale_config
from echoph.model.encoders import DopplerEncoder, VideoEncoder, encode_views
from echoph.model.network import (
    Mlp,
    ModelOutput,
    MultiViewNet,
    build_model,
    normalize_embedding,
)
from echoph.model.textenc import FrozenTextEncoder

__all__ = [
    "CrossViewAttention",
    "DopplerEncoder",
    "FrozenTextEncoder",
    "Mlp",
    "ModelConfig",
    "ModelOutput",
    "MultiViewNet",
    "NoActiveViewsError",
    "VideoEncoder",
    "build_model",
    "encode_views",
    "flatten_grid",
    "normalize_embedding",
    "full_scale_config",
]
