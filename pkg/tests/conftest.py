import pytest

from echoph.pipeline import AugmentConfig
from echoph.synth import CohortConfig, EchoNoise, RenderConfig, generate_dataset
from echoph.training import PipelineConfig


def tiny_model_config(**kw):
    from echoph.model import ModelConfig

    base = dict(
        channels=8, embed_dim=8, text_embed_dim=4, head_hidden=8,
        video_stem_channels=4, video_stage_channels=(4, 8),
        video_stage_strides=((2, 2, 2), (2, 2, 2)),
        doppler_stem_channels=4, doppler_stage_channels=(4, 8),
        doppler_stem_stride=4, doppler_stage_strides=((2, 2), (2, 2)),
    )
    base.update(kw)
    return ModelConfig(**base)


def tiny_pipeline_config(**kw):
    base = dict(
        frame_budget=8,
        augment=AugmentConfig(crop_size=48, rotation_degrees=5.0),
        doppler_target=(200, 150),
        mask_prob=0.15,
    )
    base.update(kw)
    return PipelineConfig(**base)


def write_untrained_checkpoint(path, model_config=None, pipeline_config=None, init_seed=0):
    import torch

    from echoph.model import build_model
    from echoph.training import TrainConfig, save_checkpoint

    cfg = model_config or tiny_model_config()
    model = build_model(cfg, init_seed=init_seed)
    optimizer = torch.optim.Adam(model.trainable_parameters())
    save_checkpoint(path, {
        "kind": "mvml",
        "model_config": cfg.to_dict(),
        "train_config": TrainConfig().to_dict(),
        "pipeline_config": (pipeline_config or tiny_pipeline_config()).to_dict(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict(),
        "epoch": 0,
        "step": 0,
        "val_log": [],
    })
    return path


@pytest.fixture(scope="session")
def smoke_dataset(tmp_path_factory):
    """32-case noiseless cohort shared across test modules."""
    root = tmp_path_factory.mktemp("smoke_data")
    config = CohortConfig(
        n_cases=32,
        split_fractions=(0.75, 0.125, 0.125),
        echo_noise=EchoNoise(),
        render=RenderConfig(frame_count=16, frame_size=(64, 64), doppler_size=(200, 150)),
        master_seed=1234,
    )
    generate_dataset(config, root, workers=2)
    return root
