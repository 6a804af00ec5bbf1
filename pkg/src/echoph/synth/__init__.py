from echoph.synth.cohort import (
    CohortConfig,
    case_ids_for_split,
    generate_case,
    generate_dataset,
    load_case,
    load_manifest,
    save_case,
    split_of_index,
)
from echoph.synth.latent import (
    DEFAULT_MPAP_BINS,
    EchoNoise,
    GenerationRetry,
    LatentHemodynamics,
    MPAP_RANGE,
    PVR_RANGE,
    PvrLink,
    derive_echo_params,
    sample_latent,
    synthesize_metadata,
)
from echoph.synth.render import (
    RenderConfig,
    render_doppler,
    render_video,
    septal_displacement,
    texture_frequency,
)

__all__ = [
    "CohortConfig",
    "DEFAULT_MPAP_BINS",
    "EchoNoise",
    "GenerationRetry",
    "LatentHemodynamics",
    "MPAP_RANGE",
    "PVR_RANGE",
    "PvrLink",
    "RenderConfig",
    "case_ids_for_split",
    "derive_echo_params",
    "generate_case",
    "generate_dataset",
    "load_case",
    "load_manifest",
    "render_doppler",
    "render_video",
    "sample_latent",
    "save_case",
    "septal_displacement",
    "split_of_index",
    "synthesize_metadata",
    "texture_frequency",
]
