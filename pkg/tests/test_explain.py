import numpy as np
import pytest
import torch

from conftest import tiny_model_config, tiny_pipeline_config

from echoph.explain import (
    SaliencyMap,
    eigencam_for_case,
    eigencam_from_activation,
    overlay,
    write_saliency,
)
from echoph.model import build_model
from echoph.synth import generate_case, CohortConfig, RenderConfig


def svd_oracle(matrix: np.ndarray) -> np.ndarray:
    """Independent projection oracle via the eigendecomposition of M^T M."""
    gram = matrix.T @ matrix
    eigvals, eigvecs = np.linalg.eigh(gram)
    v1 = eigvecs[:, -1]
    proj = np.sqrt(max(eigvals[-1], 0.0)) * v1
    if proj.max() < -proj.min():
        proj = -proj
    proj = np.clip(proj, 0.0, None)
    return proj / proj.max()


class TestEigencamCore:
    def test_rank_one_analytic(self):
        rng = np.random.default_rng(0)
        u = rng.uniform(0.5, 2.0, size=6)
        v = rng.uniform(0.0, 1.0, size=12)
        activation = np.outer(u, v).reshape(6, 3, 4)
        values, peak, degenerate = eigencam_from_activation(activation)
        assert not degenerate
        expected = (v / v.max()).reshape(3, 4)
        assert np.allclose(values, expected, atol=1e-10)

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            activation = rng.normal(size=(8, 4, 5))
            values, _, degenerate = eigencam_from_activation(activation)
            assert not degenerate
            expected = svd_oracle(activation.reshape(8, -1)).reshape(4, 5)
            assert np.allclose(values, expected, atol=1e-6)

    def test_range_contract(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            values, _, _ = eigencam_from_activation(rng.normal(size=(4, 6, 6)))
            assert values.min() >= 0.0 and values.max() <= 1.0 + 1e-12

    def test_power_of_two_scaling_exact(self):
        rng = np.random.default_rng(3)
        activation = rng.normal(size=(5, 7, 3))
        base, _, _ = eigencam_from_activation(activation)
        for alpha in (2.0, 0.5, 64.0):
            scaled, _, _ = eigencam_from_activation(alpha * activation)
            assert np.array_equal(base, scaled)

    def test_general_scaling_close(self):
        rng = np.random.default_rng(4)
        activation = rng.normal(size=(5, 7, 3))
        base, _, _ = eigencam_from_activation(activation)
        scaled, _, _ = eigencam_from_activation(3.7 * activation)
        assert np.allclose(base, scaled, atol=1e-10)

    def test_sign_flip_of_input_rows_canonicalized(self):
        # the projection must not depend on the sign returned by the SVD
        rng = np.random.default_rng(5)
        u = rng.uniform(0.5, 1.5, 4)
        v = rng.uniform(0.1, 1.0, 6)
        a, _, _ = eigencam_from_activation(np.outer(u, v))
        b, _, _ = eigencam_from_activation(np.outer(-u, v) * -1.0)
        assert np.allclose(a, b, atol=1e-12)

    def test_zero_activation_degenerate(self):
        values, peak, degenerate = eigencam_from_activation(np.zeros((3, 4, 4)))
        assert degenerate and peak == 0.0
        assert np.array_equal(values, np.zeros((4, 4)))


@pytest.fixture(scope="module")
def case_and_model():
    config = CohortConfig(
        n_cases=1, split_fractions=(1.0, 0.0, 0.0),
        render=RenderConfig(frame_count=16, frame_size=(64, 64), doppler_size=(200, 150)),
        master_seed=77,
    )
    record, _ = generate_case(config, 0)
    model = build_model(tiny_model_config(), init_seed=1).eval()
    return record, model


class TestEigencamForCase:
    def test_video_map_shape_and_range(self, case_and_model):
        record, model = case_and_model
        pcfg = tiny_pipeline_config()
        saliency = eigencam_for_case(model, record, "A4C", pcfg)
        assert saliency.values.shape == (8, 48, 48)
        assert saliency.values.min() >= 0.0 and saliency.values.max() <= 1.0
        assert not saliency.degenerate

    def test_doppler_map_shape(self, case_and_model):
        record, model = case_and_model
        saliency = eigencam_for_case(model, record, "TR", tiny_pipeline_config())
        assert saliency.values.shape == (150, 200)

    def test_deterministic(self, case_and_model):
        record, model = case_and_model
        pcfg = tiny_pipeline_config()
        a = eigencam_for_case(model, record, "PLAX", pcfg)
        b = eigencam_for_case(model, record, "PLAX", pcfg)
        assert np.array_equal(a.values, b.values)

    def test_unknown_layer_rejected(self, case_and_model):
        record, model = case_and_model
        with pytest.raises(ValueError):
            eigencam_for_case(model, record, "A4C", tiny_pipeline_config(), layer="nope")


class TestOverlay:
    def test_zero_heatmap_identity(self):
        frames = np.random.default_rng(0).integers(0, 255, (4, 8, 8, 3)).astype(np.uint8)
        heat = np.zeros((4, 8, 8))
        assert np.array_equal(overlay(heat, frames), frames)

    def test_single_hot_pixel(self):
        frames = np.full((8, 8, 3), 100, dtype=np.uint8)
        heat = np.zeros((8, 8))
        heat[3, 5] = 1.0
        out = overlay(heat, frames)
        changed = np.argwhere((out != frames).any(axis=2))
        assert changed.tolist() == [[3, 5]]

    def test_byte_stable(self):
        rng = np.random.default_rng(1)
        frames = rng.integers(0, 255, (2, 8, 8, 3)).astype(np.uint8)
        heat = rng.random((2, 8, 8))
        assert np.array_equal(overlay(heat, frames), overlay(heat, frames))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            overlay(np.zeros((4, 4)), np.zeros((8, 8, 3), dtype=np.uint8))


class TestWriteSaliency:
    def test_export_layout(self, tmp_path, case_and_model):
        record, model = case_and_model
        saliency = eigencam_for_case(model, record, "A4C", tiny_pipeline_config())
        frames = (np.random.default_rng(0).random((8, 48, 48, 3)) * 255).astype(np.uint8)
        sidecar = write_saliency(saliency, frames, tmp_path)
        assert sidecar.exists()
        assert len(list(tmp_path.glob("frame_*.png"))) == 8
