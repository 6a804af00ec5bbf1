import numpy as np
import pytest
import torch

from echoph import rngs
from echoph.baselines import (
    FEATURE_ORDER,
    MlpConfig,
    TabularMlp,
    features_from_record,
    fit_mlp,
    load_mlp,
    predict_mlp,
    train_mlp_baseline,
)
from echoph.synth import EchoNoise, derive_echo_params, sample_latent, synthesize_metadata


def tabular_cohort(n, seed, noise=None):
    feats, targets = [], []
    noise = noise or EchoNoise()
    for i in range(n):
        latent = sample_latent(rngs.stream(seed, i, "latent"))
        echo = derive_echo_params(latent, noise, rngs.stream(seed, i, "echo"))
        meta = synthesize_metadata(latent, rngs.stream(seed, i, "meta"))
        feats.append([
            echo.rvw, echo.tapse, echo.s_prime, echo.fac,
            echo.erap, echo.tvi_rvot, echo.trv_max,
            0.0 if meta.sex.value == "female" else 1.0, float(meta.age),
        ])
        targets.append((latent.mpap, latent.pvr))
    return np.array(feats), np.array(targets)


@pytest.fixture(scope="module")
def noiseless_fit():
    x, y = tabular_cohort(600, seed=91)
    xv, yv = tabular_cohort(100, seed=92)
    payload = fit_mlp(x, y, xv, yv, MlpConfig(epochs=300, seed=1))
    return payload, xv, yv


class TestFitMlp:
    def test_noiseless_val_mae_below_one(self, noiseless_fit):
        # features determine the targets exactly through the clinical formulas
        payload, _, _ = noiseless_fit
        assert payload["best"]["mae_mpap"] < 1.0

    def test_architecture_output_dim(self):
        model = TabularMlp(hidden=256)
        out = model(torch.zeros(3, len(FEATURE_ORDER)))
        assert out.shape == (3, 2)
        hidden_layers = [m for m in model.net if isinstance(m, torch.nn.Linear)]
        assert [m.out_features for m in hidden_layers] == [256, 256, 2]

    def test_deterministic(self):
        x, y = tabular_cohort(50, seed=93)
        xv, yv = tabular_cohort(20, seed=94)
        cfg = MlpConfig(epochs=5, seed=3)
        a = fit_mlp(x, y, xv, yv, cfg)
        b = fit_mlp(x, y, xv, yv, cfg)
        assert all(torch.equal(a["model_state"][k], b["model_state"][k])
                   for k in a["model_state"])


class TestPredictMlp:
    def test_hand_network_forward(self):
        # 2-layer network with hand weights: y = W3 relu(W2 relu(W1 x + b1) + b2) + b3
        model = TabularMlp(hidden=2)
        with torch.no_grad():
            layers = [m for m in model.net if isinstance(m, torch.nn.Linear)]
            for layer in layers:
                layer.weight.zero_()
                layer.bias.zero_()
            layers[0].weight[0, 0] = 1.0   # h1 = x0
            layers[0].weight[1, 1] = -1.0  # h2 = relu(-x1)
            layers[1].weight[0, 0] = 2.0   # g1 = 2 h1
            layers[1].bias[1] = 1.0        # g2 = 1
            layers[2].weight[0, 0] = 1.0   # out0 = g1
            layers[2].weight[1, 1] = 3.0   # out1 = 3 g2
        x = torch.zeros(1, len(FEATURE_ORDER))
        x[0, 0], x[0, 1] = 1.5, 2.0
        out = model(x)[0]
        # h = (1.5, 0); g = (3.0, 1.0); out = (3.0, 3.0)
        assert torch.allclose(out, torch.tensor([3.0, 3.0]), atol=1e-6)

    def test_training_mean_features_finite(self, noiseless_fit, tmp_path):
        payload, _, _ = noiseless_fit
        from echoph.training import save_checkpoint

        path = tmp_path / "mlp.pt"
        save_checkpoint(path, payload)
        model, loaded = load_mlp(path)
        mean_features = np.array(loaded["standardization"]["mean"])
        preds, flags = predict_mlp(model, loaded, mean_features)
        assert np.isfinite(preds).all()
        assert not flags[0]

    def test_batch_matches_single(self, noiseless_fit, tmp_path):
        payload, xv, _ = noiseless_fit
        from echoph.training import save_checkpoint

        path = tmp_path / "mlp.pt"
        save_checkpoint(path, payload)
        model, loaded = load_mlp(path)
        batch_preds, _ = predict_mlp(model, loaded, xv[:8])
        for i in range(8):
            single, _ = predict_mlp(model, loaded, xv[i])
            assert np.allclose(single[0], batch_preds[i], atol=1e-6)

    def test_extrapolation_flagged(self, noiseless_fit, tmp_path):
        payload, xv, _ = noiseless_fit
        from echoph.training import save_checkpoint

        path = tmp_path / "mlp.pt"
        save_checkpoint(path, payload)
        model, loaded = load_mlp(path)
        out_of_range = xv[0].copy()
        out_of_range[6] = 99.0  # trv far beyond the training range
        _, flags = predict_mlp(model, loaded, out_of_range)
        assert flags[0]


class TestTrainFromDisk:
    def test_end_to_end_on_smoke_dataset(self, smoke_dataset, tmp_path):
        path = train_mlp_baseline(smoke_dataset, MlpConfig(epochs=10, seed=5),
                                  tmp_path / "mlp.pt")
        model, payload = load_mlp(path)
        assert payload["feature_order"] == list(FEATURE_ORDER)
        assert payload["excluded_cases"] == {"train": 0, "val": 0}
        from echoph.training import DiskCohort

        cohort = DiskCohort(smoke_dataset)
        record = cohort.load(cohort.ids("test")[0])
        preds, _ = predict_mlp(model, payload, np.array(features_from_record(record)))
        assert preds.shape == (1, 2)

    def test_noise_floor_tracks_formula_baseline(self):
        # with echo noise the tabular model cannot beat the information limit:
        # its MAE floor stays within 20% of the formula baseline's
        from echoph.domain import mpap_from_echo

        noise = EchoNoise(trv=0.3)
        x, y = tabular_cohort(600, seed=95, noise=noise)
        xv, yv = tabular_cohort(200, seed=96, noise=noise)
        payload = fit_mlp(x, y, xv, yv, MlpConfig(epochs=300, seed=7))
        formula_mae = np.mean([
            abs(mpap_from_echo(row[6], row[4]) - t[0]) for row, t in zip(xv, yv)
        ])
        assert payload["best"]["mae_mpap"] < 1.2 * formula_mae
