import hashlib
import math
from pathlib import Path

import numpy as np
import pytest
import scipy.stats

from echoph import rngs
from echoph.domain import mpap_from_echo, pvr_from_echo
from echoph.synth import (
    CohortConfig,
    EchoNoise,
    LatentHemodynamics,
    MPAP_RANGE,
    PVR_RANGE,
    RenderConfig,
    case_ids_for_split,
    derive_echo_params,
    generate_case,
    generate_dataset,
    load_case,
    load_manifest,
    render_doppler,
    render_video,
    sample_latent,
    synthesize_metadata,
)

SMALL_RENDER = RenderConfig(frame_count=16, frame_size=(64, 64), doppler_size=(200, 150))


def latent_for(mpap, pvr=8.0, erap=6.0, hr=75.0, seed=1):
    spap = (mpap - 2.0) / 0.61
    trv = math.sqrt(max(spap - erap, 0.0) / 4.0)
    tvi = 5.19 * trv * trv / (pvr + 0.4)
    return LatentHemodynamics(
        mpap=mpap, pvr=pvr, spap=spap, erap=erap, tvi=tvi,
        heart_rate=hr, noise_seed=seed,
    )


def septum_statistic(video: np.ndarray) -> float:
    """Independent pixel statistic: intensity-weighted column of the bright
    septal band (max-projected over mid rows, averaged over frames)."""
    g = video[..., 0].astype(np.float64) / 255.0
    _, h, w = g.shape
    profile = g[:, int(0.30 * h):int(0.70 * h), :].max(axis=1).mean(axis=0)
    weights = np.clip(profile - 0.8, 0.0, None)
    if weights.sum() == 0:
        return float("nan")
    return float((np.arange(w) * weights).sum() / weights.sum())


def doppler_peak_height(img: np.ndarray) -> float:
    g = img[..., 0].astype(np.float64) / 255.0
    h = g.shape[0]
    bright = g > 0.45
    rows = np.where(bright.any(axis=1))[0]
    return 0.88 * h - rows.min()


class TestSampleLatent:
    def test_degenerate_bin_hits_boundary(self):
        latent = sample_latent(rngs.stream(1, 0), mpap_bins=((20.0, 20.0, 1.0),))
        assert latent.mpap == 20.0

    def test_range_contract(self):
        mpaps, pvrs = [], []
        for i in range(10_000):
            latent = sample_latent(rngs.stream(42, i))
            mpaps.append(latent.mpap)
            pvrs.append(latent.pvr)
        assert min(mpaps) >= MPAP_RANGE[0] and max(mpaps) <= MPAP_RANGE[1]
        assert min(pvrs) >= PVR_RANGE[0] and max(pvrs) <= PVR_RANGE[1]

    def test_determinism(self):
        a = sample_latent(rngs.stream(9, 3))
        b = sample_latent(rngs.stream(9, 3))
        assert a == b

    def test_spap_consistent_with_mpap(self):
        for i in range(100):
            latent = sample_latent(rngs.stream(5, i))
            assert latent.spap == pytest.approx((latent.mpap - 2.0) / 0.61, abs=1e-12)
            assert latent.spap >= latent.erap


class TestDeriveEchoParams:
    def test_noiseless_round_trip_cohort_value(self):
        latent = latent_for(38.85162256, erap=6.184)
        echo = derive_echo_params(latent, EchoNoise())
        assert mpap_from_echo(echo.trv_max, echo.erap) == pytest.approx(latent.mpap, abs=1e-9)
        pvr, _ = pvr_from_echo(echo.trv_max, echo.tvi_rvot)
        assert pvr == pytest.approx(latent.pvr, abs=1e-9)

    def test_noiseless_round_trip_many(self):
        for i in range(200):
            latent = sample_latent(rngs.stream(11, i))
            echo = derive_echo_params(latent, EchoNoise())
            assert mpap_from_echo(echo.trv_max, echo.erap) == pytest.approx(latent.mpap, abs=1e-9)
            pvr, _ = pvr_from_echo(echo.trv_max, echo.tvi_rvot)
            assert pvr == pytest.approx(latent.pvr, abs=1e-9)

    def test_noise_raises_baseline_mae(self):
        noiseless_err, noisy_err = [], []
        noise = EchoNoise(trv=0.2)
        for i in range(1000):
            latent = sample_latent(rngs.stream(13, i))
            clean = derive_echo_params(latent, EchoNoise())
            noisy = derive_echo_params(latent, noise, rngs.stream(13, i, "noise"))
            noiseless_err.append(abs(mpap_from_echo(clean.trv_max, clean.erap) - latent.mpap))
            noisy_err.append(abs(mpap_from_echo(noisy.trv_max, noisy.erap) - latent.mpap))
        assert np.mean(noisy_err) > np.mean(noiseless_err)

    def test_error_floor_matches_first_order_propagation(self):
        # closed-form E|err| from first-order propagation vs 10,000-draw
        # simulation, within 10%
        noise = EchoNoise(trv=0.3, erap=1.5)
        latents = [sample_latent(rngs.stream(17, i)) for i in range(50)]
        closed_form = []
        for latent in latents:
            sd = 0.61 * math.sqrt((8.0 * latent.trv * noise.trv) ** 2 + noise.erap**2)
            closed_form.append(sd * math.sqrt(2.0 / math.pi))
        sim_errors = []
        draws_per_latent = 200  # 50 latents x 200 = 10,000 draws
        for j, latent in enumerate(latents):
            for k in range(draws_per_latent):
                echo = derive_echo_params(latent, noise, rngs.stream(17, j, "mc", k))
                sim_errors.append(abs(mpap_from_echo(echo.trv_max, echo.erap) - latent.mpap))
        assert np.mean(sim_errors) == pytest.approx(np.mean(closed_form), rel=0.10)


class TestRenderVideo:
    def test_septal_statistic_ordered_in_mpap(self):
        lo = render_video(latent_for(20.0), "A4C", SMALL_RENDER, rngs.stream(3, 0, "v"))
        hi = render_video(latent_for(80.0), "A4C", SMALL_RENDER, rngs.stream(3, 0, "v"))
        assert septum_statistic(lo) < septum_statistic(hi)

    def test_byte_identical(self):
        a = render_video(latent_for(40.0), "PLAX", SMALL_RENDER, rngs.stream(4, 1, "v"))
        b = render_video(latent_for(40.0), "PLAX", SMALL_RENDER, rngs.stream(4, 1, "v"))
        assert np.array_equal(a, b)

    def test_shape_contract(self):
        out = render_video(latent_for(30.0), "PSAX", SMALL_RENDER, rngs.stream(4, 2, "v"))
        assert out.shape == (16, 64, 64, 3)
        assert out.dtype == np.uint8

    def test_identifiability_spearman(self):
        # monotone pixel statistic correlates with latent mPAP, rho > 0.9
        mpaps, stats = [], []
        for i in range(200):
            latent = sample_latent(rngs.stream(19, i))
            video = render_video(latent, "A4C", SMALL_RENDER, rngs.stream(19, i, "v"))
            mpaps.append(latent.mpap)
            stats.append(septum_statistic(video))
        rho = scipy.stats.spearmanr(mpaps, stats).statistic
        assert rho > 0.9


class TestRenderDoppler:
    def test_zero_trv_flat_baseline(self):
        img = render_doppler(latent_for(2.0 + 0.61 * 6.0, erap=6.0), "TR",
                             SMALL_RENDER, rngs.stream(5, 0, "d"))
        # spap == erap -> trv 0 -> nothing above the envelope threshold
        g = img[..., 0].astype(np.float64) / 255.0
        h = g.shape[0]
        upper = g[: int(0.8 * h) - 3]
        assert (upper < 0.45).mean() > 0.999

    def test_peak_doubles_with_trv(self):
        lat1 = latent_for(10.0, erap=6.0)
        lat1 = LatentHemodynamics(**{**lat1.to_dict(), "spap": 4 * 2.0**2 + 6.0})
        lat2 = LatentHemodynamics(**{**lat1.to_dict(), "spap": 4 * 4.0**2 + 6.0})
        img1 = render_doppler(lat1, "TR", SMALL_RENDER, rngs.stream(5, 1, "d"))
        img2 = render_doppler(lat2, "TR", SMALL_RENDER, rngs.stream(5, 1, "d"))
        h1, h2 = doppler_peak_height(img1), doppler_peak_height(img2)
        assert abs(h2 - 2 * h1) <= 3.0  # rasterization + edge-glow tolerance

    def test_default_shape_contract(self):
        cfg = RenderConfig(frame_count=16, frame_size=(64, 64))
        img = render_doppler(latent_for(40.0), "RVOT", cfg, rngs.stream(5, 2, "d"))
        assert img.shape == (600, 800, 3)

    def test_rvot_area_linear_in_tvi(self):
        # isolate the envelope by differencing against a zero-tvi render from
        # the same stream (noise and grid cancel), then regress area on tvi
        base = latent_for(40.0)
        zero = LatentHemodynamics(**{**base.to_dict(), "tvi": 0.0})
        ref = render_doppler(zero, "RVOT", SMALL_RENDER, rngs.stream(5, 3, "d")).astype(np.int16)
        tvis = [5.0, 10.0, 15.0, 20.0]
        areas = []
        for tvi in tvis:
            lat = LatentHemodynamics(**{**base.to_dict(), "tvi": tvi})
            img = render_doppler(lat, "RVOT", SMALL_RENDER, rngs.stream(5, 3, "d")).astype(np.int16)
            areas.append(int((np.abs(img - ref)[..., 0] > 40).sum()))
        slope, _, r, _, _ = scipy.stats.linregress(tvis, areas)
        assert slope > 0
        assert r**2 > 0.99


class TestSynthesizeMetadata:
    def test_age_range(self):
        for i in range(300):
            latent = sample_latent(rngs.stream(21, i))
            meta = synthesize_metadata(latent, rngs.stream(21, i, "m"))
            assert 14 <= meta.age <= 77

    def test_deterministic(self):
        latent = sample_latent(rngs.stream(22, 0))
        a = synthesize_metadata(latent, rngs.stream(22, 0, "m"))
        b = synthesize_metadata(latent, rngs.stream(22, 0, "m"))
        assert a == b

    def test_both_sexes_present(self):
        sexes = set()
        for i in range(1000):
            latent = sample_latent(rngs.stream(23, i))
            sexes.add(synthesize_metadata(latent, rngs.stream(23, i, "m")).sex)
        assert len(sexes) == 2


def _tree_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


class TestGenerateDataset:
    def _config(self, n=12, seed=17, noise=None):
        return CohortConfig(
            n_cases=n,
            split_fractions=(0.5, 0.25, 0.25),
            echo_noise=noise or EchoNoise(),
            render=SMALL_RENDER,
            master_seed=seed,
        )

    def test_rerun_byte_identical(self, tmp_path):
        generate_dataset(self._config(), tmp_path / "a")
        generate_dataset(self._config(), tmp_path / "b")
        assert _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "b")

    def test_parallel_byte_identical(self, tmp_path):
        generate_dataset(self._config(), tmp_path / "serial", workers=1)
        generate_dataset(self._config(), tmp_path / "parallel", workers=4)
        assert _tree_digest(tmp_path / "serial") == _tree_digest(tmp_path / "parallel")

    def test_split_counts_exact(self, tmp_path):
        config = CohortConfig(n_cases=8, split_fractions=(0.75, 0.125, 0.125),
                              render=SMALL_RENDER, master_seed=3)
        generate_dataset(config, tmp_path / "d")
        manifest = load_manifest(tmp_path / "d")
        assert len(case_ids_for_split(manifest, "train")) == 6
        assert len(case_ids_for_split(manifest, "val")) == 1
        assert len(case_ids_for_split(manifest, "test")) == 1

    def test_noiseless_round_trip_through_disk(self, tmp_path):
        generate_dataset(self._config(n=10), tmp_path / "d")
        manifest = load_manifest(tmp_path / "d")
        for entry in manifest["cases"]:
            case = load_case(tmp_path / "d" / entry["path"], load_media=False)
            latent = entry["latent"]
            assert mpap_from_echo(case.echo_params.trv_max, case.echo_params.erap) == pytest.approx(
                latent["mpap"], abs=1e-9
            )
            pvr, _ = pvr_from_echo(case.echo_params.trv_max, case.echo_params.tvi_rvot)
            assert pvr == pytest.approx(latent["pvr"], abs=1e-9)

    def test_media_round_trip_through_disk(self, tmp_path):
        config = self._config(n=2)
        generate_dataset(config, tmp_path / "d")
        record, _ = generate_case(config, 0)
        loaded = load_case(tmp_path / "d" / "cases" / "case-00000")
        for view, arr in record.videos.items():
            assert np.array_equal(arr, loaded.videos[view])
        for view, arr in record.dopplers.items():
            assert np.array_equal(arr, loaded.dopplers[view])
