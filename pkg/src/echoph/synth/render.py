"""Beating two-chamber phantom renderer.

Videos are a grayscale-on-RGB cartoon of a short-axis heart: an elliptical
myocardial ring, two chamber pools, and a bright interventricular septum whose
bowing displacement is a strictly monotone function of mPAP. Myocardial band
texture has spatial frequency strictly monotone in PVR. Doppler views draw a
spectral envelope over a baseline: the TR peak height is linear in TRV, the
RVOT envelope area linear in TVI, the PR peak linear in eRAP, and the PV view
encodes heart rate in its beat spacing. Everything is a pure function of
(latent, view, config, rng stream state).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from echoph.domain import DopplerView, VideoView
from echoph.synth.latent import LatentHemodynamics, MPAP_RANGE


@dataclass
class RenderConfig:
    frame_count: int = 24
    frame_size: tuple[int, int] = (96, 96)      # (H, W)
    doppler_size: tuple[int, int] = (800, 600)  # (W, H), preprocessing contract
    channels: int = 3
    fps: float = 30.0

    def validate(self) -> "RenderConfig":
        if self.frame_count < 16:
            raise ValueError(f"frame_count must be >= 16, got {self.frame_count}")
        if self.channels != 3:
            raise ValueError("only 3-channel output is supported")
        return self


# Per-view phantom geometry (normalized [0,1] coordinates).
_VIDEO_GEOM = {
    VideoView.PLAX: dict(lv=(0.62, 0.52), lr=(0.26, 0.20), rv=(0.30, 0.42), rr=(0.16, 0.13), sept_x=0.44, phi=0.0),
    VideoView.PSAX: dict(lv=(0.60, 0.50), lr=(0.23, 0.23), rv=(0.28, 0.50), rr=(0.14, 0.17), sept_x=0.42, phi=1.1),
    VideoView.A4C: dict(lv=(0.63, 0.55), lr=(0.22, 0.27), rv=(0.32, 0.50), rr=(0.15, 0.20), sept_x=0.47, phi=2.3),
    VideoView.PALA: dict(lv=(0.58, 0.48), lr=(0.25, 0.18), rv=(0.27, 0.44), rr=(0.17, 0.12), sept_x=0.40, phi=3.7),
}

# Monotone pixel encodings of the latent state.
_SEPTUM_BASE = 0.02
_SEPTUM_SPAN = 0.19          # septal bowing: fraction of width over the mPAP range
_TEXTURE_BASE = 3.0
_TEXTURE_PER_PVR = 0.22      # myocardial band frequency per WU

_TRV_FULL_SCALE = 10.0       # m/s that maps to 80% of Doppler height
_TVI_FULL_SCALE = 40.0       # cm that maps to 60% of Doppler height
_ERAP_FULL_SCALE = 20.0      # mmHg that maps to 60% of Doppler height


def septal_displacement(mpap: float) -> float:
    """Normalized septal bowing used by the video renderer (monotone in mPAP)."""
    lo, hi = MPAP_RANGE
    frac = (mpap - lo) / (hi - lo)
    return _SEPTUM_BASE + _SEPTUM_SPAN * float(np.clip(frac, 0.0, 1.05))


def texture_frequency(pvr: float) -> float:
    """Myocardial band spatial frequency (monotone in PVR)."""
    return _TEXTURE_BASE + _TEXTURE_PER_PVR * pvr


def render_video(
    latent: LatentHemodynamics,
    view: VideoView | str,
    render: RenderConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Render one view as uint8 frames of shape (T, H, W, 3)."""
    render.validate()
    view = VideoView(view)
    geom = _VIDEO_GEOM[view]
    h, w = render.frame_size
    t_frames = render.frame_count

    # Per-case anatomical jitter (drawn before any per-frame noise so the
    # stream layout is stable).
    jit = rng.normal(0.0, 0.008, size=6)
    gain = 1.0 + float(rng.normal(0.0, 0.03))

    lv_cx, lv_cy = geom["lv"][0] + jit[0], geom["lv"][1] + jit[1]
    rv_cx, rv_cy = geom["rv"][0] + jit[2], geom["rv"][1] + jit[3]
    sept_x0 = geom["sept_x"] + jit[4]
    lr_a, lr_b = geom["lr"]
    rr_a, rr_b = geom["rr"]

    yy, xx = np.mgrid[0:h, 0:w]
    ynorm = (yy + 0.5) / h
    xnorm = (xx + 0.5) / w

    disp = septal_displacement(latent.mpap)
    freq = texture_frequency(latent.pvr)
    # near-flat bowing plateau through the mid-cavity keeps the septal shift
    # coherent across rows
    bow = np.sin(np.pi * np.clip((ynorm - 0.18) / 0.64, 0.0, 1.0)) ** 0.3

    frames = np.empty((t_frames, h, w), dtype=np.float32)
    beat_hz = latent.heart_rate / 60.0
    for i in range(t_frames):
        beat = np.sin(2.0 * np.pi * beat_hz * i / render.fps)
        pulse = 1.0 + 0.06 * beat

        img = np.full((h, w), 0.06, dtype=np.float32)

        # Myocardial ring around the LV with PVR-keyed band texture.
        dlv = np.sqrt(((xnorm - lv_cx) / (lr_a * pulse)) ** 2 + ((ynorm - lv_cy) / (lr_b * pulse)) ** 2)
        ring = np.exp(-((dlv - 1.0) ** 2) / (2 * 0.18**2))
        rnorm = np.sqrt((xnorm - lv_cx) ** 2 + (ynorm - lv_cy) ** 2)
        texture = 1.0 + 0.30 * np.sin(2.0 * np.pi * freq * rnorm + geom["phi"])
        img += 0.42 * ring * texture

        # Chamber pools (dark).
        img -= 0.30 * (dlv < 0.72)
        drv = np.sqrt(((xnorm - rv_cx) / (rr_a * pulse)) ** 2 + ((ynorm - rv_cy) / (rr_b * pulse)) ** 2)
        img += 0.22 * np.exp(-((drv - 1.0) ** 2) / (2 * 0.22**2))
        img -= 0.14 * (drv < 0.75)

        # Bright septal curve; its rightward bowing encodes mPAP.
        sept_x = sept_x0 + (disp + 0.004 * beat) * bow
        img += 0.9 * np.exp(-((xnorm - sept_x) ** 2) / (2 * 0.015**2)) * (
            (ynorm > 0.16) & (ynorm < 0.84)
        )

        img = img * gain + rng.normal(0.0, 0.02, size=(h, w)).astype(np.float32)
        frames[i] = np.clip(img, 0.0, 1.0)

    out = (frames * 255.0).round().astype(np.uint8)
    return np.repeat(out[..., None], 3, axis=3)


def render_doppler(
    latent: LatentHemodynamics,
    view: DopplerView | str,
    render: RenderConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Render one spectral view as uint8 (H, W, 3)."""
    render.validate()
    view = DopplerView(view)
    w, h = render.doppler_size

    n_beats = 3.0
    if view is DopplerView.PV:
        n_beats = 3.0 * latent.heart_rate / 75.0

    x = (np.arange(w) + 0.5) / w
    u = np.mod(x * n_beats, 1.0)
    s = np.sin(np.pi * u) ** 2

    if view is DopplerView.TR:
        peak = latent.trv * 0.8 * h / _TRV_FULL_SCALE
        envelope = peak * s**0.7
    elif view is DopplerView.RVOT:
        amp = latent.tvi * 0.6 * h / _TVI_FULL_SCALE
        envelope = amp * s
    elif view is DopplerView.PR:
        amp = latent.erap * 0.6 * h / _ERAP_FULL_SCALE
        envelope = amp * s
    else:  # PV
        envelope = 0.35 * h * s

    y0 = 0.88 * h
    yy = np.arange(h, dtype=np.float32)[:, None]
    dist = y0 - yy  # pixels above the baseline
    env = envelope[None, :]

    img = np.full((h, w), 0.05, dtype=np.float32)
    inside = (dist >= 0) & (dist <= env)
    with np.errstate(divide="ignore", invalid="ignore"):
        depth = np.where(env > 0, dist / np.maximum(env, 1e-9), 0.0)
    img += inside * (0.30 + 0.35 * depth)
    img += 0.55 * np.exp(-((dist - env) ** 2) / (2 * 1.5**2)) * (env > 0.5)

    baseline_row = int(round(y0))
    img[baseline_row:baseline_row + 2, :] = 0.85
    for tick in np.linspace(0, w - 1, 13).astype(int):  # faint time grid
        img[baseline_row + 2:, tick] = np.maximum(img[baseline_row + 2:, tick], 0.18)

    img += rng.normal(0.0, 0.03, size=(h, w)).astype(np.float32)
    out = (np.clip(img, 0.0, 1.0) * 255.0).round().astype(np.uint8)
    return np.repeat(out[..., None], 3, axis=2)
