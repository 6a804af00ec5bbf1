"""Latent hemodynamic ground truth and its derived echo measurements.

The latent state fixes mPAP and PVR; every other quantity is tied to them by
the exactly-invertible pressure/resistance relations, so the zero-noise
formula round-trip recovers the latent values to float precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from echoph.domain import EchoParams, PatientMetadata, Device, Sex, Subtype

MPAP_RANGE = (5.0, 107.0)
PVR_RANGE = (0.66, 41.54)


class GenerationRetry(RuntimeError):
    """Latent state cannot produce physical echo parameters; redraw it."""


@dataclass
class LatentHemodynamics:
    mpap: float        # mmHg
    pvr: float         # WU
    spap: float        # mmHg, (mpap - 2) / 0.61
    erap: float        # mmHg
    tvi: float         # cm
    heart_rate: float  # beats/min
    noise_seed: int

    @property
    def trv(self) -> float:
        """Peak TR velocity (m/s) implied by the pressure gradient."""
        return math.sqrt(max(self.spap - self.erap, 0.0) / 4.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LatentHemodynamics":
        return cls(**d)


@dataclass
class EchoNoise:
    """Gaussian perturbation scales applied to derived echo parameters."""

    trv: float = 0.0     # m/s
    erap: float = 0.0    # mmHg
    tvi: float = 0.0     # cm
    rvw: float = 0.0     # mm
    tapse: float = 0.0   # mm
    s_prime: float = 0.0  # cm/s
    fac: float = 0.0     # percent

    def validate(self) -> "EchoNoise":
        for name, v in asdict(self).items():
            if v < 0:
                raise ValueError(f"noise scale {name} must be >= 0, got {v}")
        return self

    @property
    def any_nonzero(self) -> bool:
        return any(v > 0 for v in asdict(self).values())


@dataclass
class PvrLink:
    """Monotone PVR-given-mPAP link: pvr = clip(slope*mpap + intercept + eps)."""

    slope: float = 0.2
    intercept: float = -0.5
    noise_sd: float = 1.0


# Piecewise-uniform mPAP sampler: (lo, hi, weight) bins. The default covers
# every taxonomy band; the lower edge stays above 5.13 mmHg so the systolic
# pressure link never dips below mPAP.
DEFAULT_MPAP_BINS = (
    (5.2, 20.0, 0.20),
    (20.0, 35.0, 0.30),
    (35.0, 50.0, 0.25),
    (50.0, 107.0, 0.25),
)


def sample_latent(
    rng: np.random.Generator,
    mpap_bins=DEFAULT_MPAP_BINS,
    pvr_link: PvrLink | None = None,
) -> LatentHemodynamics:
    link = pvr_link or PvrLink()
    bins = list(mpap_bins)
    weights = np.array([b[2] for b in bins], dtype=float)
    weights /= weights.sum()
    k = int(rng.choice(len(bins), p=weights))
    lo, hi = bins[k][0], bins[k][1]
    mpap = float(lo if lo == hi else rng.uniform(lo, hi))
    mpap = float(np.clip(mpap, *MPAP_RANGE))
    spap = (mpap - 2.0) / 0.61
    erap = float(rng.uniform(0.0, min(15.0, max(spap - 0.5, 0.0))))
    eps = float(rng.normal(0.0, link.noise_sd)) if link.noise_sd > 0 else 0.0
    pvr = float(np.clip(link.slope * mpap + link.intercept + eps, *PVR_RANGE))
    trv = math.sqrt(max(spap - erap, 0.0) / 4.0)
    tvi = 5.19 * trv * trv / (pvr + 0.4)
    heart_rate = float(rng.uniform(55.0, 110.0))
    noise_seed = int(rng.integers(0, 2**63 - 1))
    return LatentHemodynamics(
        mpap=mpap, pvr=pvr, spap=spap, erap=erap, tvi=tvi,
        heart_rate=heart_rate, noise_seed=noise_seed,
    )


def derive_echo_params(
    latent: LatentHemodynamics,
    noise: EchoNoise,
    rng: np.random.Generator | None = None,
) -> EchoParams:
    """Echo parameters consistent with the latent hemodynamics.

    With all noise scales zero the clinical formulas applied to the result
    reproduce latent mpap and pvr exactly (to float rounding). Nonzero scales
    perturb trv/erap/tvi before return, which is what gives the formula
    baseline its error floor.
    """
    noise.validate()
    if latent.spap < latent.erap:
        raise GenerationRetry(
            f"spap {latent.spap} < erap {latent.erap}: latent not renderable"
        )
    if noise.any_nonzero and rng is None:
        raise ValueError("nonzero noise requires an rng stream")

    def jitter(value, scale, lo, hi):
        if scale > 0:
            value = value + float(rng.normal(0.0, scale))
        return float(np.clip(value, lo, hi))

    trv = jitter(latent.trv, noise.trv, 0.0, 10.0)
    erap = jitter(latent.erap, noise.erap, 0.0, 40.0)
    tvi = jitter(latent.tvi, noise.tvi, 0.5, 60.0)
    # Secondary RV-function parameters: plausible monotone trends in severity
    # plus their own noise; these feed only the tabular baseline.
    rvw = jitter(3.0 + 0.06 * latent.mpap, noise.rvw, 2.6, 19.0)
    tapse = jitter(26.0 - 0.12 * latent.mpap, noise.tapse, 2.0, 45.0)
    s_prime = jitter(14.5 - 0.06 * latent.mpap, noise.s_prime, 3.6, 22.0)
    fac = jitter(48.0 - 0.9 * latent.pvr, noise.fac, 6.0, 57.6)
    return EchoParams(
        trv_max=trv, erap=erap, tvi_rvot=tvi,
        rvw=rvw, tapse=tapse, s_prime=s_prime, fac=fac,
    )


_SUBTYPE_WEIGHTS = {
    Subtype.IPAH: 0.24,
    Subtype.CTD_PAH: 0.05,
    Subtype.CHD_PAH: 0.25,
    Subtype.LHD: 0.03,
    Subtype.CTEPH: 0.40,
    Subtype.HPAH: 0.02,
    Subtype.POPH: 0.01,
}

_DEVICE_WEIGHTS = {Device.PHILIPS: 0.727, Device.GE: 0.155, Device.ALOKA: 0.118}


def synthesize_metadata(
    latent: LatentHemodynamics, rng: np.random.Generator
) -> PatientMetadata:
    sex = Sex.FEMALE if rng.random() < 0.622 else Sex.MALE
    age = float(np.round(rng.uniform(14.0, 77.0)))
    if sex is Sex.FEMALE:
        height = float(np.clip(rng.normal(160.0, 7.0), 140.0, 185.0))
        weight = float(np.clip(rng.normal(58.0, 9.0), 35.0, 110.0))
    else:
        height = float(np.clip(rng.normal(172.0, 7.0), 150.0, 198.0))
        weight = float(np.clip(rng.normal(70.0, 10.0), 40.0, 120.0))
    devices = list(_DEVICE_WEIGHTS)
    device = devices[int(rng.choice(len(devices), p=list(_DEVICE_WEIGHTS.values())))]
    if latent.mpap < 20.0 and latent.pvr < 2.0:
        subtype = Subtype.NON_PH
    else:
        subs = list(_SUBTYPE_WEIGHTS)
        p = np.array(list(_SUBTYPE_WEIGHTS.values()))
        subtype = subs[int(rng.choice(len(subs), p=p / p.sum()))]
    center = "ABCD"[int(rng.integers(4))]
    return PatientMetadata(
        sex=sex, age=age, height=round(height, 1), weight=round(weight, 1),
        center=center, device=device, subtype=subtype,
    )
