"""Core clinical types, echocardiographic formula baselines, guideline
taxonomy, and treatment-response categorization.

Pressures are mmHg, resistances Wood units (WU), velocities m/s, lengths cm.
No unit conversion happens anywhere in this module.
"""

from __future__ import annotations


from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class Sex(str, Enum):
    FEMALE = "female"
    MALE = "male"


class Device(str, Enum):
    PHILIPS = "PHILIPS"
    GE = "GE"
    ALOKA = "ALOKA"


class Subtype(str, Enum):
    NON_PH = "NonPH"
    IPAH = "IPAH"
    HPAH = "HPAH"
    CTD_PAH = "CTD_PAH"
    CHD_PAH = "CHD_PAH"
    POPH = "PoPH"
    LHD = "LHD"
    CTEPH = "CTEPH"


class VideoView(str, Enum):
    PLAX = "PLAX"
    PSAX = "PSAX"
    A4C = "A4C"
    PALA = "PALA"


class DopplerView(str, Enum):
    RVOT = "RVOT"
    PR = "PR"
    TR = "TR"
    PV = "PV"


VIDEO_VIEWS = tuple(VideoView)
DOPPLER_VIEWS = tuple(DopplerView)


class MpapClass(str, Enum):
    NON_PH_RANGE = "NonPHRange"
    MILD = "Mild"
    MODERATE = "Moderate"
    SEVERE = "Severe"


class PvrClass(str, Enum):
    NORMAL = "Normal"
    MILD_MODERATE = "MildModerate"
    SEVERE = "Severe"


class EfficacyCategory(str, Enum):
    STRONG_RESPONSE = "StrongResponse"
    PARTIAL_RESPONSE = "PartialResponse"
    NO_RESPONSE = "NoResponse"


# Guideline cut points (left-closed intervals).
MPAP_THRESHOLDS = (20.0, 35.0, 50.0)
PVR_THRESHOLDS = (2.0, 5.0)
DELTA_PVR_THRESHOLDS = (-30.0, -5.0)  # percent change


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class DomainError(ValueError):
    """Input outside the mathematical domain of a formula."""


@dataclass
class RhcMeasurement:
    """Right-heart-catheterization ground truth for one case."""

    mpap: float
    pvr: float
    spap: float
    mrap: float
    pawp: float

    def validate(self) -> "RhcMeasurement":
        if self.mpap < 0:
            raise ValidationError(f"mpap must be >= 0, got {self.mpap}")
        if self.pvr <= 0:
            raise ValidationError(f"pvr must be > 0, got {self.pvr}")
        if self.spap < self.mpap:
            raise ValidationError(
                f"spap ({self.spap}) must be >= mpap ({self.mpap})"
            )
        return self


@dataclass
class EchoParams:
    """Echocardiographic measurements used by the formula baselines and the
    tabular model."""

    trv_max: float  # m/s
    erap: float     # mmHg
    tvi_rvot: float  # cm
    rvw: float      # mm
    tapse: float    # mm
    s_prime: float  # cm/s
    fac: float      # percent

    def validate(self) -> "EchoParams":
        for name in ("trv_max", "erap", "tvi_rvot", "rvw", "tapse", "s_prime", "fac"):
            v = getattr(self, name)
            if v < 0:
                raise ValidationError(f"{name} must be >= 0, got {v}")
        if self.trv_max > 10.0:
            raise ValidationError(f"trv_max {self.trv_max} m/s exceeds sanity bound 10")
        return self


@dataclass
class PatientMetadata:
    sex: Sex
    age: float       # years
    height: float    # cm
    weight: float    # kg
    center: str
    device: Device
    subtype: Subtype

    def validate(self) -> "PatientMetadata":
        if not (14 <= self.age <= 90):
            raise ValidationError(f"age must be in [14, 90], got {self.age}")
        return self


@dataclass
class TaxonomyLabel:
    mpap_class: MpapClass
    pvr_class: PvrClass
    is_ph: bool

    def to_dict(self) -> dict:
        return {
            "mpap_class": self.mpap_class.value,
            "pvr_class": self.pvr_class.value,
            "is_ph": self.is_ph,
        }


@dataclass
class CaseRecord:
    """One patient case: four echo video views, four Doppler views, metadata,
    echo parameters, optional RHC ground truth, and a split tag.

    ``videos`` maps view name -> uint8 array (T, H, W, 3); ``dopplers`` maps
    view name -> uint8 array (H, W, 3). Inference-only cases carry rhc=None.
    """

    case_id: str
    videos: dict
    dopplers: dict
    metadata: PatientMetadata
    echo_params: EchoParams
    rhc: Optional[RhcMeasurement] = None
    split: str = "test"
    prior_pvr: Optional[float] = None  # pre-treatment RHC PVR, for follow-up cases
    extra: dict = field(default_factory=dict)


@dataclass
class CaseViolation:
    code: str        # MissingView | CorruptImage | IncompleteMetadata
    detail: str


def mpap_from_echo(trv_max: float, erap: float) -> float:
    """Echocardiographic mPAP estimate from peak tricuspid-regurgitation
    velocity (m/s) and estimated right atrial pressure (mmHg).

    mPAP = 0.61 * (4 * trv_max^2 + erap) + 2
    """
    if trv_max < 0 or erap < 0:
        raise ValidationError(
            f"inputs must be >= 0, got trv_max={trv_max}, erap={erap}"
        )
    return 0.61 * (4.0 * trv_max * trv_max + erap) + 2.0


def pvr_from_echo(trv: float, tvi_rvot: float) -> tuple[float, bool]:
    """Echocardiographic PVR estimate (WU) from TRV (m/s) and the RVOT
    time-velocity integral (cm).

    PVR = 5.19 * trv^2 / tvi_rvot - 0.4

    Returns (value, nonphysical): negative results are returned as-is with
    the nonphysical flag set, never clamped.
    """
    if tvi_rvot <= 0:
        raise DomainError(f"tvi_rvot must be > 0, got {tvi_rvot}")
    value = 5.19 * trv * trv / tvi_rvot - 0.4
    return value, value < 0


def classify(mpap: float, pvr: float) -> TaxonomyLabel:
    """Guideline severity taxonomy. All thresholds are left-closed:
    mPAP {<20, [20,35), [35,50), >=50}, PVR {<2, [2,5), >=5}.
    Non-PH iff mpap < 20 AND pvr < 2.
    """
    if mpap < 0 or pvr < 0:
        raise ValidationError(f"mpap and pvr must be >= 0, got ({mpap}, {pvr})")
    if mpap < 20.0:
        mpap_class = MpapClass.NON_PH_RANGE
    elif mpap < 35.0:
        mpap_class = MpapClass.MILD
    elif mpap < 50.0:
        mpap_class = MpapClass.MODERATE
    else:
        mpap_class = MpapClass.SEVERE
    if pvr < 2.0:
        pvr_class = PvrClass.NORMAL
    elif pvr < 5.0:
        pvr_class = PvrClass.MILD_MODERATE
    else:
        pvr_class = PvrClass.SEVERE
    is_ph = not (mpap < 20.0 and pvr < 2.0)
    return TaxonomyLabel(mpap_class=mpap_class, pvr_class=pvr_class, is_ph=is_ph)


def delta_pvr_percent(pvr_pre: float, pvr_post: float) -> float:
    """Relative PVR change in percent between two measurements."""
    if pvr_pre <= 0:
        raise DomainError(f"pvr_pre must be > 0, got {pvr_pre}")
    return 100.0 * (pvr_post - pvr_pre) / pvr_pre


def delta_pvr_category(pvr_pre: float, pvr_post: float) -> EfficacyCategory:
    """Treatment-response category from relative PVR change:
    strong response below -30%, partial in [-30%, -5%), none at >= -5%.
    """
    delta = delta_pvr_percent(pvr_pre, pvr_post)
    if delta < DELTA_PVR_THRESHOLDS[0]:
        return EfficacyCategory.STRONG_RESPONSE
    if delta < DELTA_PVR_THRESHOLDS[1]:
        return EfficacyCategory.PARTIAL_RESPONSE
    return EfficacyCategory.NO_RESPONSE


def validate_case(record: CaseRecord) -> list[CaseViolation]:
    """Check that a case carries all eight required views with sane pixel
    content and complete metadata. Returns the list of violations (empty for
    a valid case)."""
    import numpy as np

    violations: list[CaseViolation] = []
    for view in VIDEO_VIEWS:
        arr = record.videos.get(view.value)
        if arr is None:
            violations.append(CaseViolation("MissingView", view.value))
        elif not _pixels_ok(np.asarray(arr)):
            violations.append(CaseViolation("CorruptImage", f"video {view.value}"))
    for view in DOPPLER_VIEWS:
        arr = record.dopplers.get(view.value)
        if arr is None:
            violations.append(CaseViolation("MissingView", view.value))
        elif not _pixels_ok(np.asarray(arr)):
            violations.append(CaseViolation("CorruptImage", f"doppler {view.value}"))
    try:
        record.metadata.validate()
    except (ValidationError, AttributeError) as exc:
        violations.append(CaseViolation("IncompleteMetadata", str(exc)))
    try:
        record.echo_params.validate()
    except (ValidationError, AttributeError) as exc:
        violations.append(CaseViolation("IncompleteMetadata", str(exc)))
    return violations


def _pixels_ok(arr) -> bool:
    import numpy as np

    if arr.size == 0:
        return False
    if np.issubdtype(arr.dtype, np.floating):
        if not np.isfinite(arr).all():
            return False
        return bool((arr >= 0).all() and (arr <= 1).all())
    return bool((arr >= 0).all() and (arr <= 255).all())
