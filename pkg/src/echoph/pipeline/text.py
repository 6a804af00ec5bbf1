"""Canonical metadata-to-text serialization for the text branch."""

from __future__ import annotations

from echoph.domain import PatientMetadata

_FIELD_ORDER = ("sex", "age", "height", "weight", "device")


def _fmt_number(value: float) -> str:
    return f"{value:g}"


def serialize_metadata(metadata: PatientMetadata) -> str:
    """Stable key-value template, e.g.
    "Sex: Female; Age: 43 years; Height: 160 cm; Weight: 55 kg; Device: PHILIPS".
    Missing (None) fields are omitted; the order of the rest is preserved."""
    parts = []
    if getattr(metadata, "sex", None) is not None:
        parts.append(f"Sex: {metadata.sex.value.capitalize()}")
    if getattr(metadata, "age", None) is not None:
        parts.append(f"Age: {_fmt_number(metadata.age)} years")
    if getattr(metadata, "height", None) is not None:
        parts.append(f"Height: {_fmt_number(metadata.height)} cm")
    if getattr(metadata, "weight", None) is not None:
        parts.append(f"Weight: {_fmt_number(metadata.weight)} kg")
    if getattr(metadata, "device", None) is not None:
        parts.append(f"Device: {metadata.device.value}")
    return "; ".join(parts)
