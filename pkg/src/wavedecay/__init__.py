"""Certified exponential decay for the damped wave equation."""

from .certificate import (
    DampingBounds,
    DecayCertificate,
    Provenance,
    Regime,
    SpectralGap,
    certify,
    maximize_F,
)

__version__ = "0.1.0"

__all__ = [
    "DampingBounds",
    "DecayCertificate",
    "Provenance",
    "Regime",
    "SpectralGap",
    "certify",
    "maximize_F",
]
