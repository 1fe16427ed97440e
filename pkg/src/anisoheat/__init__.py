"""Radiative heat transfer between anisotropic dipolar nanoparticles."""

from .materials import (
    ConstantPermittivity,
    DrudeModel,
    LorentzOscillator,
    PermittivityModel,
    TabulatedPermittivity,
    detune,
    get_material,
    permittivity,
)
from .geometry import (
    PolarizabilityPair,
    Spheroid,
    depolarization_factors,
    eccentricity,
    equal_volume_sphere,
    polarizability,
    resonance_frequencies,
    surface_area,
)
from .spectral import (
    ConvergenceError,
    PlanckWeight,
    QuadratureResult,
    QuadratureSpec,
    integrate,
    planck_difference,
)
from .transfer import (
    Pair,
    SpectralKernel,
    TransferResult,
    beta_profile,
    channel_decomposition,
    emission,
    oracle_transfer,
    transfer_general,
    transfer_perpendicular,
)

__version__ = "0.1.0"

__all__ = [
    "ConstantPermittivity",
    "ConvergenceError",
    "DrudeModel",
    "LorentzOscillator",
    "Pair",
    "PermittivityModel",
    "PlanckWeight",
    "PolarizabilityPair",
    "QuadratureResult",
    "QuadratureSpec",
    "SpectralKernel",
    "Spheroid",
    "TabulatedPermittivity",
    "TransferResult",
    "beta_profile",
    "channel_decomposition",
    "depolarization_factors",
    "detune",
    "eccentricity",
    "emission",
    "equal_volume_sphere",
    "get_material",
    "integrate",
    "oracle_transfer",
    "permittivity",
    "planck_difference",
    "polarizability",
    "resonance_frequencies",
    "surface_area",
    "transfer_general",
    "transfer_perpendicular",
]
