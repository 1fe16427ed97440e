"""
Spheroid shapes and their quasi-static dipole polarizabilities.

A spheroid is described by its semi-axis along the symmetry axis (``r_par``)
and the equatorial semi-axis (``r_perp``). Polarizabilities are returned as
their imaginary parts only, in units of volume (Gaussian convention, so a
sphere gives R^3 (eps-1)/(eps+2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np

from .materials import PermittivityModel, permittivity

_SPHERE_RTOL = 1e-12
# below this eccentricity the closed forms lose digits to cancellation
_SERIES_ETA = 0.1
_SERIES_TERMS = 24


@dataclass(frozen=True)
class Spheroid:
    r_par: float
    r_perp: float
    material: PermittivityModel

    def __post_init__(self):
        if not (self.r_par > 0 and self.r_perp > 0):
            raise ValueError(f"semi-axes must be positive, got r_par={self.r_par}, r_perp={self.r_perp}")

    @classmethod
    def from_aspect(cls, aspect: float, volume: float, material: PermittivityModel) -> "Spheroid":
        """Spheroid with r_perp/r_par = ``aspect`` and the given volume."""
        if not (aspect > 0 and volume > 0):
            raise ValueError("aspect and volume must be positive")
        # V = 4pi/3 * r_perp^2 r_par = 4pi/3 * aspect^2 r_par^3
        r_par = (3.0 * volume / (4.0 * math.pi * aspect**2)) ** (1.0 / 3.0)
        return cls(r_par=r_par, r_perp=aspect * r_par, material=material)

    @property
    def aspect(self) -> float:
        return self.r_perp / self.r_par

    @property
    def volume(self) -> float:
        return 4.0 * math.pi / 3.0 * self.r_perp**2 * self.r_par

    @property
    def kind(self) -> str:
        if abs(self.r_perp - self.r_par) <= _SPHERE_RTOL * max(self.r_perp, self.r_par):
            return "sphere"
        return "prolate" if self.r_perp < self.r_par else "oblate"

    @property
    def max_dimension(self) -> float:
        """Largest semi-axis."""
        return max(self.r_par, self.r_perp)


class PolarizabilityPair(NamedTuple):
    """Imaginary parts of the polarizability along / across the symmetry axis."""

    alpha_par: np.ndarray
    alpha_perp: np.ndarray

    @property
    def vector(self):
        """(alpha_perp, alpha_par), the ordering used by the transfer kernel."""
        return (self.alpha_perp, self.alpha_par)

    @property
    def trace(self):
        return self.alpha_par + 2.0 * self.alpha_perp


def eccentricity(s: Spheroid) -> float:
    """Angular eccentricity, zero for a sphere.

    Prolate: eta^2 = 1 - (r_perp/r_par)^2.  Oblate: eta^2 = (r_perp/r_par)^2 - 1.
    """
    kind = s.kind
    if kind == "sphere":
        return 0.0
    a = s.aspect
    if kind == "prolate":
        return math.sqrt((1.0 - a) * (1.0 + a))
    return math.sqrt((a - 1.0) * (a + 1.0))


def _series_prolate(eta: float) -> float:
    # (1-eta^2) * sum_{k>=1} eta^(2k-2)/(2k+1)
    e2 = eta * eta
    total = 0.0
    for k in range(_SERIES_TERMS, 0, -1):
        total = total * e2 + 1.0 / (2 * k + 1)
    return (1.0 - e2) * total


def _series_oblate(eta: float) -> float:
    # (1+eta^2) * sum_{k>=1} (-1)^(k+1) eta^(2k-2)/(2k+1)
    e2 = eta * eta
    total = 0.0
    for k in range(_SERIES_TERMS, 0, -1):
        total = total * e2 + (-1) ** (k + 1) / (2 * k + 1)
    return (1.0 + e2) * total


def depolarization_factors(s: Spheroid) -> Tuple[float, float]:
    """Return (n_par, n_perp) with n_par + 2 n_perp = 1."""
    kind = s.kind
    if kind == "sphere":
        return 1.0 / 3.0, 1.0 / 3.0
    eta = eccentricity(s)
    if kind == "prolate":
        if eta < _SERIES_ETA:
            n_par = _series_prolate(eta)
        else:
            a = s.aspect
            # ln((1+eta)/(1-eta)) = 2 ln((1+eta)/a) since 1-eta^2 = a^2
            n_par = (a * a) / (2.0 * eta**3) * (2.0 * math.log((1.0 + eta) / a) - 2.0 * eta)
    else:
        if eta < _SERIES_ETA:
            n_par = _series_oblate(eta)
        else:
            n_par = (1.0 + eta**2) / eta**3 * (eta - math.atan(eta))
    return n_par, 0.5 * (1.0 - n_par)


def _component(eps, n: float, vol_factor: float):
    return np.imag(vol_factor / 3.0 * (eps - 1.0) / ((eps - 1.0) * n + 1.0))


def polarizability(s: Spheroid, omega) -> PolarizabilityPair:
    """Im-polarizability components at ``omega`` (rad/s)."""
    eps = permittivity(s.material, omega)
    n_par, n_perp = depolarization_factors(s)
    vf = s.r_perp**2 * s.r_par
    return PolarizabilityPair(_component(eps, n_par, vf), _component(eps, n_perp, vf))


class Resonance(NamedTuple):
    omega: float
    component: str  # "par", "perp", or "both" for a sphere


def resonance_frequencies(s: Spheroid, bracket: Tuple[float, float], samples: int = 20000) -> List[Resonance]:
    """Surface-mode resonances inside ``bracket`` (rad/s), sorted ascending.

    A resonance is an upward zero crossing of Re[(eps-1) n + 1] for n in
    (n_par, n_perp). Downward crossings sit on the steep flank just above a
    transverse-optical pole and carry no resonance, so they are skipped.
    Roots are bisected to 1e-6 relative.
    """
    lo, hi = bracket
    if not (0 < lo < hi):
        raise ValueError("bracket must satisfy 0 < lo < hi")
    grid = np.geomspace(lo, hi, samples)
    eps = permittivity(s.material, grid)
    n_par, n_perp = depolarization_factors(s)
    if s.kind == "sphere":
        components = (("both", n_par),)
    else:
        components = (("par", n_par), ("perp", n_perp))
    found = []
    for label, n in components:

        def f(w, n=n):
            return ((permittivity(s.material, w) - 1.0) * n + 1.0).real

        vals = ((eps - 1.0) * n + 1.0).real
        idx = np.nonzero((vals[:-1] < 0) & (vals[1:] >= 0))[0]
        for i in idx:
            a, b = grid[i], grid[i + 1]
            while (b - a) > 1e-6 * a:
                m = 0.5 * (a + b)
                if f(m) < 0:
                    a = m
                else:
                    b = m
            found.append(Resonance(0.5 * (a + b), label))
    return sorted(found)


def equal_volume_sphere(s: Spheroid) -> Spheroid:
    if s.r_par == s.r_perp:
        return s
    r = (s.r_perp**2 * s.r_par) ** (1.0 / 3.0)
    return Spheroid(r_par=r, r_perp=r, material=s.material)


def surface_area(s: Spheroid) -> float:
    """Closed-form spheroid surface area (m^2)."""
    a, c = s.r_perp, s.r_par
    kind = s.kind
    if kind == "sphere":
        return 4.0 * math.pi * a * a
    if kind == "prolate":
        e = math.sqrt((1.0 - a / c) * (1.0 + a / c))
        return 2.0 * math.pi * a * a * (1.0 + c / (a * e) * math.asin(e))
    e = math.sqrt((1.0 - c / a) * (1.0 + c / a))
    return 2.0 * math.pi * a * a * (1.0 + (1.0 - e * e) / e * math.atanh(e))
