"""
Dispersive permittivity models.

All models are frozen dataclasses taking their energy-like parameters in eV
and evaluating at angular frequency ``omega`` in rad/s. The conversion uses
omega = E / hbar.

The registry at the bottom holds the SiC phonon-polariton model used in all
figure reproductions, plus a large-|eps| Drude model for the metallic scaling
probe.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .constants import ev_to_rad


class PermittivityModel:
    """Base class; subclasses implement ``_evaluate(omega)`` on arrays."""

    name: str = "model"

    def __call__(self, omega):
        return permittivity(self, omega)

    def _evaluate(self, omega: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def linewidth(self) -> Optional[float]:
        """Damping rate in rad/s, used to size refinement panels; None if undefined."""
        return None

    @property
    def variant(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class LorentzOscillator(PermittivityModel):
    """Single-phonon Lorentz oscillator.

    eps(w) = eps_inf * (w^2 - scale*w_LO^2 + i w g) / (w^2 - w_TO^2 + i w g)

    ``scale`` multiplies the squared LO frequency and is how resonance
    detuning is expressed (see :func:`detune`).
    """

    eps_inf: float
    omega_LO: float
    omega_TO: float
    gamma: float
    scale: float = 1.0
    name: str = "lorentz"

    def __post_init__(self):
        if not self.eps_inf > 0:
            raise ValueError(f"eps_inf must be > 0, got {self.eps_inf}")
        if not self.omega_TO > 0:
            raise ValueError(f"omega_TO must be > 0, got {self.omega_TO}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not self.scale * self.omega_LO**2 > self.omega_TO**2:
            raise ValueError(
                "need omega_LO > omega_TO after scaling "
                f"(omega_LO={self.omega_LO}, scale={self.scale}, omega_TO={self.omega_TO})"
            )

    @property
    def lo_rad(self) -> float:
        """Effective LO frequency sqrt(scale) * omega_LO in rad/s."""
        return float(np.sqrt(self.scale) * ev_to_rad(self.omega_LO))

    @property
    def to_rad(self) -> float:
        return float(ev_to_rad(self.omega_TO))

    @property
    def linewidth(self) -> float:
        return float(ev_to_rad(self.gamma))

    def _evaluate(self, omega):
        lo2 = self.lo_rad**2
        to2 = self.to_rad**2
        g = self.linewidth
        return self.eps_inf * (omega**2 - lo2 + 1j * omega * g) / (omega**2 - to2 + 1j * omega * g)


@dataclass(frozen=True)
class DrudeModel(PermittivityModel):
    """Free-electron response eps = eps_inf - w_p^2 / (w^2 + i w g)."""

    omega_p: float
    gamma: float
    eps_inf: float = 1.0
    name: str = "drude"

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError(f"omega_p must be > 0, got {self.omega_p}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    @property
    def linewidth(self) -> float:
        return float(ev_to_rad(self.gamma))

    def _evaluate(self, omega):
        wp = ev_to_rad(self.omega_p)
        g = self.linewidth
        return self.eps_inf - wp**2 / (omega**2 + 1j * omega * g)


@dataclass(frozen=True)
class ConstantPermittivity(PermittivityModel):
    value: complex = 1.0 + 0.0j
    name: str = "constant"

    def __post_init__(self):
        if complex(self.value).imag < 0:
            raise ValueError("constant permittivity must be passive (Im >= 0)")

    def _evaluate(self, omega):
        return np.full(np.shape(omega), complex(self.value), dtype=complex)


@dataclass(frozen=True)
class TabulatedPermittivity(PermittivityModel):
    """Tabulated eps on an energy grid (eV), interpolated linearly in log-frequency.

    Real and imaginary parts are interpolated separately. Evaluation outside
    the grid raises ``ValueError``.
    """

    energies: tuple
    eps_real: tuple
    eps_imag: tuple
    name: str = "tabulated"

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("tabulated grid needs at least two energies")
        if np.any(e <= 0) or np.any(np.diff(e) <= 0):
            raise ValueError("tabulated energies must be positive and strictly increasing")
        if len(self.eps_real) != e.size or len(self.eps_imag) != e.size:
            raise ValueError("eps_real/eps_imag must match the energy grid length")
        if np.any(np.asarray(self.eps_imag, dtype=float) < 0):
            raise ValueError("tabulated Im eps must be >= 0 (passivity)")
        # normalise to tuples so the dataclass stays hashable
        object.__setattr__(self, "energies", tuple(float(x) for x in e))
        object.__setattr__(self, "eps_real", tuple(float(x) for x in self.eps_real))
        object.__setattr__(self, "eps_imag", tuple(float(x) for x in self.eps_imag))

    def _evaluate(self, omega):
        grid = np.log(ev_to_rad(np.asarray(self.energies)))
        lw = np.log(omega)
        # tolerate one-ulp round-off at the grid ends
        lo, hi = grid[0] - 1e-12, grid[-1] + 1e-12
        if np.any(lw < lo) or np.any(lw > hi):
            raise ValueError(
                "frequency outside tabulated range "
                f"[{np.exp(grid[0]):.6g}, {np.exp(grid[-1]):.6g}] rad/s"
            )
        re = np.interp(lw, grid, self.eps_real)
        im = np.interp(lw, grid, self.eps_imag)
        return re + 1j * im


def permittivity(model: PermittivityModel, omega):
    """Evaluate ``model`` at angular frequency ``omega`` (rad/s, scalar or array).

    Raises ``ValueError`` for non-positive frequencies.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise ValueError("permittivity is defined for omega > 0 only")
    eps = model._evaluate(w)
    if np.ndim(omega) == 0:
        return complex(eps)
    return eps


def detune(model: LorentzOscillator, lam: float) -> LorentzOscillator:
    """Return a copy of a Lorentz model with omega_LO^2 scaled by ``lam``.

    Scales compose multiplicatively, so ``detune(detune(m, a), b)`` equals
    ``detune(m, a*b)``.
    """
    if not isinstance(model, LorentzOscillator):
        raise TypeError("detune applies to Lorentz oscillator models only")
    new_scale = model.scale * lam
    limit = (model.omega_TO / model.omega_LO) ** 2
    if not new_scale > limit:
        raise ValueError(
            f"detuning factor {lam} would push omega_LO below omega_TO "
            f"(need total scale > {limit:.6g})"
        )
    return dataclasses.replace(model, scale=new_scale, name=f"{model.name}x{lam:g}")


SIC = LorentzOscillator(eps_inf=6.7, omega_LO=0.12, omega_TO=0.098, gamma=5.88e-4, name="SiC")

# Hypothetical metal with |eps| > 1e4 across the 300 K thermal band; gives a
# power-law window for needle spheroids spanning more than a decade of aspect.
DRUDE_PROBE = DrudeModel(omega_p=100.0, gamma=0.1, name="drude_probe")

# Gold-like Drude parameters; skin depth of tens of nm in the thermal infrared.
GOLD_DRUDE = DrudeModel(omega_p=9.0, gamma=0.07, name="Au_drude")

VACUUM = ConstantPermittivity(1.0, name="vacuum")

_REGISTRY: Dict[str, PermittivityModel] = {}


def register(model: PermittivityModel, name: Optional[str] = None) -> None:
    _REGISTRY[name or model.name] = model


def get_material(name: str) -> PermittivityModel:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(_REGISTRY)}") from None


def registered_materials() -> Dict[str, PermittivityModel]:
    return dict(_REGISTRY)


for _m in (SIC, DRUDE_PROBE, GOLD_DRUDE, VACUUM):
    register(_m)


# parameter names accepted per variant in config files
VARIANT_PARAMS = {
    "lorentz": {"eps_inf", "omega_lo", "omega_to", "gamma", "scale"},
    "drude": {"omega_p", "gamma", "eps_inf"},
    "constant": {"eps_real", "eps_imag"},
    "tabulated": {"energies", "eps_real", "eps_imag"},
}


def _floats(text) -> Sequence[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


def material_from_params(name: str, variant: str, params: Dict[str, str]) -> PermittivityModel:
    """Build a model from config key/value text (energies in eV)."""
    variant = variant.strip().lower()
    if variant not in VARIANT_PARAMS:
        raise ValueError(f"unknown material variant {variant!r}; expected one of {sorted(VARIANT_PARAMS)}")
    unknown = set(params) - VARIANT_PARAMS[variant]
    if unknown:
        raise ValueError(f"unknown parameter(s) for {variant}: {sorted(unknown)}")
    p = dict(params)
    if variant == "lorentz":
        return LorentzOscillator(
            eps_inf=float(p["eps_inf"]),
            omega_LO=float(p["omega_lo"]),
            omega_TO=float(p["omega_to"]),
            gamma=float(p["gamma"]),
            scale=float(p.get("scale", 1.0)),
            name=name,
        )
    if variant == "drude":
        return DrudeModel(
            omega_p=float(p["omega_p"]),
            gamma=float(p["gamma"]),
            eps_inf=float(p.get("eps_inf", 1.0)),
            name=name,
        )
    if variant == "constant":
        return ConstantPermittivity(complex(float(p["eps_real"]), float(p.get("eps_imag", 0.0))), name=name)
    return TabulatedPermittivity(
        energies=tuple(_floats(p["energies"])),
        eps_real=tuple(_floats(p["eps_real"])),
        eps_imag=tuple(_floats(p["eps_imag"])),
        name=name,
    )
