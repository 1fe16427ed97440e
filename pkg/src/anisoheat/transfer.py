"""
Dipole-limit heat transfer between two spheroids and emission of one.

Geometry: particle 1 sits at the origin, particle 2 at distance ``d`` along
+z. Each symmetry axis is given by a polar angle theta (measured from the
center line) and an azimuth; only the azimuth difference ``beta`` matters.

Three independent evaluation paths exist:

* :func:`transfer_general` -- closed form for arbitrary angles, split into
  the d^-2, d^-4 and d^-6 channels;
* :func:`transfer_perpendicular` -- the same closed form specialised to both
  axes lying in the plane perpendicular to the center line;
* :func:`oracle_transfer` -- brute-force contraction of rotated 3x3
  polarizability tensors with the free-space dyadic Green's function.

All spectral kernels are in W per (rad/s), so integrating over omega gives W.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import C, HBAR, K_B, thermal_wavelength
from .geometry import Spheroid, polarizability, resonance_frequencies
from .materials import permittivity
from .spectral import PlanckWeight, QuadratureResult, QuadratureSpec, integrate, planck_difference

HALF_PI = 0.5 * math.pi
CHANNELS = (2, 4, 6)

# validity thresholds
MIN_DISTANCE_RATIO = 5.0
MAX_SIZE_OVER_LAMBDA_T = 0.1


class ValidityWarning(UserWarning):
    """Dipole / one-reflection approximation used outside its comfort zone."""


@dataclass(frozen=True)
class Pair:
    s1: Spheroid
    s2: Spheroid
    d: float
    theta1: float = HALF_PI
    theta2: float = HALF_PI
    beta: float = 0.0
    T1: float = 300.0
    T2: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"separation d must be > 0, got {self.d}")
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError("temperatures must be >= 0 K")

    @property
    def weight(self) -> PlanckWeight:
        return PlanckWeight(self.T1, self.T2)

    @property
    def is_perpendicular(self) -> bool:
        return abs(self.theta1 - HALF_PI) < 1e-12 and abs(self.theta2 - HALF_PI) < 1e-12

    def swapped(self) -> "Pair":
        """Relabel 1<->2. Seen from particle 2 the center line is reversed."""
        return Pair(
            s1=self.s2,
            s2=self.s1,
            d=self.d,
            theta1=math.pi - self.theta2,
            theta2=math.pi - self.theta1,
            beta=-self.beta,
            T1=self.T2,
            T2=self.T1,
        )

    def with_beta(self, beta: float) -> "Pair":
        return replace(self, beta=beta)

    def validity(self) -> List["ValidityCheck"]:
        return validity_checks(self)

    def warnings(self) -> List[str]:
        return [c.message for c in self.validity() if not c.ok]


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    value: float
    threshold: float
    ok: bool
    message: str


def skin_depth(s: Spheroid, omega) -> float:
    """c / (omega Im sqrt(eps)); infinite for a lossless, non-metallic response."""
    n_im = np.sqrt(permittivity(s.material, omega)).imag
    return float(np.inf) if n_im <= 0 else float(C / (omega * n_im))


def _dominant_frequencies(s: Spheroid, T: float) -> List[float]:
    wt = K_B * T / HBAR
    res = [r.omega for r in resonance_frequencies(s, (1e-2 * wt, 40.0 * wt), samples=4000)]
    # Wien peak of the omega^3 Planck spectrum stands in when there is no resonance
    return res or [2.821 * wt]


def particle_checks(s: Spheroid, T: float, label: str = "particle") -> List[ValidityCheck]:
    out = []
    if T > 0:
        lam = thermal_wavelength(T)
        ratio = s.max_dimension / lam
        out.append(ValidityCheck(
            f"{label}.size_over_lambda_T", ratio, MAX_SIZE_OVER_LAMBDA_T, ratio <= MAX_SIZE_OVER_LAMBDA_T,
            f"{label}: size/lambda_T = {ratio:.3g} exceeds {MAX_SIZE_OVER_LAMBDA_T}",
        ))
        delta = min(skin_depth(s, w) for w in _dominant_frequencies(s, T))
        ratio = s.max_dimension / delta
        out.append(ValidityCheck(
            f"{label}.size_over_skin_depth", ratio, 1.0, ratio <= 1.0,
            f"{label}: size exceeds skin depth ({s.max_dimension:.3g} m > {delta:.3g} m)",
        ))
    return out


def validity_checks(p: Pair) -> List[ValidityCheck]:
    big = max(p.s1.max_dimension, p.s2.max_dimension)
    ratio = p.d / big
    checks = [ValidityCheck(
        "distance_over_size", ratio, MIN_DISTANCE_RATIO, ratio >= MIN_DISTANCE_RATIO,
        f"d/size = {ratio:.3g} is below {MIN_DISTANCE_RATIO}",
    )]
    t = max(p.T1, p.T2)
    checks += particle_checks(p.s1, t, "object1")
    checks += particle_checks(p.s2, t, "object2")
    return checks


class SpectralKernel:
    """Spectral power density omega -> W/(rad/s), split into labelled channels."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], labels: Sequence):
        self._func = func
        self.labels = tuple(labels)

    def channels(self, omega) -> np.ndarray:
        out = np.asarray(self._func(np.asarray(omega, dtype=float)))
        return out.reshape(len(self.labels), -1) if out.ndim == 1 and len(self.labels) == 1 else out

    def __call__(self, omega) -> np.ndarray:
        return self.channels(omega).sum(axis=0)

    def select(self, label) -> "SpectralKernel":
        i = self.labels.index(label)
        return SpectralKernel(lambda w: self.channels(w)[i : i + 1], (label,))


def _prefactor(weight: PlanckWeight, omega, power: int):
    # (2 hbar / pi) * omega n(omega) * (omega/c)^power
    return 2.0 * HBAR / math.pi * planck_difference(weight, omega) * (omega / C) ** power


def _pair_terms(p: Pair, omega):
    """Per-frequency building blocks of the closed form.

    Returns (far_on, far_off, zz, cross, x): the beta-independent products
    multiplying cos^2(beta), sin^2(beta), the longitudinal term, the
    sin(2 theta) cross term multiplying cos(beta), and x = omega d / c.
    """
    a1 = polarizability(p.s1, omega)
    a2 = polarizability(p.s2, omega)
    # (alpha_perp, alpha_par) . (cos^2 theta, sin^2 theta): transverse response along the axis projection
    c1, s1 = math.cos(p.theta1) ** 2, math.sin(p.theta1) ** 2
    c2, s2 = math.cos(p.theta2) ** 2, math.sin(p.theta2) ** 2
    proj1 = a1.alpha_perp * c1 + a1.alpha_par * s1
    proj2 = a2.alpha_perp * c2 + a2.alpha_par * s2
    # response along the center line
    long1 = a1.alpha_perp * s1 + a1.alpha_par * c1
    long2 = a2.alpha_perp * s2 + a2.alpha_par * c2
    far_on = proj1 * proj2 + a1.alpha_perp * a2.alpha_perp
    far_off = proj1 * a2.alpha_perp + proj2 * a1.alpha_perp
    zz = 4.0 * long1 * long2
    # (alpha . (1, -1)) for each particle
    cross = (
        math.sin(2 * p.theta1) * math.sin(2 * p.theta2)
        * (a1.alpha_perp - a1.alpha_par) * (a2.alpha_perp - a2.alpha_par)
    )
    x = omega * p.d / C
    return far_on, far_off, zz, cross, x


def beta_basis_kernel(p: Pair) -> SpectralKernel:
    """Channel-by-basis coefficients; labels are (channel, basis) tuples.

    For each channel k the transfer is
    A_k cos^2 beta + B_k sin^2 beta + C_k + D_k cos beta.
    """
    labels = [(k, b) for k in CHANNELS for b in ("cos2", "sin2", "const", "cos")]

    def func(omega):
        far_on, far_off, zz, cross, x = _pair_terms(p, omega)
        pre = _prefactor(p.weight, omega, 6)
        i2, i4, i6 = x**-2, x**-4, x**-6
        zero = np.zeros_like(omega)
        rows = [
            far_on * i2, far_off * i2, zero, zero,
            -far_on * i4, -far_off * i4, zz * i4, zero,
            far_on * i6, far_off * i6, zz * i6, -cross * i6,
        ]
        return pre * np.array(rows)

    return SpectralKernel(func, labels)


def closed_form_kernel(p: Pair) -> SpectralKernel:
    """Transfer spectrum at the pair's own angles, channels (d^-2, d^-4, d^-6)."""
    cb2, sb2, cb = math.cos(p.beta) ** 2, math.sin(p.beta) ** 2, math.cos(p.beta)

    def func(omega):
        far_on, far_off, zz, cross, x = _pair_terms(p, omega)
        pre = _prefactor(p.weight, omega, 6)
        far = far_on * cb2 + far_off * sb2
        return pre * np.array([
            far * x**-2,
            (zz - far) * x**-4,
            (far + zz - cross * cb) * x**-6,
        ])

    return SpectralKernel(func, CHANNELS)


def perpendicular_kernel(p: Pair) -> SpectralKernel:
    """Both symmetry axes perpendicular to the center line."""
    if not p.is_perpendicular:
        raise ValueError("perpendicular kernel needs theta1 = theta2 = pi/2")
    cb2, sb2 = math.cos(p.beta) ** 2, math.sin(p.beta) ** 2

    def func(omega):
        a1 = polarizability(p.s1, omega)
        a2 = polarizability(p.s2, omega)
        pre = _prefactor(p.weight, omega, 6)
        u = C / (omega * p.d)
        on = a1.alpha_perp * a2.alpha_perp + a1.alpha_par * a2.alpha_par
        off = a2.alpha_perp * a1.alpha_par + a2.alpha_par * a1.alpha_perp
        orient = on * cb2 + off * sb2
        iso = 4.0 * a2.alpha_perp * a1.alpha_perp
        return pre * np.array([
            u**2 * orient,
            u**4 * (iso - orient),
            u**6 * (iso + orient),
        ])

    return SpectralKernel(func, CHANNELS)


def _rotation(theta: float, phi: float) -> np.ndarray:
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    return rz @ ry


def global_tensor(s: Spheroid, theta: float, phi: float, omega) -> np.ndarray:
    """Im-polarizability tensors in the lab frame, shape (n, 3, 3)."""
    a = polarizability(s, omega)
    n = np.size(omega)
    local = np.zeros((n, 3, 3))
    local[:, 0, 0] = a.alpha_perp
    local[:, 1, 1] = a.alpha_perp
    local[:, 2, 2] = a.alpha_par
    r = _rotation(theta, phi)
    return np.einsum("ij,njk,lk->nil", r, local, r)


def dyadic_green(omega, d: float, direction=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Free-space electric dyadic (Gaussian units) for a dipole at distance d.

    E = G p with G = k^3 e^{ix}/x [(1 + i/x - 1/x^2) I + (-1 - 3i/x + 3/x^2) r r],
    x = k d. Shape (n, 3, 3).
    """
    k = np.atleast_1d(np.asarray(omega, dtype=float)) / C
    x = k * d
    r = np.asarray(direction, dtype=float)
    r = r / np.linalg.norm(r)
    rr = np.outer(r, r)
    ix = 1.0 / x
    near = 1.0 + 1j * ix - ix**2
    radial = -1.0 - 3j * ix + 3.0 * ix**2
    amp = k**3 * np.exp(1j * x) * ix
    return amp[:, None, None] * (near[:, None, None] * np.eye(3) + radial[:, None, None] * rr)


def oracle_kernel(p: Pair) -> SpectralKernel:
    """Spectral density from tensors and the dyadic Green's function only."""

    def func(omega):
        a1 = global_tensor(p.s1, p.theta1, 0.0, omega)
        a2 = global_tensor(p.s2, p.theta2, p.beta, omega)
        g = dyadic_green(omega, p.d)
        # Tr[A2 G A1 G^dagger]
        tr = np.einsum("nij,njk,nkl,nil->n", a2, g, a1, g.conj())
        return 2.0 * HBAR / math.pi * planck_difference(p.weight, omega) * tr.real

    return SpectralKernel(func, ("total",))


def emission_kernel(s: Spheroid, T: float) -> SpectralKernel:
    w = PlanckWeight(T, 0.0)

    def func(omega):
        trace = polarizability(s, omega).trace
        return _prefactor(w, omega, 3) * (2.0 / 3.0) * trace

    return SpectralKernel(func, ("emission",))


@dataclass
class TransferResult:
    value: float
    error: float
    channels: Optional[Dict[int, float]] = None
    n_evals: int = 0
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __float__(self):
        return float(self.value)


def _seeds(particles: Sequence[Spheroid], omega_max: float, spec: QuadratureSpec):
    if spec.seed_points is not None:
        return spec.seed_points, spec.seed_width
    seeds = set()
    widths = []
    for s in particles:
        for r in resonance_frequencies(s, (1e-4 * omega_max, omega_max), samples=4000):
            seeds.add(r.omega)
        if s.material.linewidth:
            widths.append(s.material.linewidth)
    width = spec.seed_width or (10.0 * max(widths) if widths else None)
    return tuple(sorted(seeds)), width


def integrate_kernel(kernel: SpectralKernel, particles: Sequence[Spheroid], t_max: float,
                     spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """Integrate a kernel over (0, omega_max] with resonance-seeded panels."""
    spec = spec or QuadratureSpec()
    wmax = spec.omega_max(t_max)
    seeds, width = _seeds(particles, wmax, spec)
    return integrate(kernel.channels, spec, (0.0, wmax), seeds=seeds, seed_width=width)


def _warn(p: Pair) -> Tuple[str, ...]:
    msgs = tuple(p.warnings())
    for m in msgs:
        warnings.warn(m, ValidityWarning, stacklevel=3)
    return msgs


def _channel_result(p: Pair, kernel: SpectralKernel, spec) -> TransferResult:
    msgs = _warn(p)
    if p.T1 == p.T2:
        return TransferResult(0.0, 0.0, {k: 0.0 for k in CHANNELS}, 0, msgs)
    q = integrate_kernel(kernel, (p.s1, p.s2), max(p.T1, p.T2), spec)
    chans = {k: float(v) for k, v in zip(CHANNELS, q.value)}
    return TransferResult(
        value=math.fsum(chans.values()),
        error=float(np.sum(q.error)),
        channels=chans,
        n_evals=q.n_evals,
        warnings=msgs,
    )


def transfer_general(p: Pair, spec: Optional[QuadratureSpec] = None) -> TransferResult:
    """Heat transfer 1 -> 2 (W) for arbitrary orientations."""
    return _channel_result(p, closed_form_kernel(p), spec)


def transfer_perpendicular(p: Pair, spec: Optional[QuadratureSpec] = None) -> TransferResult:
    """Heat transfer with both axes in the plane perpendicular to the center line."""
    return _channel_result(p, perpendicular_kernel(p), spec)


def channel_decomposition(p: Pair, spec: Optional[QuadratureSpec] = None) -> Dict[int, float]:
    """Signed d^-2, d^-4, d^-6 contributions (keys 2, 4, 6) in W."""
    return transfer_general(p, spec).channels


def oracle_transfer(p: Pair, spec: Optional[QuadratureSpec] = None) -> TransferResult:
    """Reference transfer from the Green's-function contraction."""
    msgs = _warn(p)
    if p.T1 == p.T2:
        return TransferResult(0.0, 0.0, None, 0, msgs)
    q = integrate_kernel(oracle_kernel(p), (p.s1, p.s2), max(p.T1, p.T2), spec)
    return TransferResult(float(q.value[0]), float(q.error[0]), None, q.n_evals, msgs)


def emission(s: Spheroid, T: float, spec: Optional[QuadratureSpec] = None) -> TransferResult:
    """Thermal emission (W) of an isolated particle at T into a 0 K environment."""
    if T < 0:
        raise ValueError("temperature must be >= 0 K")
    if T == 0:
        return TransferResult(0.0, 0.0)
    q = integrate_kernel(emission_kernel(s, T), (s,), T, spec)
    return TransferResult(float(q.value[0]), float(q.error[0]), None, q.n_evals)


@dataclass
class BetaProfile:
    """Transfer as an exact function of the relative azimuth.

    ``coefficients[k]`` holds (A, B, C, D) for channel k so that
    H_k(beta) = A cos^2 beta + B sin^2 beta + C + D cos beta.
    """

    coefficients: Dict[int, np.ndarray]
    errors: Dict[int, np.ndarray]
    n_evals: int

    def channel(self, beta, k: int):
        a, b, c, d = self.coefficients[k]
        beta = np.asarray(beta, dtype=float)
        # written so that an isotropic pair (a == b, d == 0) is exactly flat in beta
        return (b + c) + (a - b) * np.cos(beta) ** 2 + d * np.cos(beta)

    def __call__(self, beta, regime: str = "exact"):
        if regime == "near":
            return self.channel(beta, 6)
        if regime == "far":
            return self.channel(beta, 2)
        if regime == "exact":
            return sum(self.channel(beta, k) for k in CHANNELS)
        raise ValueError(f"unknown regime {regime!r}")

    def error(self, regime: str = "exact") -> float:
        ks = {"near": (6,), "far": (2,), "exact": CHANNELS}[regime]
        return float(sum(np.sum(self.errors[k]) for k in ks))


def beta_profile(p: Pair, spec: Optional[QuadratureSpec] = None) -> BetaProfile:
    """Integrate the beta-basis once; ``p.beta`` is ignored."""
    _warn(p)
    if p.T1 == p.T2:
        z = np.zeros(4)
        return BetaProfile({k: z.copy() for k in CHANNELS}, {k: z.copy() for k in CHANNELS}, 0)
    q = integrate_kernel(beta_basis_kernel(p), (p.s1, p.s2), max(p.T1, p.T2), spec)
    vals = np.asarray(q.value).reshape(3, 4)
    errs = np.asarray(q.error).reshape(3, 4)
    return BetaProfile(
        {k: vals[i] for i, k in enumerate(CHANNELS)},
        {k: errs[i] for i, k in enumerate(CHANNELS)},
        q.n_evals,
    )
