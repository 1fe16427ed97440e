"""
Planck occupation weights and adaptive frequency quadrature.

The integrator is a globally adaptive Gauss-Kronrod (7/15) scheme working on
vector-valued integrands: a kernel maps a 1-D array of frequencies to an array
of shape ``(n,)`` or ``(m, n)`` and every component is converged to its own
relative tolerance. Panels are refined in batches, which keeps kernel calls
vectorised, and the final sum is taken in panel order with ``math.fsum`` so
the result does not depend on the order the panels were produced in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .constants import HBAR, K_B

# Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point
# weights for the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point node set on [-1, 1], ascending
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """Raised when the panel budget is exhausted before reaching tolerance."""

    def __init__(self, message, estimate=None, error=None, n_panels=0):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.n_panels = n_panels


@dataclass(frozen=True)
class PlanckWeight:
    T1: float
    T2: float = 0.0

    def __post_init__(self):
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError("temperatures must be >= 0 K")

    @property
    def t_max(self) -> float:
        return max(self.T1, self.T2)


def _occupation_times_omega(omega, T):
    if T == 0:
        return np.zeros_like(omega)
    x = HBAR * omega / (K_B * T)
    with np.errstate(over="ignore"):
        return omega / np.expm1(x)


def planck_difference(w: PlanckWeight, omega):
    """omega/(exp(hbar omega/k T1)-1) - omega/(exp(hbar omega/k T2)-1).

    A zero temperature contributes exactly 0; large arguments underflow to 0.
    """
    om = np.asarray(omega, dtype=float)
    if np.any(~(om > 0)):
        raise ValueError("planck_difference requires omega > 0")
    if w.T1 == w.T2:
        out = np.zeros_like(om)
    else:
        out = _occupation_times_omega(om, w.T1) - _occupation_times_omega(om, w.T2)
    return float(out) if np.ndim(omega) == 0 else out


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for :func:`integrate`.

    ``seed_points=None`` lets callers that know the integrand (the transfer
    and emission routines) insert resonance frequencies automatically; an
    explicit empty tuple disables seeding.
    """

    rel_tol: float = 1e-8
    abs_floor: float = 0.0
    omega_max_factor: float = 40.0
    seed_points: Optional[Tuple[float, ...]] = None
    seed_width: Optional[float] = None
    panel_budget: int = 100_000
    initial_panels: int = 8

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-2):
            raise ValueError(f"rel_tol must be in (0, 1e-2], got {self.rel_tol}")
        if self.omega_max_factor < 20:
            raise ValueError(f"omega_max_factor must be >= 20, got {self.omega_max_factor}")
        if self.abs_floor < 0:
            raise ValueError("abs_floor must be >= 0")
        if self.panel_budget < 1 or self.initial_panels < 1:
            raise ValueError("panel_budget and initial_panels must be >= 1")
        if self.seed_points is not None:
            object.__setattr__(self, "seed_points", tuple(float(s) for s in self.seed_points))

    def omega_max(self, t_max: float) -> float:
        if t_max <= 0:
            raise ValueError("cutoff needs a positive temperature")
        return self.omega_max_factor * K_B * t_max / HBAR


@dataclass
class QuadratureResult:
    value: np.ndarray
    error: np.ndarray
    n_evals: int
    n_panels: int
    breakpoints: Sequence[float] = field(default_factory=tuple, repr=False)

    def __float__(self):
        return float(np.sum(self.value))


def _kronrod_panels(func, a, b):
    """15-point rule on panels [a_i, b_i]: (Kronrod sums, error estimates, integral of |f|, is_vector)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(func(x.ravel()), dtype=float)
    vector = fx.ndim == 2
    if not vector:
        fx = fx[None, :]
    m = fx.shape[0]
    fx = fx.reshape(m, a.size, 15)
    k = half * np.einsum("mpj,j->mp", fx, KRONROD_WEIGHTS)
    g = half * np.einsum("mpj,j->mp", fx, GAUSS_WEIGHTS)
    resabs = np.abs(half) * np.einsum("mpj,j->mp", np.abs(fx), KRONROD_WEIGHTS)
    mean = k / np.where(half == 0, 1.0, 2 * half)
    resasc = np.abs(half) * np.einsum("mpj,j->mp", np.abs(fx - mean[..., None]), KRONROD_WEIGHTS)
    # QUADPACK error heuristic
    diff = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    floor = 50.0 * _EPS * resabs
    err = np.maximum(scaled, floor)
    return k, err, resabs, vector


def _initial_breakpoints(lo, hi, n_uniform, seeds, width):
    pts = set(np.linspace(lo, hi, n_uniform + 1).tolist())
    if seeds:
        for s in seeds:
            for f in (-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0):
                p = s + f * width
                if lo < p < hi:
                    pts.add(float(p))
    return np.array(sorted(pts))


def integrate(
    kernel: Callable[[np.ndarray], np.ndarray],
    spec: QuadratureSpec,
    interval: Tuple[float, float],
    seeds: Optional[Sequence[float]] = None,
    seed_width: Optional[float] = None,
) -> QuadratureResult:
    """Integrate ``kernel`` over ``interval`` to ``spec.rel_tol`` per component.

    The tolerance for each component is ``rel_tol * integral(|f|)`` (or
    ``abs_floor`` if larger), which equals the usual relative criterion for
    integrands of one sign.

    ``seeds`` (resonance frequencies) and ``seed_width`` override the values
    carried by ``spec``. Each seed s contributes breakpoints at
    s + {0, +-0.3, +-1, +-3} * width to the initial uniform mesh.

    Raises :class:`ConvergenceError` if more than ``spec.panel_budget``
    panels would be needed.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError("empty integration interval")
    if seeds is None:
        seeds = spec.seed_points or ()
    width = seed_width if seed_width is not None else spec.seed_width
    if seeds and not width:
        width = 1e-3 * (hi - lo)
    bp = _initial_breakpoints(lo, hi, spec.initial_panels, seeds, width)
    a, b = bp[:-1], bp[1:]
    k, err, absk, vector = _kronrod_panels(kernel, a, b)
    n_evals = 15 * a.size

    while True:
        etot = err.sum(axis=1)
        # relative to the integral of |f| so sign-changing components converge
        tol = np.maximum(spec.rel_tol * absk.sum(axis=1), spec.abs_floor)
        if np.all(etot <= tol):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            score = np.where(tol[:, None] > 0, err / tol[:, None], np.where(err > 0, np.inf, 0.0))
        score = score.max(axis=0)
        npan = a.size
        split = score > 1.0 / npan
        if not np.any(split):
            split = score >= score.max()
        if npan + np.count_nonzero(split) > spec.panel_budget:
            order = np.argsort(a)
            est = np.array([math.fsum(row) for row in k[:, order]])
            raise ConvergenceError(
                f"quadrature did not converge within {spec.panel_budget} panels "
                f"(estimate {est.tolist()}, error {etot.tolist()})",
                estimate=est if vector else float(est[0]),
                error=etot if vector else float(etot[0]),
                n_panels=npan,
            )
        sa, sb = a[split], b[split]
        mid = 0.5 * (sa + sb)
        na = np.concatenate([sa, mid])
        nb = np.concatenate([mid, sb])
        nk, nerr, nabs, _ = _kronrod_panels(kernel, na, nb)
        n_evals += 15 * na.size
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        k = np.concatenate([k[:, keep], nk], axis=1)
        err = np.concatenate([err[:, keep], nerr], axis=1)
        absk = np.concatenate([absk[:, keep], nabs], axis=1)

    order = np.argsort(a, kind="stable")
    value = np.array([math.fsum(row) for row in k[:, order]])
    ev = np.array([math.fsum(row) for row in err[:, order]])
    if not vector:
        value, ev = value[0], ev[0]
    return QuadratureResult(
        value=value,
        error=ev,
        n_evals=n_evals,
        n_panels=int(a.size),
        breakpoints=tuple(np.append(a[order], b[order][-1]).tolist()),
    )
