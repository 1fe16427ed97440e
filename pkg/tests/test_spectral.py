import math

import numpy as np
import pytest

from anisoheat.constants import C, HBAR, K_B, SIGMA_SB
from anisoheat.geometry import Spheroid
from anisoheat.materials import SIC
from anisoheat.spectral import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    ConvergenceError,
    PlanckWeight,
    QuadratureSpec,
    integrate,
    planck_difference,
)
from anisoheat.transfer import Pair, closed_form_kernel, integrate_kernel, transfer_general


def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    assert np.allclose(NODES[1::2], x, atol=1e-15)
    assert np.allclose(GAUSS_WEIGHTS[1::2], w, atol=1e-15)
    assert np.all(GAUSS_WEIGHTS[::2] == 0)
    assert math.fsum(KRONROD_WEIGHTS) == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_polynomial_exactness(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert float(np.dot(KRONROD_WEIGHTS, NODES**deg)) == pytest.approx(exact, abs=1e-14)


def test_planck_examples():
    T = 300.0
    w = PlanckWeight(T, T)
    om = np.geomspace(1e11, 1e16, 50)
    assert np.all(planck_difference(w, om) == 0.0)
    classical = planck_difference(PlanckWeight(T), 1e-6 * K_B * T / HBAR)
    assert classical == pytest.approx(K_B * T / HBAR, rel=1e-5)
    grid = np.geomspace(1e-3, 40, 4000) * K_B * T / HBAR
    peak = np.max(planck_difference(PlanckWeight(T), grid))
    assert planck_difference(PlanckWeight(T), 40 * K_B * T / HBAR) < 1e-15 * peak


def test_planck_antisymmetric():
    om = np.geomspace(1e12, 1e15, 30)
    a = planck_difference(PlanckWeight(300.0, 100.0), om)
    b = planck_difference(PlanckWeight(100.0, 300.0), om)
    assert np.array_equal(a, -b)


def test_planck_validation():
    with pytest.raises(ValueError):
        PlanckWeight(-1.0)
    with pytest.raises(ValueError):
        planck_difference(PlanckWeight(300.0), 0.0)


def test_spec_validation():
    for bad in (dict(rel_tol=0.0), dict(rel_tol=0.1), dict(omega_max_factor=10), dict(panel_budget=0)):
        with pytest.raises(ValueError):
            QuadratureSpec(**bad)


def test_zero_kernel():
    r = integrate(lambda w: np.zeros_like(w), QuadratureSpec(), (0.0, 1.0))
    assert r.value == 0.0


def test_smooth_integrals():
    r = integrate(np.sin, QuadratureSpec(rel_tol=1e-12), (0.0, math.pi))
    assert r.value == pytest.approx(2.0, rel=1e-13)
    r = integrate(lambda x: np.exp(-x), QuadratureSpec(rel_tol=1e-10), (0.0, 50.0))
    assert r.value == pytest.approx(1 - math.exp(-50), rel=1e-10)


def test_vector_integrand_componentwise():
    spec = QuadratureSpec(rel_tol=1e-10)
    r = integrate(lambda x: np.array([x**2, np.cos(x)]), spec, (0.0, 2.0))
    assert r.value[0] == pytest.approx(8 / 3, rel=1e-12)
    assert r.value[1] == pytest.approx(math.sin(2.0), rel=1e-10)


def stefan_boltzmann_kernel(T):
    w = PlanckWeight(T)
    # hbar/(4 pi^3 c^2) omega^3 n(omega): hemispherical radiance, integrates to sigma T^4 / pi
    return lambda om: HBAR / (4 * math.pi**3 * C**2) * om**2 * planck_difference(w, om)


@pytest.mark.parametrize("T", [3.0, 300.0, 5000.0])
def test_stefan_boltzmann(T):
    spec = QuadratureSpec(rel_tol=1e-8)
    r = integrate(stefan_boltzmann_kernel(T), spec, (0.0, spec.omega_max(T)))
    assert r.value == pytest.approx(SIGMA_SB * T**4 / math.pi, rel=1e-6)


def test_linearity():
    spec = QuadratureSpec(rel_tol=1e-8)
    k1 = stefan_boltzmann_kernel(300.0)
    s = Spheroid(5e-9, 1e-9, SIC)
    k2 = closed_form_kernel(Pair(s, s, 1e-7))
    iv = (0.0, spec.omega_max(300.0))
    seeds = (1.5e14, 1.78e14)
    i1 = integrate(k1, spec, iv, seeds, 1e12).value
    i2 = integrate(k2, spec, iv, seeds, 1e12).value
    a, b = 2.5, -0.7
    i12 = integrate(lambda w: a * k1(w) + b * k2(w), spec, iv, seeds, 1e12).value
    assert i12 == pytest.approx(a * i1 + b * i2, rel=3 * spec.rel_tol, abs=3 * spec.rel_tol * abs(a * i1))


def _sic_pair():
    s1 = Spheroid.from_aspect(0.2, 5.2e-25, SIC)
    return Pair(s1, s1, 2e-6)


def test_cutoff_insensitive():
    p = _sic_pair()
    spec = QuadratureSpec()
    a = transfer_general(p, spec)
    b = transfer_general(p, QuadratureSpec(omega_max_factor=80))
    assert abs(a.value - b.value) < spec.rel_tol * abs(a.value)


def test_determinism():
    p = _sic_pair()
    a = transfer_general(p).value
    b = transfer_general(p).value
    assert a == b


def test_convergence_error_carries_estimate():
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: 1.0 / np.sqrt(np.abs(x - 0.3) + 1e-14), QuadratureSpec(panel_budget=40), (0.0, 1.0))
    err = info.value
    assert err.estimate is not None and err.error > 0 and err.n_panels <= 40


def test_seeding_agrees_and_is_not_more_expensive():
    p = _sic_pair()
    k = closed_form_kernel(p)
    seeded = integrate_kernel(k, (p.s1, p.s2), 300.0, QuadratureSpec())
    plain = integrate_kernel(k, (p.s1, p.s2), 300.0, QuadratureSpec(seed_points=()))
    tot_s, tot_p = float(np.sum(seeded.value)), float(np.sum(plain.value))
    assert tot_s == pytest.approx(tot_p, rel=10 * 1e-8)
    assert seeded.n_evals <= plain.n_evals


def test_breakpoints_cover_interval():
    r = integrate(np.cos, QuadratureSpec(), (0.0, 3.0), seeds=(1.0,), seed_width=0.01)
    bp = np.asarray(r.breakpoints)
    assert bp[0] == 0.0 and bp[-1] == 3.0 and np.all(np.diff(bp) > 0)
    assert 1.0 in bp
