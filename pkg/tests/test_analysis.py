import csv
import io
import json
import math

import numpy as np
import pytest

from anisoheat.analysis import (
    DEFAULT_VOLUME,
    TOL_FLAG,
    SweepResult,
    SweepRow,
    band_min_abs_eps,
    beta_sweep,
    detuned_switch,
    fit_power_law,
    local_slopes,
    macroscopic_emission_ratio,
    metallic_scaling_probe,
    micro_emission_ratio,
    parallel_pair,
    prolate_oblate_switch,
    quality_sweep,
    resonance_overlap,
    sphere_normalized_transfer,
    switch_quality,
)
from anisoheat.constants import thermal_wavelength
from anisoheat.geometry import Spheroid
from anisoheat.materials import DRUDE_PROBE, SIC, detune
from anisoheat.spectral import QuadratureSpec
from anisoheat.transfer import Pair

LT = thermal_wavelength(300.0)


def test_sweep_csv_and_sorting():
    rows = [SweepRow(0.5, {"q": 2.0}, 1e-9), SweepRow(0.1, {"q": 1.0}, 0.0, ("a", "b"))]
    t = SweepResult("aspect", "-", ("q",), rows)
    assert t.values.tolist() == [0.1, 0.5]
    parsed = list(csv.reader(io.StringIO(t.to_csv())))
    assert parsed[0] == ["aspect", "q", "error", "flags"]
    assert parsed[1] == ["0.1", "1.0", "0.0", "a;b"]
    assert float(parsed[2][2]) == 1e-9
    d = json.loads(t.to_json())
    assert d["rows"][0]["flags"] == ["a", "b"]


def test_normalized_transfer_unit_at_sphere():
    t = sphere_normalized_transfer([1.0, 0.3])
    assert t.column("ratio")[-1] == 1.0
    assert t.column("ratio")[0] > 1


def test_normalized_transfer_d_invariant_in_regime():
    a = sphere_normalized_transfer([0.1], d=50 * LT, regime="exact").column("ratio")[0]
    b = sphere_normalized_transfer([0.1], d=100 * LT, regime="exact").column("ratio")[0]
    assert a == pytest.approx(b, rel=0.01)
    far = sphere_normalized_transfer([0.1], regime="far").column("ratio")[0]
    assert a == pytest.approx(far, rel=0.01)


def test_ratios_volume_independent():
    a = sphere_normalized_transfer([0.2], volume=DEFAULT_VOLUME, regime="near").column("ratio")[0]
    b = sphere_normalized_transfer([0.2], volume=8 * DEFAULT_VOLUME, regime="near").column("ratio")[0]
    assert a == pytest.approx(b, rel=1e-9)


def test_regime_validation():
    with pytest.raises(ValueError):
        sphere_normalized_transfer([0.5], regime="middle")
    with pytest.raises(ValueError):
        sphere_normalized_transfer([0.5], regime="exact")


def test_quality_of_spheres_is_one():
    s = Spheroid.from_aspect(1.0, DEFAULT_VOLUME, SIC)
    for r in ("near", "far"):
        assert switch_quality(Pair(s, s, LT), r).Q == 1.0


def test_quality_at_least_one_and_extrema():
    t = quality_sweep([0.1, 0.3, 0.6])
    for q in ("Q_near", "Q_far"):
        assert np.all(t.column(q) >= 1)
    s = Spheroid.from_aspect(0.3, DEFAULT_VOLUME, SIC)
    q = switch_quality(Pair(s, s, LT), "far")
    assert q.beta_max == pytest.approx(0.0, abs=1e-6)
    assert q.beta_min == pytest.approx(math.pi / 2, abs=1e-6)


def test_quality_rows_flag_loose_errors():
    t = quality_sweep([0.2])
    r = t.rows[0]
    rel = QuadratureSpec().rel_tol
    assert (r.error <= rel * min(r.quantities.values())) or TOL_FLAG in r.flags


def test_zero_detuning_reduces_to_identical_pair():
    t = detuned_switch((0.2, 0.2), (1.0, 1.0), regime="far")
    s = Spheroid.from_aspect(0.2, DEFAULT_VOLUME, SIC)
    q = switch_quality(parallel_pair(s, s, LT), "far")
    assert t.metadata["Q"] == pytest.approx(q.Q, rel=1e-12)


def test_overlap_diagnostic():
    s1 = Spheroid.from_aspect(0.25, DEFAULT_VOLUME, detune(SIC, 1.05))
    s2 = Spheroid.from_aspect(0.2, DEFAULT_VOLUME, detune(SIC, 1.10))
    ov = resonance_overlap(s1, s2)
    assert ov.par_separation < 2 * ov.linewidth
    assert ov.cross_separation > 2 * ov.linewidth


def test_prolate_oblate_shape():
    t = prolate_oblate_switch(regime="near")
    assert t.metadata["beta_max"] == pytest.approx(math.pi / 2, abs=1e-6)
    assert t.metadata["Q"] > 1
    assert t.parameter == "beta" and len(t.rows) == 181


def test_spheres_flat_profile():
    s = Spheroid.from_aspect(1.0, DEFAULT_VOLUME, SIC)
    t = beta_sweep(Pair(s, s, LT), "near")
    h = t.column("H")
    assert np.all(h == h[0])


def test_emission_ratios():
    a = [1.0, 0.3, 0.1, 0.03]
    macro = macroscopic_emission_ratio(a)
    micro = micro_emission_ratio(a)
    assert macro.column("macro")[-1] == pytest.approx(1.0, rel=1e-12)
    assert micro.column("micro")[-1] == 1.0
    assert np.all(np.diff(micro.column("micro")) < 0)
    assert np.all(macro.column("macro")[:-1] < micro.column("micro")[:-1])


def test_fit_helpers():
    x = np.geomspace(1, 100, 20)
    assert fit_power_law(x, 3 * x**2.5)[0] == pytest.approx(2.5, rel=1e-12)
    assert np.allclose(local_slopes(x, x**-1.5), -1.5)


def test_jobs_do_not_change_results():
    a = quality_sweep([0.1, 0.4], jobs=1).to_csv()
    b = quality_sweep([0.1, 0.4], jobs=2).to_csv()
    assert a == b


def test_probe_rejects_dielectric():
    rep = metallic_scaling_probe(SIC, np.geomspace(2, 1e3, 12))
    assert not rep.ok and "no power-law window" in rep.message
    assert band_min_abs_eps(SIC, 300.0) < 1


def test_probe_window_small():
    rep = metallic_scaling_probe(DRUDE_PROBE, np.geomspace(2, 1e4, 40))
    assert rep.ok
    assert rep.window[0] >= 2 and rep.window[1] <= 1e4
    assert abs(rep.exponent - 8) <= 0.5
