import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from seasurrogate.errors import ConfigError, DomainError
from seasurrogate.spectra import (
    DEEP,
    PEAK_TO_MEAN_RATIO,
    SeaStateParams,
    SpectralDiscretization,
    cumulative_energy_fraction,
    discretize_spectrum,
    energy_band,
    mean_period_from_peak,
    moment_mean_period,
    peak_enhancement_exponent,
    peak_to_mean_ratio,
    pm_spectral_density,
    solve_dispersion,
    unit_peak_period,
)

CATAMARAN = SeaStateParams(hs=0.3, tp=1.48)
DTMB = SeaStateParams(hs=10.66, tp=13.4, heading=math.radians(30))


def quad_moment(params, order=0):
    f = lambda w: w**order * float(pm_spectral_density(w, params))
    wp = 4.83967 / params.t1
    body = integrate.quad(f, 0.05 * wp, 5 * wp, limit=400, epsabs=0, epsrel=1e-13)[0]
    tail = integrate.quad(f, 5 * wp, np.inf, limit=400, epsabs=0, epsrel=1e-13)[0]
    return body + tail


@pytest.mark.parametrize("params", [CATAMARAN, DTMB, SeaStateParams(hs=1.0, t1=1.0)])
def test_zeroth_moment_is_hs_squared_over_16(params):
    assert quad_moment(params) == pytest.approx(params.hs**2 / 16, rel=1e-9)


def test_peak_location_matches_numerical_maximum():
    p = SeaStateParams(hs=1.0, t1=1.0)
    res = optimize.minimize_scalar(lambda w: -float(pm_spectral_density(w, p)), bounds=(2, 8),
                                   method="bounded", options={"xatol": 1e-10})
    assert res.x == pytest.approx(4.83967, abs=1e-4)
    assert 2 * math.pi / res.x == pytest.approx(unit_peak_period(), rel=1e-6)
    assert unit_peak_period() == pytest.approx((5 / 1.76) ** 0.25, rel=1e-14)


def test_peak_to_mean_ratio_from_quadrature():
    # independent oracle: peak of the t1 = 1 spectrum times m1 / (2 pi m0)
    p = SeaStateParams(hs=1.0, t1=1.0)
    res = optimize.minimize_scalar(lambda w: -float(pm_spectral_density(w, p)), bounds=(2, 8),
                                   method="bounded", options={"xatol": 1e-10})
    oracle = (2 * math.pi / res.x) * quad_moment(p, 1) / (2 * math.pi * quad_moment(p, 0))
    assert PEAK_TO_MEAN_RATIO == pytest.approx(oracle, rel=1e-8)
    assert peak_to_mean_ratio() == pytest.approx(PEAK_TO_MEAN_RATIO, rel=1e-12)


def test_moment_mean_period_is_slightly_longer_than_t1():
    p = SeaStateParams(hs=2.0, t1=5.0)
    t1_from_moments = 2 * math.pi * quad_moment(p, 0) / quad_moment(p, 1)
    assert moment_mean_period(p) == pytest.approx(t1_from_moments, rel=1e-9)
    assert t1_from_moments / 5.0 == pytest.approx(1.0019661, abs=1e-6)
    # so a spectrum specified by tp peaks 0.2% above tp
    q = SeaStateParams(hs=1.0, tp=7.0)
    res = optimize.minimize_scalar(lambda w: -float(pm_spectral_density(w, q)), bounds=(0.5, 2.0),
                                   method="bounded", options={"xatol": 1e-10})
    assert 2 * math.pi / res.x == pytest.approx(7.0 * 1.0019661, rel=1e-6)


def test_tp_and_t1_are_consistent():
    assert CATAMARAN.t1 == pytest.approx(1.48 / PEAK_TO_MEAN_RATIO)
    assert mean_period_from_peak(13.4) == pytest.approx(DTMB.t1)
    assert SeaStateParams(hs=1, t1=2.0).tp == pytest.approx(2.0 * PEAK_TO_MEAN_RATIO)


def test_cumulative_fraction_matches_quadrature():
    p = CATAMARAN
    m0 = p.hs**2 / 16
    for w in (3.0, 4.2, 6.0, 9.0):
        part = integrate.quad(lambda x: float(pm_spectral_density(x, p)), 1e-3, w, epsabs=0, epsrel=1e-12)[0]
        assert cumulative_energy_fraction(w, p) == pytest.approx(part / m0, rel=1e-8, abs=1e-14)


def test_energy_band_holds_requested_fraction():
    lo, hi = energy_band(DTMB, 0.999)
    frac = np.diff(cumulative_energy_fraction([lo, hi], DTMB))[0]
    assert frac == pytest.approx(0.999, abs=1e-12)
    with pytest.raises(DomainError):
        energy_band(DTMB, 1.0)


def test_peak_enhancement():
    p = SeaStateParams(hs=1.0, t1=2.0, gamma=3.3)
    base = SeaStateParams(hs=1.0, t1=2.0)
    w0 = 1.0 / (0.191 * 2.0)
    assert peak_enhancement_exponent(w0, p) == 1.0
    assert pm_spectral_density(w0, p) == pytest.approx(3.3 * pm_spectral_density(w0, base), rel=1e-12)
    assert pm_spectral_density(3.0, base) == pm_spectral_density(3.0, SeaStateParams(hs=1.0, t1=2.0, gamma=1.0))
    y = peak_enhancement_exponent(np.linspace(0.5, 10, 50), p)
    assert np.all((y > 0) & (y <= 1))


def test_sigma_switches_at_524_over_t1():
    p = SeaStateParams(hs=1.0, t1=1.0, gamma=2.0)
    for w, sigma in ((5.24, 0.07), (5.0, 0.07), (6.0, 0.09)):
        expected = math.exp(-(((0.191 * w - 1.0) / (math.sqrt(2) * sigma)) ** 2))
        assert peak_enhancement_exponent(w, p) == pytest.approx(expected, rel=1e-12)


def test_invalid_sea_states():
    with pytest.raises(DomainError):
        SeaStateParams(hs=-1, tp=2)
    with pytest.raises(ConfigError):
        SeaStateParams(hs=1)
    with pytest.raises(ConfigError):
        SeaStateParams(hs=1, tp=2, t1=1)
    with pytest.raises(ConfigError, match="hs"):
        SeaStateParams.from_dict({"tp": 3})
    with pytest.raises(ConfigError, match="unknown"):
        SeaStateParams.from_dict({"hs": 1, "tp": 3, "colour": "blue"})
    with pytest.raises(DomainError):
        pm_spectral_density(0.0, CATAMARAN)


def test_from_dict_and_effective_depth():
    p = SeaStateParams.from_dict({"hs": 10.66, "tp": 13.4, "heading_deg": 30, "depth": 50})
    assert p.heading == pytest.approx(math.radians(30))
    assert p.effective_depth == 50
    assert SeaStateParams.from_dict({"hs": 1, "tp": 2, "depth": 1e4}).effective_depth == DEEP


def bisect_k(w, h, g=9.81):
    return optimize.bisect(lambda k: g * k * math.tanh(k * h) - w * w, 1e-12, 10 * w * w / g + 10 * w / math.sqrt(g * h),
                           xtol=1e-15, rtol=1e-15, maxiter=500)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.1, 5000.0))
def test_dispersion_matches_bisection(w, h):
    assert solve_dispersion(w, h) == pytest.approx(bisect_k(w, h), rel=1e-10)


def test_dispersion_limits_and_vectorisation():
    w = np.array([0.3, 1.0, 3.0])
    assert np.allclose(solve_dispersion(w, math.inf), w**2 / 9.81, rtol=0, atol=0)
    assert solve_dispersion(0.01, 1.0) == pytest.approx(0.01 / math.sqrt(9.81), rel=1e-4)
    k = solve_dispersion(w, 20.0)
    assert np.allclose(9.81 * k * np.tanh(k * 20.0), w**2, rtol=1e-13)
    with pytest.raises(DomainError):
        solve_dispersion(1.0, -1.0)


@pytest.mark.parametrize("params", [CATAMARAN, DTMB])
def test_discretized_energy(params):
    d = discretize_spectrum(params, 200, seed=3)
    assert d.energy == pytest.approx(params.hs**2 / 16, rel=0.02)


def test_discretization_layout():
    d = discretize_spectrum(CATAMARAN, 50, seed=7)
    lo, hi = energy_band(CATAMARAN)
    edges = lo + np.arange(51) * (hi - lo) / 50
    assert np.all((d.omegas >= edges[:-1]) & (d.omegas < edges[1:]))
    assert np.all((d.phases >= -math.pi) & (d.phases < math.pi))
    assert np.allclose(d.amplitudes, np.sqrt(2 * pm_spectral_density(d.omegas, CATAMARAN) * d.delta_omegas))
    assert np.allclose(d.celerities, d.omegas / d.wavenumbers)


def test_discretization_is_seeded():
    a = discretize_spectrum(CATAMARAN, 20, seed=1)
    b = discretize_spectrum(CATAMARAN, 20, seed=1)
    c = discretize_spectrum(CATAMARAN, 20, seed=2)
    assert np.array_equal(a.phases, b.phases) and np.array_equal(a.omegas, b.omegas)
    assert not np.array_equal(a.phases, c.phases)


def test_narrow_band_warns():
    with pytest.warns(UserWarning, match="spectral energy"):
        discretize_spectrum(CATAMARAN, 10, omega_min=4.0, omega_max=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        discretize_spectrum(CATAMARAN, 10)
    with pytest.raises(ConfigError):
        discretize_spectrum(CATAMARAN, 10, omega_min=5.0, omega_max=4.0)


def test_discretization_round_trip(tmp_path):
    d = discretize_spectrum(DTMB, 30, seed=5)
    d.save(tmp_path / "d.bin")
    e = SpectralDiscretization.load(tmp_path / "d.bin")
    for name in ("omegas", "amplitudes", "phases", "wavenumbers"):
        assert np.array_equal(getattr(d, name), getattr(e, name))
    assert e.seed == 5
    d.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "omega,domega,amplitude,phase,wavenumber,celerity"
