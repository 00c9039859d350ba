import math

import numpy as np
import pytest

from seasurrogate.errors import ConfigError, DomainError
from seasurrogate.kinematics import (
    StokesWave,
    WaveField,
    acceleration,
    dynamic_pressure,
    elevation,
    probe_series,
    surface_kinematics,
    velocity,
)
from seasurrogate.spectra import SeaStateParams, discretize_spectrum

CATAMARAN = SeaStateParams(hs=0.3, tp=1.48)


def fd(f, t, h):
    """Fourth-order central difference."""
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.fixture(params=[math.inf, 3.0], ids=["deep", "finite"])
def field(request):
    return WaveField(discretize_spectrum(CATAMARAN, 200, seed=4), depth=request.param)


@pytest.fixture
def points(field):
    gen = np.random.default_rng(0)
    h = min(field.depth, 3.0)
    return gen.uniform(-20, 20, 100), gen.uniform(-h, 0, 100), gen.uniform(0, 500, 100)


def test_acceleration_is_time_derivative_of_velocity(field, points):
    x1, x2, t = points
    for j in range(2):
        num = fd(lambda s: velocity(field, x1, x2, s)[j], t, 1e-3)
        assert rel(acceleration(field, x1, x2, t)[j], num) < 1e-6


def test_surface_vertical_velocity_is_time_derivative_of_elevation(field, points):
    x1, _, t = points
    num = fd(lambda s: elevation(field, x1, s), t, 1e-3)
    assert rel(velocity(field, x1, 0.0, t)[1], num) < 1e-6


def test_bottom_vertical_velocity_is_exactly_zero():
    f = WaveField(discretize_spectrum(CATAMARAN, 200, seed=4), depth=3.0)
    x1 = np.linspace(-10, 10, 50)
    _, v = velocity(f, x1, -3.0, x1 + 7.0)
    _, dv = acceleration(f, x1, -3.0, x1 + 7.0)
    assert np.all(v == 0.0) and np.all(dv == 0.0)


def test_deep_profiles_stay_finite():
    dtmb = SeaStateParams(hs=10.66, tp=13.4)
    f = WaveField(discretize_spectrum(dtmb, 200, seed=1), depth=math.inf)
    u, v = velocity(f, 0.0, -5000.0, 3.0)
    assert np.isfinite(u) and abs(u) < 1e-12 and abs(v) < 1e-12


def test_pressure_forms():
    d = discretize_spectrum(CATAMARAN, 50, seed=2)
    deep = WaveField(d)
    x1, t = np.linspace(0, 5, 20), np.linspace(0, 9, 20)
    zeta = elevation(deep, x1, t)
    rho_g = deep.density * deep.gravity
    # in deep water both denominators coincide and the surface value is rho g zeta
    assert np.allclose(dynamic_pressure(deep, x1, 0.0, t), rho_g * zeta, rtol=1e-12, atol=1e-9)
    assert np.allclose(dynamic_pressure(deep, x1, 0.0, t, consistent=True), rho_g * zeta, rtol=1e-12, atol=1e-9)
    shallow = WaveField(d, depth=0.5)
    zeta = elevation(shallow, x1, t)
    assert np.allclose(dynamic_pressure(shallow, x1, 0.0, t, consistent=True), rho_g * zeta, atol=1e-9)
    assert not np.allclose(dynamic_pressure(shallow, x1, 0.0, t), rho_g * zeta, atol=1e-6)


def test_single_component_by_hand():
    d = discretize_spectrum(CATAMARAN, 1, seed=0)
    f = WaveField(d)
    a, w, k, e = d.amplitudes[0], d.omegas[0], d.wavenumbers[0], d.phases[0]
    assert elevation(f, 1.3, 2.0) == pytest.approx(a * math.cos(k * 1.3 - w * 2.0 + e), abs=1e-15)
    u, v = velocity(f, 1.3, -0.4, 2.0)
    th = k * 1.3 - w * 2.0 + e
    assert u == pytest.approx(a * w * math.exp(-0.4 * k) * math.cos(th), rel=1e-12)
    assert v == pytest.approx(a * w * math.exp(-0.4 * k) * math.sin(th), rel=1e-12)


def test_surface_kinematics_matches_direct_sums(field):
    t = np.linspace(0, 40, 300)
    zeta, v, dv = surface_kinematics(field, 2.5, t)
    assert np.allclose(zeta, elevation(field, 2.5, t), atol=1e-12)
    assert np.allclose(v, velocity(field, 2.5, 0.0, t)[1], atol=1e-12)
    assert np.allclose(dv, acceleration(field, 2.5, 0.0, t)[1], atol=1e-11)


def test_heading_projection_and_probes():
    d = discretize_spectrum(CATAMARAN, 30, seed=9)
    f = WaveField(d, heading=math.radians(30))
    assert f.project(2.0, 1.0) == pytest.approx(2 * math.cos(math.radians(30)) + math.sin(math.radians(30)))
    (s,) = probe_series(f, [(2.0, 1.0)], 1.0, 0.1, 50)
    assert np.allclose(s.values, elevation(f, f.project(2.0, 1.0), s.times), atol=1e-12)
    assert s.times[0] == 1.0
    with pytest.raises(ConfigError):
        probe_series(f, [], 0.0, 0.1, 10)
    with pytest.raises(DomainError):
        probe_series(f, [(0, 0)], 0.0, 0.0, 10)


def test_below_bed_raises():
    f = WaveField(discretize_spectrum(CATAMARAN, 5, seed=1), depth=2.0)
    with pytest.raises(DomainError):
        velocity(f, 0.0, -2.5, 0.0)
    with pytest.raises(DomainError):
        WaveField(f.discretization, depth=-1.0)


def test_stokes_wave():
    w = StokesWave(0.2, 2.0)
    k, a = w.wavenumber, 0.2
    assert w.omega**2 == pytest.approx(9.81 * k * (1 + (k * a) ** 2), rel=1e-12)
    zeta, v, dv = w.surface(0.0, np.array([0.0]))
    assert zeta[0] == pytest.approx(a * (1 + 0.5 * k * a + 0.375 * (k * a) ** 2))
    t = np.linspace(0, 4, 200)
    _, v, dv = w.surface(0.3, t)
    assert np.allclose(dv, fd(lambda s: w.surface(0.3, s)[1], t, 1e-3), atol=1e-9)
    lin = StokesWave(0.2, 2.0, order=1)
    assert lin.wavenumber == pytest.approx(lin.omega**2 / 9.81)
    assert surface_kinematics(w, 0.3, t)[0] == pytest.approx(w.surface(0.3, t)[0])
    with pytest.raises(DomainError):
        StokesWave(0.5, 2.0)
    with pytest.raises(ConfigError):
        StokesWave(0.1, 2.0, order=5)
