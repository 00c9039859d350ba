import math
from dataclasses import replace

import numpy as np
import pytest

from seasurrogate import kernels
from seasurrogate.errors import ConfigError, DivergenceError
from seasurrogate.kinematics import StokesWave, WaveField
from seasurrogate.oracle import (
    DOFS,
    VesselParams,
    excitation,
    integrate,
    load_preset,
    preset_names,
)
from seasurrogate.spectra import SeaStateParams, discretize_spectrum


def linear_vessel(**kw):
    base = dict(name="linear", dofs=("heave",), mass=(2.0, 1.0, 1.0), damping=(0.4, 0.0, 0.0),
                stiffness=(8.0, 1.0, 1.0), excitation={"heave": _exc((1.5, 0.3, -0.1), ((0.0, 0.0, 1.0),))},
                dt=0.01)
    base.update(kw)
    return VesselParams(**base)


def _exc(coefficients, probes):
    from seasurrogate.oracle import Excitation

    return Excitation(coefficients, probes)


def energy(states, v):
    x, u = states[:, :3], states[:, 3:]
    m, k, mu = (np.array(a) for a in (v.mass, v.stiffness, v.cubic))
    e = 0.5 * (m * u * u).sum(1) + 0.5 * (k * x * x).sum(1) + 0.25 * (k * mu * x**4).sum(1)
    return e + v.coupling * x[:, 0] * x[:, 1]


def steady_amplitude(series, dt, period):
    n = int(round(period / dt))
    tail = series[-4 * n:]
    return 0.5 * (tail.max() - tail.min())


def test_linear_limit_matches_transfer_function(backend):
    v = linear_vessel()
    wave = StokesWave(0.01, 2.5, order=1)
    w = wave.omega
    rec = integrate(wave, v, 0.0, v.dt, 12000)
    cz, cv, ca = v.excitation["heave"].coefficients
    force = 0.01 * math.hypot(cz - ca * w * w, cv * w)
    m, b, k = v.mass[0], v.damping[0], v.stiffness[0]
    expected = force / math.hypot(k - m * w * w, b * w)
    assert steady_amplitude(rec.heave, v.dt, 2.5) == pytest.approx(expected, rel=0.01)


def test_prescribed_forcing_transfer(backend):
    v = linear_vessel()
    steps, dt, w = 20000, 0.01, 1.7
    t = 0.5 * dt * np.arange(2 * steps - 1)
    f = np.zeros((t.size, 3))
    f[:, 0] = np.cos(w * t)
    rec = integrate(None, v, 0.0, dt, steps, forcing=f)
    expected = 1.0 / math.hypot(8.0 - 2.0 * w * w, 0.4 * w)
    assert steady_amplitude(rec.heave, dt, 2 * math.pi / w) == pytest.approx(expected, rel=1e-3)


def test_undamped_energy_is_conserved(backend):
    v = VesselParams(name="free", dofs=DOFS, mass=(1.0, 2.0, 1.5), damping=(0.0, 0.0, 0.0),
                     stiffness=(4.0, 3.0, 1.0), cubic=(0.5, 1.0, 2.0), coupling=0.3,
                     excitation={d: _exc((0, 0, 0), ((0, 0, 1),)) for d in DOFS})
    period = min(v.natural_periods.values())
    dt = period / 200
    steps = 10001
    f = np.zeros((2 * steps - 1, 3))
    rec = integrate(None, v, 0.0, dt, steps, initial=(0.3, -0.2, 0.4, 0.0, 0.1, 0.0), forcing=f)
    e = energy(np.column_stack([rec.as_array(), rec.heave_rate, rec.pitch_rate, rec.roll_rate]), v)
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-6


def test_dt_must_resolve_natural_period():
    v = load_preset("catamaran-2dof")
    t_min = min(v.natural_periods.values())
    with pytest.raises(ConfigError, match="natural period"):
        integrate(None, v, 0.0, t_min / 10, 10, forcing=np.zeros((19, 3)))
    with pytest.raises(ConfigError):
        integrate(None, v, 0.0, v.dt, 10, forcing=np.zeros((5, 3)))


def test_divergence_is_reported():
    v = replace(load_preset("catamaran-2dof"), cubic=(-50.0, 0.0, 0.0))
    with pytest.raises(DivergenceError) as info:
        integrate(None, v, 0.0, v.dt, 2000, initial=(1.0, 0, 0, 0, 0, 0), forcing=np.zeros((3999, 3)))
    assert info.value.step is not None and info.value.step > 0


def test_backends_agree():
    if len(kernels.available()) < 2:
        pytest.skip("compiled kernels not built")
    v = load_preset("catamaran-2dof")
    sea = SeaStateParams.from_dict(v.sea_state)
    f = WaveField.from_sea_state(discretize_spectrum(sea, 100, seed=2), sea)
    previous = kernels.backend().NAME
    try:
        out = {}
        for name in kernels.available():
            kernels.use(name)
            out[name] = integrate(f, v, 0.0, v.dt, 800).as_array()
    finally:
        kernels.use(previous)
    a, b = out.values()
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("name", ["catamaran-2dof", "dtmb-3dof"])
def test_presets_load_and_run(name):
    assert name in preset_names()
    v = load_preset(name)
    sea = SeaStateParams.from_dict(v.sea_state)
    f = WaveField.from_sea_state(discretize_spectrum(sea, 100, seed=2), sea)
    rec = integrate(f, v, 0.0, v.dt, 1500)
    for d in DOFS:
        series = getattr(rec, d)
        assert np.all(np.isfinite(series))
        assert (np.std(series) > 0) == (d in v.dofs)
    forces = excitation(f, v, np.array([0.0, 1.0]))
    assert forces[0].shape == (2,)


def test_locked_dof_stays_at_rest():
    v = load_preset("catamaran-2dof")
    f = np.ones((2 * 50 - 1, 3))
    rec = integrate(None, v, 0.0, v.dt, 50, initial=(0.1, 0.1, 0.5, 0, 0, 1.0), forcing=f)
    assert np.all(rec.roll == 0.0) and np.all(rec.roll_rate == 0.0)


def test_unknown_preset_and_bad_params(tmp_path):
    with pytest.raises(ConfigError, match="unknown vessel preset"):
        load_preset("no-such-boat")
    with pytest.raises(ConfigError):
        linear_vessel(stiffness=(0.0, 1.0, 1.0))
    with pytest.raises(ConfigError):
        linear_vessel(dofs=("heave", "pitch"))


def test_motion_csv(tmp_path):
    v = linear_vessel()
    rec = integrate(StokesWave(0.01, 2.0, order=1), v, 0.0, v.dt, 20)
    rec.to_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "time,heave,pitch,roll"
