import math

import numpy as np
import pytest

from gradcheck import functional_gradient_error
from seasurrogate.errors import ConfigError, ShapeError
from seasurrogate.functional import (
    FunctionalConfig,
    FunctionalNetParams,
    FunctionalSurrogate,
    finite_memory_witness,
    fit_windows,
    functional_forward,
    init_params,
    predict_motion_series,
    train_functional,
    window,
    window_matrix,
)
from seasurrogate.harness.training import evaluate, load_checkpoint
from seasurrogate.kinematics import ProbeSeries, WaveField
from seasurrogate.oracle import load_preset
from seasurrogate.spectra import SeaStateParams, discretize_spectrum


def ramp(n=11, dt=0.5):
    return ProbeSeries((0.0, 0.0), dt, np.arange(n, dtype=float))


def test_window_samples_and_zero_extension():
    s = ramp()  # value equals 2 * time
    w = window(s, 2.0, 1.0, 4)
    assert np.allclose(w.values, 2 * np.linspace(1.0, 3.0, 5))
    edge = window(s, 0.25, 1.0, 4)
    assert np.allclose(edge.values, [0.0, 0.0, 0.5, 1.5, 2.5])
    assert np.allclose(window(s, 100.0, 1.0, 2).values, 0.0)
    with pytest.raises(ConfigError):
        window(s, 1.0, 0.0, 3)


def test_causal_window_ends_at_centre():
    s = ramp()
    u = window_matrix(s, 1.0, 4, causal=True, centers=[4.0])
    assert np.allclose(u[0], 2 * np.linspace(2.0, 4.0, 5))
    two_sided = window_matrix(s, 1.0, 4, causal=False, centers=[2.0])
    assert np.allclose(two_sided[0], window(s, 2.0, 1.0, 4).values)


def test_forward_by_hand():
    p = FunctionalNetParams(c=[[2.0, -1.0]], xi=[[1.0, 0.0], [0.5, 0.5]], theta=[0.0, -1.0], half_width=1.0)
    u = np.array([0.4, 2.0])
    s1, s2 = 1 / (1 + math.exp(-0.4)), 1 / (1 + math.exp(-(0.2 + 1.0 - 1.0)))
    assert functional_forward(p, u)[0] == pytest.approx(2 * s1 - s2, rel=1e-14)
    with pytest.raises(ShapeError):
        functional_forward(p, np.ones(3))
    with pytest.raises(ShapeError):
        FunctionalNetParams(c=[[1.0]], xi=[[1.0, 0.0], [0.5, 0.5]], theta=[0.0, 0.0], half_width=1.0)


def test_sliding_prediction_composes_window_and_forward():
    gen = np.random.default_rng(0)
    p = FunctionalNetParams(gen.normal(size=(2, 6)), gen.normal(size=(6, 5)), gen.normal(size=6), 1.0,
                            causal=False)
    s = ProbeSeries((0.0, 0.0), 0.25, gen.normal(size=40))
    out = predict_motion_series(p, s)
    for i in (0, 7, 39):
        assert np.allclose(out[i], functional_forward(p, window(s, s.times[i], 1.0, 4)), atol=1e-13)


def test_shift_covariance():
    gen = np.random.default_rng(1)
    p = FunctionalNetParams(gen.normal(size=(1, 5)), gen.normal(size=(5, 9)), gen.normal(size=5), 1.0)
    values = gen.normal(size=60)
    a = predict_motion_series(p, ProbeSeries((0, 0), 0.25, values))
    b = predict_motion_series(p, ProbeSeries((0, 0), 0.25, np.concatenate([np.zeros(4), values])))
    assert np.allclose(a, b[4:], atol=1e-13)


def test_gradients_match_central_differences():
    for seed in range(3):
        assert functional_gradient_error(seed) < 1e-5


def test_planted_network_is_recovered():
    gen = np.random.default_rng(0)
    teacher = FunctionalNetParams(gen.normal(size=(1, 3)), gen.normal(size=(3, 5)), gen.normal(size=3), 1.0)
    windows = gen.normal(size=(200, 5))
    targets = np.array([functional_forward(teacher, w) for w in windows])
    start = init_params(1, FunctionalConfig(hidden=8, m=4, half_width=1.0, seed=1))
    _, curve = fit_windows(start, windows, targets, 5000, 1e-2)
    assert curve[-1][1] < 1e-6


@pytest.fixture(scope="module")
def trained(small_catamaran):
    cfg = FunctionalConfig(hidden=16, m=8, half_width=1.0, steps=300, seed=3)
    return train_functional(small_catamaran, cfg), cfg


def test_training_reduces_loss_and_is_deterministic(trained, small_catamaran):
    surrogate, cfg = trained
    assert surrogate.loss_curve[-1][1] < 0.5 * surrogate.loss_curve[0][1]
    again = train_functional(small_catamaran, cfg)
    for k, v in surrogate.params.tensors().items():
        assert np.array_equal(v, again.params.tensors()[k])


def test_fits_tiny_dataset_closely():
    gen = np.random.default_rng(2)
    windows, targets = gen.normal(size=(10, 4)), gen.normal(size=(10, 1))
    start = init_params(1, FunctionalConfig(hidden=32, m=3, seed=0))
    _, curve = fit_windows(start, windows, targets, 3000, 1e-2)
    assert curve[-1][1] < 1e-3


def test_save_load_and_dispatch(trained, small_catamaran, tmp_path):
    surrogate, _ = trained
    surrogate.save(tmp_path / "f.bin")
    loaded = load_checkpoint(tmp_path / "f.bin")
    assert isinstance(loaded, FunctionalSurrogate)
    x = small_catamaran.sequences[0].inputs
    assert np.array_equal(loaded.predict_raw(x), surrogate.predict_raw(x))
    result = evaluate(loaded, small_catamaran, "test")
    assert set(result.per_dof) == {"heave", "pitch"}


def test_bad_probe_index(small_catamaran):
    with pytest.raises(ConfigError):
        train_functional(small_catamaran, FunctionalConfig(probe=7, steps=1))


def test_finite_memory_witness_shrinks_with_horizon():
    vessel = load_preset("catamaran-2dof")
    sea = SeaStateParams.from_dict(vessel.sea_state)
    field = WaveField.from_sea_state(discretize_spectrum(sea, 100, seed=5), sea)
    short = finite_memory_witness(field, vessel, 1.0, 1500, num_checks=4)
    long = finite_memory_witness(field, vessel, 8.0, 1500, num_checks=4)
    assert long < 0.01 < short
    with pytest.raises(ConfigError):
        finite_memory_witness(field, vessel, 1000.0, 100)
