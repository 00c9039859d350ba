"""Single-hidden-layer functional approximator on windowed wave records.

The network maps ``m + 1`` samples of a windowed input signal to one value
per output DOF::

    F(u) = sum_i c_i * sigma(sum_j xi_ij u(x_j) + theta_i) + bias

with ``sigma`` the logistic function.  ``bias`` defaults to zero, which is
the textbook form; training fits it so zero-mean assumptions on the motion
are not needed.  Parameters are shared over all window centres, which relies
on the oracle being time-invariant.

Windows are two-sided, ``[alpha - a, alpha + a]``, in theory mode and
``[alpha - 2a, alpha]`` (same measure, no look-ahead) in causal mode.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import io, rng
from .errors import ConfigError, ShapeError, TrainingError
from .nn.cells import sigmoid
from .nn.optim import AdamMoments, adam_update
from .oracle import integrate

FORMAT = "recurrent_stack"  # shared checkpoint container, cell_kind = "functional"


@dataclass(frozen=True)
class FunctionalNetParams:
    c: np.ndarray  # (n_out, N)
    xi: np.ndarray  # (N, m + 1)
    theta: np.ndarray  # (N,)
    half_width: float
    causal: bool = True
    bias: np.ndarray = None  # (n_out,)

    def __post_init__(self):
        c, xi, theta = (np.atleast_1d(np.asarray(v, float)) for v in (self.c, self.xi, self.theta))
        if c.ndim == 1:
            c = c[None, :]
        if xi.ndim != 2 or xi.shape[1] < 2:
            raise ShapeError("xi must be (N, m + 1) with m >= 1")
        if c.shape[1] != xi.shape[0] or theta.shape != (xi.shape[0],):
            raise ShapeError("c, xi and theta disagree on the hidden width N")
        if not self.half_width > 0:
            raise ConfigError("window half-width must be positive")
        bias = np.zeros(c.shape[0]) if self.bias is None else np.atleast_1d(np.asarray(self.bias, float))
        if bias.shape != (c.shape[0],):
            raise ShapeError("bias must have one entry per output")
        for name, v in (("c", c), ("xi", xi), ("theta", theta), ("bias", bias)):
            object.__setattr__(self, name, v)

    @property
    def hidden(self):
        return self.xi.shape[0]

    @property
    def m(self):
        return self.xi.shape[1] - 1

    @property
    def offsets(self):
        """Sample offsets relative to the window centre (equally spaced)."""
        return np.linspace(-self.half_width, self.half_width, self.m + 1)

    def tensors(self):
        return {"c": self.c, "xi": self.xi, "theta": self.theta, "bias": self.bias}

    def with_tensors(self, t):
        return replace(self, **{k: t[k] for k in ("c", "xi", "theta", "bias")})


@dataclass(frozen=True)
class WindowedSample:
    center: float
    values: np.ndarray


def _series_arrays(series):
    values = np.asarray(series.values, float)
    times = series.start_time + series.dt * np.arange(len(values))
    return times, values


def _sample(times, values, points):
    # linear interpolation, zero outside the recorded span
    out = np.interp(points, times, values, left=0.0, right=0.0)
    inside = (points >= times[0]) & (points <= times[-1])
    return np.where(inside, out, 0.0)


def window(series, center, half_width, m):
    """Sample ``series`` at ``m + 1`` equally spaced points of ``[center - a, center + a]``.

    Values outside the recorded span are zero, matching the zero extension
    of the windowing operator.
    """
    if not half_width > 0 or int(m) < 1:
        raise ConfigError("window needs half_width > 0 and m >= 1")
    times, values = _series_arrays(series)
    points = center + np.linspace(-half_width, half_width, int(m) + 1)
    return WindowedSample(float(center), _sample(times, values, points))


def functional_forward(params, sample):
    """Evaluate the network on one window; returns ``(n_out,)``."""
    u = np.asarray(getattr(sample, "values", sample), float)
    if u.shape != (params.m + 1,):
        raise ShapeError(f"window has {u.shape[0]} samples, network expects {params.m + 1}")
    return params.c @ sigmoid(params.xi @ u + params.theta) + params.bias


def window_matrix(series, half_width, m, causal=True, centers=None):
    """Windows at every grid time (or ``centers``) stacked as ``(T, m + 1)``."""
    times, values = _series_arrays(series)
    alpha = times if centers is None else np.asarray(centers, float)
    shift = -half_width if causal else 0.0
    pts = (alpha + shift)[:, None] + np.linspace(-half_width, half_width, int(m) + 1)[None, :]
    return _sample(times, values, pts)


def predict_motion_series(params, series, causal=None):
    """Slide the window over every grid time; returns ``(T, n_out)``."""
    causal = params.causal if causal is None else causal
    u = window_matrix(series, params.half_width, params.m, causal)
    return sigmoid(u @ params.xi.T + params.theta) @ params.c.T + params.bias


def loss_and_grads(tensors, windows, targets):
    """MSE of the network over stacked windows and its analytic gradients."""
    s = sigmoid(windows @ tensors["xi"].T + tensors["theta"])
    y = s @ tensors["c"].T + tensors["bias"]
    r = y - targets
    loss = float(np.mean(r * r))
    dy = 2.0 * r / r.size
    ds = dy @ tensors["c"]
    dz = ds * s * (1.0 - s)
    grads = {"c": dy.T @ s, "xi": dz.T @ windows, "theta": dz.sum(axis=0), "bias": dy.sum(axis=0)}
    return loss, grads


@dataclass(frozen=True)
class FunctionalConfig:
    hidden: int = 64
    m: int = 32
    half_width: float = 2.0
    lr: float = 1e-2
    steps: int = 3000
    seed: int = 0
    causal: bool = True
    probe: int = 0
    log_every: int = 100

    def __post_init__(self):
        if self.hidden < 1 or self.m < 1 or self.steps < 0 or self.log_every < 1:
            raise ConfigError("hidden, m and log_every must be positive, steps non-negative")
        if not self.half_width > 0 or not self.lr > 0:
            raise ConfigError("half_width and lr must be positive")


def init_params(n_out, config):
    gen = rng.generator(config.seed, "init")
    lim = math.sqrt(6.0 / (config.m + 1 + config.hidden))
    return FunctionalNetParams(
        c=gen.uniform(-lim, lim, (n_out, config.hidden)),
        xi=gen.uniform(-lim, lim, (config.hidden, config.m + 1)),
        theta=np.zeros(config.hidden),
        half_width=config.half_width,
        causal=config.causal,
    )


def fit_windows(params, windows, targets, steps, lr, log_every=100):
    """Full-batch Adam on fixed windows; returns ``(params, loss_curve)``."""
    t = {k: v.copy() for k, v in params.tensors().items()}
    moments = AdamMoments.zeros_like(t)
    curve = []
    for step in range(steps):
        loss, grads = loss_and_grads(t, windows, targets)
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}", step=step)
        t, moments = adam_update(t, grads, moments, step + 1, lr=lr)
        if step % log_every == 0 or step == steps - 1:
            curve.append((step, loss))
    return params.with_tensors(t), curve


@dataclass
class FunctionalSurrogate:
    """Trained functional network in raw units, with dataset bookkeeping."""

    params: FunctionalNetParams
    dt: float
    dofs: tuple
    input_locations: tuple
    probe: int = 0
    loss_curve: list = field(default_factory=list)

    def predict_raw(self, inputs):
        x = np.asarray(inputs, float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] <= self.probe:
            raise ShapeError(f"inputs need at least {self.probe + 1} probe columns")
        from .kinematics import ProbeSeries

        return predict_motion_series(self.params, ProbeSeries(self.input_locations[self.probe], self.dt,
                                                              x[:, self.probe], 0.0))

    def save(self, path):
        meta = {
            "cell_kind": "functional",
            "half_width": self.params.half_width,
            "causal": self.params.causal,
            "dt": self.dt,
            "dofs": list(self.dofs),
            "input_locations": [list(p) for p in self.input_locations],
            "probe": self.probe,
            "loss_curve": [[int(s), float(v)] for s, v in self.loss_curve],
        }
        io.write_container(path, FORMAT, self.params.tensors(), meta)

    @classmethod
    def from_container(cls, meta, t):
        params = FunctionalNetParams(t["c"], t["xi"], t["theta"], meta["half_width"], meta["causal"],
                                     t["bias"])
        return cls(params, float(meta["dt"]), tuple(meta["dofs"]),
                   tuple(tuple(p) for p in meta["input_locations"]), int(meta["probe"]),
                   [tuple(x) for x in meta.get("loss_curve", [])])

    @classmethod
    def load(cls, path):
        _, meta, t = io.read_container(path, FORMAT)
        if meta.get("cell_kind") != "functional":
            raise ConfigError(f"{path} is not a functional-network checkpoint")
        return cls.from_container(meta, t)


def train_functional(dataset, config):
    """Fit shared functional-network parameters to the training prefixes.

    Inputs and targets are standardised for the optimisation; the scalings
    are folded back into ``xi``, ``theta``, ``c`` and ``bias`` so the
    returned network acts on raw elevations and returns raw motions.
    """
    from .kinematics import ProbeSeries

    if config.probe >= dataset.input_dim:
        raise ConfigError(f"probe index {config.probe} out of range")
    us, ys = [], []
    for i in dataset.train_indices:
        seq = dataset.sequences[i]
        n = dataset.train_length(i)
        s = seq.probes[config.probe]
        u = window_matrix(ProbeSeries(s.location, s.dt, s.values, 0.0), config.half_width, config.m,
                          config.causal)
        us.append(u[:n])
        ys.append(seq.targets(dataset.dofs)[:n])
    u, y = np.concatenate(us), np.concatenate(ys)
    in_scale = float(u.std()) or 1.0
    out_mean, out_scale = y.mean(axis=0), y.std(axis=0)
    if np.any(out_scale == 0):
        raise ConfigError("a target channel has zero variance")
    start = init_params(dataset.output_dim, config)
    fitted, curve = fit_windows(start, u / in_scale, (y - out_mean) / out_scale, config.steps, config.lr,
                                config.log_every)
    raw = FunctionalNetParams(
        c=fitted.c * out_scale[:, None],
        xi=fitted.xi / in_scale,
        theta=fitted.theta,
        half_width=config.half_width,
        causal=config.causal,
        bias=fitted.bias * out_scale + out_mean,
    )
    return FunctionalSurrogate(raw, dataset.dt, dataset.dofs, dataset.input_locations, config.probe, curve)


def finite_memory_witness(field, vessel, horizon, steps, num_checks=8, seed=0, dt=None):
    """Relative RMS error of the oracle restarted from rest ``horizon`` seconds early.

    For ``num_checks`` random times ``alpha`` the oracle is integrated from
    ``alpha - horizon`` starting at rest and compared with the full run at
    ``alpha``.  A small value means the motion at ``alpha`` depends, up to
    that error, only on the wave input over ``[alpha - horizon, alpha]``.
    """
    dt = vessel.dt if dt is None else dt
    lag = int(round(horizon / dt))
    if lag < 1 or lag >= steps:
        raise ConfigError("horizon must span between one step and the record length")
    full = integrate(field, vessel, 0.0, dt, steps).as_array(vessel.dofs)
    gen = rng.generator(seed, "dataset")
    ends = np.sort(gen.choice(np.arange(lag, steps), size=num_checks, replace=False))
    err = []
    for end in ends:
        start = end - lag
        part = integrate(field, vessel, start * dt, dt, lag + 1).as_array(vessel.dofs)
        err.append(part[-1] - full[end])
    err = np.asarray(err)
    scale = full.std(axis=0)
    return float(np.sqrt(np.mean((err / scale) ** 2)))
