"""Recurrent cell parameters and single-step reference updates.

Every cell stores its weights stacked by gate: ``wx`` is ``(G*H, input_dim)``,
``wh`` is ``(G*H, H)`` and ``b`` is ``(G*H,)``, with ``G`` gates of width
``H``.  Gate order is

* ``lstm``: forget, input, output, candidate
* ``gru``: reset, update, candidate
* ``vanilla``: a single tanh block

LSTM::

    f = sig(Wfh h + Wfx x + bf)      i = sig(Wih h + Wix x + bi)
    o = sig(Woh h + Wox x + bo)      g = tanh(Wch h + Wcx x + bc)
    c' = f * c + i * g               h' = o * tanh(c')

GRU (reset applied to the recurrent candidate term)::

    r = sig(Wrx x + Wrh h + br)      z = sig(Wzx x + Wzh h + bz)
    n = tanh(Wnx x + bn + r * (Wnh h))
    h' = (1 - z) * n + z * h

The step functions here are plain numpy and serve as the reference the
sequence kernels are checked against.
"""

from dataclasses import dataclass

import numpy as np

from .. import rng
from ..errors import ConfigError, ShapeError

GATES = {
    "vanilla": ("h",),
    "gru": ("r", "z", "n"),
    "lstm": ("f", "i", "o", "c"),
}


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class CellParams:
    kind: str
    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.kind not in GATES:
            raise ConfigError(f"unknown cell kind {self.kind!r}")
        gh = len(GATES[self.kind]) * self.hidden_dim
        if self.wx.shape[0] != gh or self.wh.shape != (gh, self.hidden_dim) or self.b.shape != (gh,):
            raise ShapeError(f"inconsistent {self.kind} parameter shapes")

    @property
    def hidden_dim(self):
        return self.wh.shape[1]

    @property
    def input_dim(self):
        return self.wx.shape[1]

    def gate(self, name):
        """Views ``(W_x, W_h, b)`` of one gate block, e.g. ``gate("f")``."""
        j = GATES[self.kind].index(name)
        H = self.hidden_dim
        sl = slice(j * H, (j + 1) * H)
        return self.wx[sl], self.wh[sl], self.b[sl]

    @classmethod
    def init(cls, kind, input_dim, hidden_dim, generator):
        """Glorot-uniform weights per gate block; LSTM forget bias starts at 1."""
        if kind not in GATES:
            raise ConfigError(f"unknown cell kind {kind!r}")
        G = len(GATES[kind])
        lim_x = np.sqrt(6.0 / (input_dim + hidden_dim))
        lim_h = np.sqrt(6.0 / (2 * hidden_dim))
        wx = generator.uniform(-lim_x, lim_x, (G * hidden_dim, input_dim))
        wh = generator.uniform(-lim_h, lim_h, (G * hidden_dim, hidden_dim))
        b = np.zeros(G * hidden_dim)
        if kind == "lstm":
            b[:hidden_dim] = 1.0
        return cls(kind, wx, wh, b)


def _check(params, x, h):
    if x.shape[-1] != params.input_dim or h.shape[-1] != params.hidden_dim:
        raise ShapeError(
            f"expected input {params.input_dim} / hidden {params.hidden_dim}, "
            f"got {x.shape[-1]} / {h.shape[-1]}"
        )


def lstm_step(params, x_t, h_prev, c_prev):
    """One LSTM update; returns ``(h_t, c_t)``."""
    x_t, h_prev, c_prev = (np.asarray(a, float) for a in (x_t, h_prev, c_prev))
    _check(params, x_t, h_prev)
    if c_prev.shape != h_prev.shape:
        raise ShapeError("memory and hidden state shapes differ")

    def pre(gate):
        wx, wh, b = params.gate(gate)
        return wh @ h_prev + wx @ x_t + b

    f, i, o = sigmoid(pre("f")), sigmoid(pre("i")), sigmoid(pre("o"))
    c_t = f * c_prev + i * np.tanh(pre("c"))
    return o * np.tanh(c_t), c_t


def gru_step(params, x_t, h_prev):
    x_t, h_prev = np.asarray(x_t, float), np.asarray(h_prev, float)
    _check(params, x_t, h_prev)
    wrx, wrh, br = params.gate("r")
    wzx, wzh, bz = params.gate("z")
    wnx, wnh, bn = params.gate("n")
    r = sigmoid(wrx @ x_t + wrh @ h_prev + br)
    z = sigmoid(wzx @ x_t + wzh @ h_prev + bz)
    n = np.tanh(wnx @ x_t + bn + r * (wnh @ h_prev))
    return (1.0 - z) * n + z * h_prev


def vanilla_step(params, x_t, h_prev):
    x_t, h_prev = np.asarray(x_t, float), np.asarray(h_prev, float)
    _check(params, x_t, h_prev)
    return np.tanh(params.wx @ x_t + params.wh @ h_prev + params.b)


def init_generator(seed):
    return rng.generator(seed, "init")
