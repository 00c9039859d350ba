"""Layered recurrent network with a linear readout, trained by BPTT.

A forward pass runs each layer over the whole window through the active
kernel backend, feeding hidden states of layer ``l`` as inputs of layer
``l + 1``; the readout maps last-layer hidden states to outputs.  The tape
returned by :func:`forward_sequence` keeps what :func:`backward_bptt` needs.
Gradients flow back through every step of the window; truncation happens by
splitting a sequence into windows and carrying the state forward.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import io, kernels
from ..errors import ConfigError, ShapeError
from .cells import GATES, CellParams, init_generator

FORMAT = "recurrent_stack"


@dataclass
class CellState:
    """Per-layer hidden (and, for LSTM, memory) vectors of shape ``(B, H)``."""

    h: list
    c: list = None

    @classmethod
    def zeros(cls, stack, batch=1):
        h = [np.zeros((batch, layer.hidden_dim)) for layer in stack.layers]
        c = [np.zeros_like(x) for x in h] if stack.cell_kind == "lstm" else None
        return cls(h, c)

    def detach(self):
        return CellState([x.copy() for x in self.h], None if self.c is None else [x.copy() for x in self.c])


@dataclass
class RecurrentStack:
    cell_kind: str
    layers: list
    readout_w: np.ndarray
    readout_b: np.ndarray
    version: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.cell_kind not in GATES:
            raise ConfigError(f"unknown cell kind {self.cell_kind!r}")
        for lower, upper in zip(self.layers, self.layers[1:]):
            if upper.input_dim != lower.hidden_dim:
                raise ShapeError("layer input dims must match the previous hidden dim")
        if self.readout_w.shape != (self.output_dim, self.layers[-1].hidden_dim):
            raise ShapeError("readout must be (output_dim, last hidden_dim)")

    @property
    def input_dim(self):
        return self.layers[0].input_dim

    @property
    def output_dim(self):
        return self.readout_b.shape[0]

    @property
    def hidden_dims(self):
        return [layer.hidden_dim for layer in self.layers]

    @classmethod
    def init(cls, cell_kind, input_dim, hidden_dim, num_layers, output_dim, seed=0):
        gen = init_generator(seed)
        layers = []
        dim = input_dim
        for _ in range(num_layers):
            layers.append(CellParams.init(cell_kind, dim, hidden_dim, gen))
            dim = hidden_dim
        lim = np.sqrt(6.0 / (hidden_dim + output_dim))
        readout_w = gen.uniform(-lim, lim, (output_dim, hidden_dim))
        return cls(cell_kind, layers, readout_w, np.zeros(output_dim))

    def parameters(self):
        """Ordered ``{name: array}`` of every trainable tensor (live references)."""
        out = {}
        for l, layer in enumerate(self.layers):
            out[f"layer{l}.wx"] = layer.wx
            out[f"layer{l}.wh"] = layer.wh
            out[f"layer{l}.b"] = layer.b
        out["readout.w"] = self.readout_w
        out["readout.b"] = self.readout_b
        return out

    def assign(self, values):
        """Overwrite parameters in place from ``{name: array}`` and bump the version."""
        params = self.parameters()
        for name, value in values.items():
            if params[name].shape != np.shape(value):
                raise ShapeError(f"{name}: shape {np.shape(value)} != {params[name].shape}")
            params[name][...] = value
        self.version += 1

    def copy(self):
        layers = [CellParams(l.kind, l.wx.copy(), l.wh.copy(), l.b.copy()) for l in self.layers]
        return RecurrentStack(self.cell_kind, layers, self.readout_w.copy(), self.readout_b.copy())

    def num_parameters(self):
        return int(sum(p.size for p in self.parameters().values()))

    def save(self, path, meta=None, extra=None):
        tensors = dict(self.parameters())
        tensors.update(extra or {})
        header = {
            "cell_kind": self.cell_kind,
            "input_dim": self.input_dim,
            "hidden_dims": self.hidden_dims,
            "output_dim": self.output_dim,
            **(meta or {}),
        }
        io.write_container(path, FORMAT, tensors, header)

    @classmethod
    def load(cls, path):
        """Return ``(stack, meta, extra_tensors)``."""
        _, meta, t = io.read_container(path, FORMAT)
        kind = meta["cell_kind"]
        layers = []
        for l in range(len(meta["hidden_dims"])):
            layers.append(CellParams(kind, t.pop(f"layer{l}.wx"), t.pop(f"layer{l}.wh"), t.pop(f"layer{l}.b")))
        stack = cls(kind, layers, t.pop("readout.w"), t.pop("readout.b"))
        return stack, meta, t


@dataclass
class Tape:
    inputs: np.ndarray
    initial: CellState
    caches: list
    hiddens: list
    version: int
    squeeze: bool


def _as_batch(inputs):
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 2:
        return np.ascontiguousarray(x[:, None, :]), True
    if x.ndim == 3:
        return np.ascontiguousarray(x), False
    raise ShapeError("inputs must be (T, input_dim) or (T, batch, input_dim)")


def forward_sequence(stack, inputs, initial=None):
    """Run the stack over a sequence.

    Parameters
    ----------
    stack : RecurrentStack
    inputs : ndarray
        ``(T, input_dim)`` or ``(T, B, input_dim)``.
    initial : CellState, optional
        Zeros when omitted.

    Returns
    -------
    outputs : ndarray
        ``(T, output_dim)`` or ``(T, B, output_dim)`` matching ``inputs``.
    final : CellState
    tape : Tape
    """
    x, squeeze = _as_batch(inputs)
    T, B, D = x.shape
    if T < 1:
        raise ShapeError("sequence must have at least one step")
    if D != stack.input_dim:
        raise ShapeError(f"input dim {D} != stack input dim {stack.input_dim}")
    if initial is None:
        initial = CellState.zeros(stack, B)
    kern = kernels.backend()
    caches, hiddens = [], []
    final_h, final_c = [], []
    layer_in = x
    for l, layer in enumerate(stack.layers):
        h0 = np.ascontiguousarray(initial.h[l])
        if h0.shape != (B, layer.hidden_dim):
            raise ShapeError("initial state does not match batch/hidden size")
        xproj = np.ascontiguousarray(layer_in @ layer.wx.T + layer.b)
        wh = np.ascontiguousarray(layer.wh)
        if stack.cell_kind == "lstm":
            c0 = np.ascontiguousarray(initial.c[l])
            hs, cs, gates = kern.lstm_forward(xproj, wh, h0, c0)
            caches.append((gates, cs, h0, c0))
            final_c.append(cs[-1].copy())
        elif stack.cell_kind == "gru":
            hs, gates = kern.gru_forward(xproj, wh, h0)
            caches.append((gates, h0))
        else:
            hs = kern.rnn_forward(xproj, wh, h0)
            caches.append((h0,))
        hiddens.append(hs)
        final_h.append(hs[-1].copy())
        layer_in = hs
    out = layer_in @ stack.readout_w.T + stack.readout_b
    final = CellState(final_h, final_c if stack.cell_kind == "lstm" else None)
    tape = Tape(x, initial, caches, hiddens, stack.version, squeeze)
    return (out[:, 0, :] if squeeze else out), final, tape


def backward_bptt(stack, tape, loss_grad):
    """Reverse-mode gradients of a scalar loss given ``dLoss/dOutputs``.

    Returns ``{name: gradient}`` keyed like :meth:`RecurrentStack.parameters`.
    """
    if tape.version != stack.version:
        raise ConfigError("stale tape: parameters changed since the forward pass")
    dy = np.asarray(loss_grad, dtype=np.float64)
    if tape.squeeze:
        dy = dy[:, None, :]
    T, B, _ = tape.inputs.shape
    if dy.shape != (T, B, stack.output_dim):
        raise ShapeError("loss gradient shape does not match outputs")
    kern = kernels.backend()
    grads = {}
    top = tape.hiddens[-1]
    grads["readout.w"] = np.einsum("tbo,tbh->oh", dy, top)
    grads["readout.b"] = dy.sum(axis=(0, 1))
    dh = np.ascontiguousarray(dy @ stack.readout_w)
    for l in range(len(stack.layers) - 1, -1, -1):
        layer = stack.layers[l]
        hs = tape.hiddens[l]
        wh = np.ascontiguousarray(layer.wh)
        cache = tape.caches[l]
        if stack.cell_kind == "lstm":
            gates, cs, h0, c0 = cache
            dxp, dwh, _, _ = kern.lstm_backward(dh, gates, hs, cs, h0, c0, wh)
        elif stack.cell_kind == "gru":
            gates, h0 = cache
            dxp, dwh, _ = kern.gru_backward(dh, gates, hs, h0, wh)
        else:
            (h0,) = cache
            dxp, dwh, _ = kern.rnn_backward(dh, hs, h0, wh)
        layer_in = tape.inputs if l == 0 else tape.hiddens[l - 1]
        G = dxp.shape[-1]
        flat = dxp.reshape(-1, G)
        grads[f"layer{l}.wx"] = flat.T @ layer_in.reshape(-1, layer_in.shape[-1])
        grads[f"layer{l}.wh"] = dwh
        grads[f"layer{l}.b"] = flat.sum(axis=0)
        if l > 0:
            dh = np.ascontiguousarray(dxp @ layer.wx)
    return {name: grads[name] for name in stack.parameters()}


def mse(predicted, observed):
    """Mean squared error over every element."""
    p, o = np.asarray(predicted, float), np.asarray(observed, float)
    if p.shape != o.shape:
        raise ShapeError(f"shape mismatch {p.shape} vs {o.shape}")
    return float(np.mean((p - o) ** 2))


def mse_grad(predicted, observed):
    p, o = np.asarray(predicted, float), np.asarray(observed, float)
    return 2.0 * (p - o) / p.size
