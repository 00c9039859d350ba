"""Surrogate training, prediction and evaluation.

Training runs truncated BPTT over the training prefixes of every sequence at
once (the batch axis holds sequences).  Each optimizer step consumes one
window of ``tbptt_len`` samples; the recurrent state is carried to the next
window and reset to zero when the sequences wrap around, so the network
always sees data in the same order it will be run at inference time.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .. import io
from ..errors import ConfigError, MissingArtifactError, ShapeError, TrainingError
from ..nn import (
    AdamMoments,
    RecurrentStack,
    adam_update,
    backward_bptt,
    clip_gradients,
    forward_sequence,
    mse,
    mse_grad,
)
from .dataset import Normalizer
from .metrics import EvalResult, rse

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    cell_kind: str = "lstm"
    layers: int = 1
    neurons: int = 20
    train_steps: int = 2000
    lr: float = 3e-3
    lr_final_ratio: float = 0.05  # cosine decay to lr * ratio
    clip_norm: float = 1.0
    tbptt_len: int = 64
    seed: int = 0
    log_every: int = 100

    def __post_init__(self):
        if self.cell_kind not in ("lstm", "gru", "vanilla"):
            raise ConfigError(f"unknown cell kind {self.cell_kind!r}")
        for name in ("layers", "neurons", "tbptt_len", "log_every"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if self.train_steps < 0:
            raise ConfigError("train_steps must be non-negative")
        if not self.lr > 0 or not 0 < self.lr_final_ratio <= 1:
            raise ConfigError("lr must be positive and lr_final_ratio in (0, 1]")
        if not self.clip_norm > 0:
            raise ConfigError("clip_norm must be positive")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown training keys: {sorted(unknown)}")
        return cls(**d)

    def learning_rate(self, step):
        if self.train_steps <= 1:
            return self.lr
        frac = step / (self.train_steps - 1)
        r = self.lr_final_ratio
        return self.lr * (r + (1.0 - r) * 0.5 * (1.0 + math.cos(math.pi * frac)))


@dataclass
class Surrogate:
    """A trained recurrent network plus everything needed to run it on raw data."""

    stack: RecurrentStack
    normalizer: Normalizer
    dt: float
    dofs: tuple
    input_locations: tuple
    config: TrainConfig
    loss_curve: list = field(default_factory=list)
    train_rse: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def predict_raw(self, inputs):
        return predict(self, inputs)

    def save(self, path):
        """Write the checkpoint container and a JSON sidecar ``<path>.json``."""
        path = Path(path)
        meta = {
            "dt": self.dt,
            "dofs": list(self.dofs),
            "input_locations": [list(p) for p in self.input_locations],
            "config": asdict(self.config),
        }
        self.stack.save(path, meta, self.normalizer.tensors())
        io.write_json(sidecar_path(path), {
            "loss_curve": [[int(s), float(v)] for s, v in self.loss_curve],
            "train_rse": self.train_rse,
            "wall_time": self.wall_time,
            "config": asdict(self.config),
        })

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise MissingArtifactError(path)
        stack, meta, extra = RecurrentStack.load(path)
        side = io.read_json(sidecar_path(path)) if sidecar_path(path).exists() else {}
        return cls(stack, Normalizer.from_tensors(extra), float(meta["dt"]), tuple(meta["dofs"]),
                   tuple(tuple(p) for p in meta["input_locations"]), TrainConfig(**meta["config"]),
                   [tuple(x) for x in side.get("loss_curve", [])], side.get("train_rse", {}),
                   side.get("wall_time", 0.0))


def load_checkpoint(path):
    """Load a recurrent or functional surrogate, whichever the container holds."""
    from ..functional import FunctionalSurrogate

    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path)
    _, meta, tensors = io.read_container(path)
    if meta.get("cell_kind") == "functional":
        return FunctionalSurrogate.from_container(meta, tensors)
    return Surrogate.load(path)


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".json")


def _windows(length, size):
    return [(s, min(s + size, length)) for s in range(0, length - 1, size)]


def train_surrogate(dataset, config, callback=None):
    """Fit a recurrent surrogate to a normalized dataset.

    Parameters
    ----------
    dataset : Dataset
        Must carry normalization statistics (see :func:`normalize`).
    config : TrainConfig
    callback : callable, optional
        Called as ``callback(step, loss)`` every ``config.log_every`` steps.

    Returns
    -------
    Surrogate

    Raises
    ------
    TrainingError
        If the loss becomes non-finite; ``step`` holds the offending step.
    """
    if dataset.stats is None:
        raise ConfigError("dataset must be normalized before training")
    pairs = dataset.train_arrays()
    length = min(len(x) for x, _ in pairs)
    x = np.ascontiguousarray(np.stack([p[0][:length] for p in pairs], axis=1))
    y = np.ascontiguousarray(np.stack([p[1][:length] for p in pairs], axis=1))

    stack = RecurrentStack.init(config.cell_kind, dataset.input_dim, config.neurons, config.layers,
                                dataset.output_dim, seed=config.seed)
    params = {k: v.copy() for k, v in stack.parameters().items()}
    moments = AdamMoments.zeros_like(params)
    windows = _windows(length, config.tbptt_len)
    state = None
    curve = []
    started = time.perf_counter()
    for step in range(config.train_steps):
        w = step % len(windows)
        if w == 0:
            state = None
        lo, hi = windows[w]
        out, final, tape = forward_sequence(stack, x[lo:hi], state)
        loss = mse(out, y[lo:hi])
        if not math.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}", step=step)
        grads = backward_bptt(stack, tape, mse_grad(out, y[lo:hi]))
        grads = clip_gradients(grads, config.clip_norm)
        params, moments = adam_update(params, grads, moments, step + 1, lr=config.learning_rate(step))
        stack.assign(params)
        state = final.detach()
        if step % config.log_every == 0 or step == config.train_steps - 1:
            curve.append((step, loss))
            log.info("step %d loss %.6g", step, loss)
            if callback is not None:
                callback(step, loss)
    surrogate = Surrogate(stack, dataset.stats, dataset.dt, dataset.dofs, dataset.input_locations,
                          config, curve, wall_time=time.perf_counter() - started)
    surrogate.train_rse = evaluate(surrogate, dataset, "train").per_dof
    return surrogate


def predict(surrogate, inputs, dt=None):
    """Free-running prediction from rest over a raw ``(T, input_dim)`` series.

    Returns raw-unit motions ``(T, n_dofs)``.
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] != surrogate.stack.input_dim:
        raise ShapeError(f"expected inputs of shape (T, {surrogate.stack.input_dim}), got {x.shape}")
    if dt is not None and not math.isclose(dt, surrogate.dt, rel_tol=1e-9):
        raise ConfigError(f"input dt {dt} differs from training dt {surrogate.dt}")
    out, _, _ = forward_sequence(surrogate.stack, surrogate.normalizer.inputs(x))
    return surrogate.normalizer.denormalize_outputs(out)


def evaluate(surrogate, dataset, split="test"):
    """Per-case, per-DOF RSE of free-running predictions on a split.

    Works for any surrogate exposing ``predict_raw``, ``dt`` and ``dofs``.
    """
    if tuple(dataset.dofs) != tuple(surrogate.dofs):
        raise ShapeError(f"dataset DOFs {dataset.dofs} differ from checkpoint {surrogate.dofs}")
    cases, preds, refs = [], [], []
    for inputs, targets, sl in dataset.split_cases(split):
        if not math.isclose(dataset.dt, surrogate.dt, rel_tol=1e-9):
            raise ConfigError(f"dataset dt {dataset.dt} differs from training dt {surrogate.dt}")
        p = surrogate.predict_raw(inputs)[sl]
        r = targets[sl]
        cases.append({d: rse(p[:, j], r[:, j]) for j, d in enumerate(dataset.dofs)})
        preds.append(p)
        refs.append(r)
    return EvalResult(tuple(dataset.dofs), cases, preds, refs)
