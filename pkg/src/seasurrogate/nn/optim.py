"""Adam and global-norm gradient clipping over ``{name: array}`` mappings."""

from dataclasses import dataclass

import numpy as np


@dataclass
class AdamMoments:
    first: dict
    second: dict

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(v) for k, v in params.items()},
                   {k: np.zeros_like(v) for k, v in params.items()})


def adam_update(params, grads, moments, step, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam step.

    Returns new ``(params, moments)``; the inputs are left untouched.
    ``step`` counts from 1.
    """
    if step < 1:
        raise ValueError("step counts from 1")
    c1 = 1.0 - beta1**step
    c2 = 1.0 - beta2**step
    new_params, first, second = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m = beta1 * moments.first[name] + (1.0 - beta1) * g
        v = beta2 * moments.second[name] + (1.0 - beta2) * g * g
        new_params[name] = p - lr * (m / c1) / (np.sqrt(v / c2) + eps)
        first[name], second[name] = m, v
    return new_params, AdamMoments(first, second)


def global_norm(grads):
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_gradients(grads, max_norm):
    """Rescale so the global L2 norm is at most ``max_norm``."""
    if not max_norm > 0:
        raise ValueError("max_norm must be positive")
    norm = global_norm(grads)
    if norm <= max_norm:
        return dict(grads)
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}
