"""From-scratch recurrent networks: cells, stacked layers, BPTT and Adam."""

from .cells import CellParams, gru_step, lstm_step, vanilla_step
from .optim import AdamMoments, adam_update, clip_gradients, global_norm
from .stack import CellState, RecurrentStack, backward_bptt, forward_sequence, mse, mse_grad

__all__ = [
    "AdamMoments", "CellParams", "CellState", "RecurrentStack", "adam_update",
    "backward_bptt", "clip_gradients", "forward_sequence", "global_norm",
    "gru_step", "lstm_step", "mse", "mse_grad", "vanilla_step",
]
