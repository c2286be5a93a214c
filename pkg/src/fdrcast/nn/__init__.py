from .layers import (
    LSTM,
    Conv1D,
    Dense,
    Flatten,
    Layer,
    MaxPool1D,
    Network,
    Parameter,
    ReLU,
    Tanh,
    glorot_uniform,
    he_uniform,
    layer_from_spec,
    sigmoid,
)
from .losses import mse_loss
from .optim import adam_step, adam_step_all
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    "Parameter", "Layer", "Dense", "Conv1D", "MaxPool1D", "ReLU", "Tanh",
    "Flatten", "LSTM", "Network", "layer_from_spec", "sigmoid",
    "he_uniform", "glorot_uniform", "mse_loss", "adam_step", "adam_step_all",
    "Checkpoint", "save_checkpoint", "load_checkpoint",
]
