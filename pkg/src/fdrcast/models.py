"""The two forecaster architectures and a uniform predict interface.

Both consume a length-l binary pattern fed as raw 0.0/1.0 values (no
normalization) and regress one real: the delivery ratio expected over the
following horizon. Outputs are not clamped to [0,1]; callers that need a
ratio clamp at the reporting layer.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from . import nn
from .errors import CheckpointError, ShapeError
from .nn import checkpoint as _ckpt

KINDS = ("cnn", "lstm")

# Internal forward chunk; keeps transient conv buffers bounded. Row outputs
# are independent, so chunking never changes values.
PREDICT_CHUNK = 64


@dataclass(frozen=True)
class Hyperparams:
    """(batch size b, width n, input length l); width is CNN filter count
    or LSTM unit count. Grid membership is enforced by the search space,
    not here, so desk-scale values stay usable."""

    batch_size: int
    width: int
    input_length: int

    def __post_init__(self):
        for name in ("batch_size", "width", "input_length"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")


@dataclass
class TrainedModel:
    kind: str
    hyperparams: Hyperparams
    network: nn.Network
    val_loss_trace: list = field(default_factory=list)
    best_epoch: int = 0
    training_log: list = field(default_factory=list)

    def shape_input(self, patterns):
        """uint8/float patterns [m x l] to the network's input layout."""
        x = np.asarray(patterns, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.hyperparams.input_length:
            raise ShapeError(
                f"{self.kind} expects patterns of length "
                f"{self.hyperparams.input_length}, got shape {x.shape}"
            )
        if self.kind == "cnn":
            return x[:, :, None]
        return x

    def forward_batch(self, patterns):
        """Forward one batch, leaving layer caches in place for backward."""
        out = self.network.forward(self.shape_input(patterns))
        return out[:, 0]

    def predict(self, patterns):
        """Predict for one pattern [l] (returns float) or a batch [m x l]
        (returns float64 [m]). Deterministic and read-only."""
        arr = np.asarray(patterns)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        m = arr.shape[0]
        out = np.empty(m)
        for start in range(0, m, PREDICT_CHUNK):
            out[start:start + PREDICT_CHUNK] = self.forward_batch(
                arr[start:start + PREDICT_CHUNK]
            )
        return float(out[0]) if single else out


def parameter_count(model):
    """Total scalar parameters across all layers."""
    return int(sum(p.value.size for p in model.network.parameters()))


def _init_dense(layer, rng, scheme):
    if scheme == "he":
        layer.weights.value[...] = nn.he_uniform(rng, layer.weights.shape, layer.d_in)
    else:
        layer.weights.value[...] = nn.glorot_uniform(
            rng, layer.weights.shape, layer.d_in, layer.d_out
        )


def build_cnn(hp, seed):
    """Conv(width filters, kernel 3) -> ReLU -> MaxPool(2) -> Flatten ->
    Dense(128) -> ReLU -> Dense(64) -> ReLU -> Dense(1, linear).

    Seeded draws run layer by layer in network order, weights only; biases
    start at zero. ReLU-fed layers use the fan-in uniform limit, the linear
    head the fan-average one.
    """
    l, n = hp.input_length, hp.width
    if l < 4:
        raise ValueError(
            f"cnn needs input_length >= 4 so conv and pooling are nonempty, got {l}"
        )
    conv = nn.Conv1D(kernel=3, in_channels=1, filters=n)
    flat_len = ((l - 2) // 2) * n
    d1, d2, d3 = nn.Dense(flat_len, 128), nn.Dense(128, 64), nn.Dense(64, 1)
    rng = np.random.Generator(np.random.PCG64(seed))
    conv.filters.value[...] = nn.he_uniform(rng, conv.filters.shape, fan_in=3)
    _init_dense(d1, rng, "he")
    _init_dense(d2, rng, "he")
    _init_dense(d3, rng, "glorot")
    network = nn.Network([
        conv, nn.ReLU(), nn.MaxPool1D(), nn.Flatten(),
        d1, nn.ReLU(), d2, nn.ReLU(), d3,
    ])
    return TrainedModel(kind="cnn", hyperparams=hp, network=network)


def build_lstm(hp, seed):
    """LSTM(width units over l scalar steps) -> Dense(1, linear) on the
    final hidden state. Gate weights use the fan-average uniform limit over
    the concatenated [input, hidden] fan-in; biases start at zero."""
    n = hp.width
    lstm = nn.LSTM(units=n)
    head = nn.Dense(n, 1)
    rng = np.random.Generator(np.random.PCG64(seed))
    for g in lstm.GATES:
        lstm.w[g].value[...] = nn.glorot_uniform(
            rng, (1 + n, n), fan_in=1 + n, fan_out=n
        )
    _init_dense(head, rng, "glorot")
    network = nn.Network([lstm, head])
    return TrainedModel(kind="lstm", hyperparams=hp, network=network)


def build_model(kind, hp, seed):
    if kind == "cnn":
        return build_cnn(hp, seed)
    if kind == "lstm":
        return build_lstm(hp, seed)
    raise ValueError(f"unknown model kind {kind!r} (expected one of {KINDS})")


def save_model(model, path, meta=None):
    _ckpt.save_checkpoint(
        path,
        kind=model.kind,
        hyperparams=asdict(model.hyperparams),
        network=model.network,
        val_loss_trace=model.val_loss_trace,
        best_epoch=model.best_epoch,
        meta=meta,
    )


def load_model(path):
    ck = _ckpt.load_checkpoint(path)
    if ck.kind not in KINDS:
        raise CheckpointError(f"{path}: unknown model kind {ck.kind!r}")
    hp = Hyperparams(**ck.hyperparams)
    return TrainedModel(
        kind=ck.kind,
        hyperparams=hp,
        network=ck.network,
        val_loss_trace=list(ck.val_loss_trace),
        best_epoch=ck.best_epoch,
    )
