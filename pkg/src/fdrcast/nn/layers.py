"""Minimal layer zoo with hand-derived backward passes.

All arithmetic is float64 and batch-first. Every layer caches whatever its
backward pass needs during forward; a layer instance is therefore
single-writer (do not share one instance across concurrent forward/backward
calls). Parameter gradients accumulate into ``Parameter.grad`` until the
caller zeroes them.
"""

import numpy as np

from ..errors import NumericError, ShapeError


class Parameter:
    """Trainable array bundling value, gradient, and Adam moment state."""

    def __init__(self, value):
        self.value = np.array(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)
        self.step_count = 0

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0


def sigmoid(z):
    """Logistic sigmoid, branch-split so large |z| cannot overflow."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def he_uniform(rng, shape, fan_in):
    """Uniform init on [-sqrt(2/fan_in), +sqrt(2/fan_in)] for ReLU layers."""
    limit = np.sqrt(2.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def glorot_uniform(rng, shape, fan_in, fan_out):
    """Symmetric fan-average uniform init for tanh/LSTM/linear layers."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base layer: ``forward`` caches state, ``backward`` consumes it."""

    kind = "?"

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def parameters(self):
        return []

    def param_names(self):
        return []

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def spec(self):
        return {"kind": self.kind}

    def _require_cache(self, cache):
        if cache is None:
            raise RuntimeError(f"{self.kind}: backward called before forward")


class Dense(Layer):
    """Fully connected layer: out = x @ W + b."""

    kind = "dense"

    def __init__(self, d_in, d_out):
        if d_in < 1 or d_out < 1:
            raise ValueError(f"dense dims must be >= 1, got {d_in}x{d_out}")
        self.d_in = d_in
        self.d_out = d_out
        self.weights = Parameter(np.zeros((d_in, d_out)))
        self.bias = Parameter(np.zeros((1, d_out)))
        self._x = None

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(
                f"dense expects input [batch x {self.d_in}], "
                f"got {x.shape} against weights {self.weights.shape}"
            )
        self._x = x
        return x @ self.weights.value + self.bias.value

    def backward(self, grad):
        self._require_cache(self._x)
        self.weights.grad += self._x.T @ grad
        self.bias.grad += grad.sum(axis=0, keepdims=True)
        return grad @ self.weights.value.T

    def parameters(self):
        return [self.weights, self.bias]

    def param_names(self):
        return ["weights", "bias"]

    def spec(self):
        return {"kind": self.kind, "d_in": self.d_in, "d_out": self.d_out}


class Conv1D(Layer):
    """Valid (no padding) 1-D convolution with stride 1.

    out[t, f] = sum_{j<k, c} input[t+j, c] * filters[j, c, f] + bias[f]
    """

    kind = "conv1d"

    def __init__(self, kernel, in_channels, filters):
        if kernel < 1:
            raise ValueError(f"kernel width must be >= 1, got {kernel}")
        if filters < 1 or in_channels < 1:
            raise ValueError("channel and filter counts must be >= 1")
        self.kernel = kernel
        self.in_channels = in_channels
        self.n_filters = filters
        self.filters = Parameter(np.zeros((kernel, in_channels, filters)))
        self.bias = Parameter(np.zeros(filters))
        self._cols = None
        self._in_len = None

    def forward(self, x):
        k = self.kernel
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ShapeError(
                f"conv1d expects input [batch x length x {self.in_channels}], got {x.shape}"
            )
        batch, length, _ = x.shape
        if length < k:
            raise ShapeError(
                f"conv1d input too short: length {length} < kernel {k}"
            )
        out_len = length - k + 1
        # [B, L', C, K] -> [B, L', K, C] -> [B*L', K*C]; row-major flatten
        # matches filters.reshape(K*C, F).
        cols = np.lib.stride_tricks.sliding_window_view(x, k, axis=1)
        cols = np.ascontiguousarray(cols.transpose(0, 1, 3, 2))
        cols2 = cols.reshape(batch * out_len, k * self.in_channels)
        w2 = self.filters.value.reshape(k * self.in_channels, self.n_filters)
        out = cols2 @ w2
        out += self.bias.value  # in place; the broadcast temp would dominate
        self._cols = cols2
        self._in_len = length
        return out.reshape(batch, out_len, self.n_filters)

    def backward(self, grad):
        self._require_cache(self._cols)
        k, c, f = self.kernel, self.in_channels, self.n_filters
        batch, out_len, _ = grad.shape
        up2 = grad.reshape(batch * out_len, f)
        self.filters.grad += (self._cols.T @ up2).reshape(k, c, f)
        self.bias.grad += up2.sum(axis=0)
        w2 = self.filters.value.reshape(k * c, f)
        dcols = (up2 @ w2.T).reshape(batch, out_len, k, c)
        dx = np.zeros((batch, self._in_len, c))
        for j in range(k):
            dx[:, j:j + out_len, :] += dcols[:, :, j, :]
        return dx

    def parameters(self):
        return [self.filters, self.bias]

    def param_names(self):
        return ["filters", "bias"]

    def spec(self):
        return {
            "kind": self.kind,
            "kernel": self.kernel,
            "in_channels": self.in_channels,
            "filters": self.n_filters,
        }


class MaxPool1D(Layer):
    """Max pooling with width 2 and stride 2; a trailing odd element is dropped.

    Ties take the earlier index. A boolean first-of-pair mask is cached to
    route the backward pass; it is far cheaper than an argmax gather.
    """

    kind = "maxpool1d"
    width = 2

    def __init__(self):
        self._first = None
        self._in_len = None

    def forward(self, x):
        if x.ndim != 3:
            raise ShapeError(f"maxpool1d expects [batch x length x channels], got {x.shape}")
        batch, length, channels = x.shape
        if length < 2:
            raise ShapeError(f"maxpool1d input too short: length {length} < 2")
        out_len = length // 2
        a = x[:, 0:2 * out_len:2, :]
        b = x[:, 1:2 * out_len:2, :]
        self._first = a >= b  # ties route to the earlier element
        self._in_len = length
        return np.maximum(a, b)

    def backward(self, grad):
        self._require_cache(self._first)
        batch, out_len, channels = grad.shape
        dx = np.zeros((batch, self._in_len, channels))
        dx[:, 0:2 * out_len:2, :] = grad * self._first
        dx[:, 1:2 * out_len:2, :] = grad * ~self._first
        return dx


class ReLU(Layer):
    kind = "relu"

    def __init__(self):
        self._out = None

    def forward(self, x):
        self._out = np.maximum(x, 0.0)
        return self._out

    def backward(self, grad):
        self._require_cache(self._out)
        return grad * (self._out > 0)


class Tanh(Layer):
    kind = "tanh"

    def __init__(self):
        self._out = None

    def forward(self, x):
        self._out = np.tanh(x)
        return self._out

    def backward(self, grad):
        self._require_cache(self._out)
        return grad * (1.0 - self._out ** 2)


class Flatten(Layer):
    kind = "flatten"

    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        self._require_cache(self._shape)
        return grad.reshape(self._shape)


class LSTM(Layer):
    """Single LSTM layer over a scalar sequence, returning the last hidden state.

    Gates i/f/o use the logistic sigmoid; the cell candidate and hidden output
    use tanh. Each gate has one weight matrix of shape [(1 + units) x units]
    (row 0 multiplies the scalar input, the rest the previous hidden state)
    and one bias of shape [1 x units]. Hidden and cell states start at zero.
    """

    kind = "lstm"
    GATES = ("i", "f", "o", "g")

    def __init__(self, units):
        if units < 1:
            raise ValueError(f"units must be >= 1, got {units}")
        self.units = units
        self.w = {g: Parameter(np.zeros((1 + units, units))) for g in self.GATES}
        self.b = {g: Parameter(np.zeros((1, units))) for g in self.GATES}
        self._cache = None

    def step(self, x_t, h, c):
        """One cell step for input column x_t [batch] with carried state."""
        z = np.concatenate([x_t[:, None], h], axis=1)
        i = sigmoid(z @ self.w["i"].value + self.b["i"].value)
        f = sigmoid(z @ self.w["f"].value + self.b["f"].value)
        o = sigmoid(z @ self.w["o"].value + self.b["o"].value)
        g = np.tanh(z @ self.w["g"].value + self.b["g"].value)
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        return h_new, c_new

    def forward(self, x):
        if x.ndim != 2:
            raise ShapeError(f"lstm expects input [batch x length], got {x.shape}")
        batch, length = x.shape
        u = self.units
        # Input columns contribute x_t * w[0]; precomputed for every step.
        xc = {g: x[:, :, None] * self.w[g].value[0][None, None, :] for g in self.GATES}
        rec = {g: self.w[g].value[1:] for g in self.GATES}
        acts = {g: np.empty((length, batch, u)) for g in self.GATES}
        tanh_c = np.empty((length, batch, u))
        hs = np.zeros((length + 1, batch, u))
        cs = np.zeros((length + 1, batch, u))
        h = hs[0]
        c = cs[0]
        for t in range(length):
            i = sigmoid(h @ rec["i"] + xc["i"][:, t] + self.b["i"].value)
            f = sigmoid(h @ rec["f"] + xc["f"][:, t] + self.b["f"].value)
            o = sigmoid(h @ rec["o"] + xc["o"][:, t] + self.b["o"].value)
            g = np.tanh(h @ rec["g"] + xc["g"][:, t] + self.b["g"].value)
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            if not np.isfinite(h).all():
                raise NumericError(f"lstm: non-finite activation at time step {t}")
            acts["i"][t] = i
            acts["f"][t] = f
            acts["o"][t] = o
            acts["g"][t] = g
            tanh_c[t] = tc
            hs[t + 1] = h
            cs[t + 1] = c
        self._cache = (x, acts, tanh_c, hs, cs)
        return h

    def backward(self, grad):
        self._require_cache(self._cache)
        x, acts, tanh_c, hs, cs = self._cache
        batch, length = x.shape
        u = self.units
        rec = {g: self.w[g].value[1:] for g in self.GATES}
        w_in = {g: self.w[g].value[0] for g in self.GATES}
        dzs = {g: np.empty((length, batch, u)) for g in self.GATES}
        dx = np.empty((batch, length))
        dh = grad
        dc = np.zeros((batch, u))
        for t in range(length - 1, -1, -1):
            i, f = acts["i"][t], acts["f"][t]
            o, g = acts["o"][t], acts["g"][t]
            tc = tanh_c[t]
            dzo = dh * tc * o * (1.0 - o)
            dc = dc + dh * o * (1.0 - tc ** 2)
            dzi = dc * g * i * (1.0 - i)
            dzg = dc * i * (1.0 - g ** 2)
            dzf = dc * cs[t] * f * (1.0 - f)
            dzs["i"][t] = dzi
            dzs["f"][t] = dzf
            dzs["o"][t] = dzo
            dzs["g"][t] = dzg
            dh = dzi @ rec["i"].T + dzf @ rec["f"].T + dzo @ rec["o"].T + dzg @ rec["g"].T
            dx[:, t] = dzi @ w_in["i"] + dzf @ w_in["f"] + dzo @ w_in["o"] + dzg @ w_in["g"]
            dc = dc * f
        for g in self.GATES:
            dz = dzs[g]
            self.w[g].grad[0] += np.einsum("bt,tbu->u", x, dz)
            self.w[g].grad[1:] += np.einsum("tbv,tbu->vu", hs[:-1], dz)
            self.b[g].grad += dz.sum(axis=(0, 1))
        return dx

    def parameters(self):
        return [self.w[g] for g in self.GATES] + [self.b[g] for g in self.GATES]

    def param_names(self):
        return [f"w_{g}" for g in self.GATES] + [f"b_{g}" for g in self.GATES]

    def spec(self):
        return {"kind": self.kind, "units": self.units}


LAYER_KINDS = {
    "dense": Dense,
    "conv1d": Conv1D,
    "maxpool1d": MaxPool1D,
    "lstm": LSTM,
    "relu": ReLU,
    "tanh": Tanh,
    "flatten": Flatten,
}


def layer_from_spec(spec):
    """Rebuild an (uninitialized) layer from its ``spec()`` dict."""
    kind = spec.get("kind")
    if kind not in LAYER_KINDS:
        raise ValueError(f"unknown layer kind {kind!r}")
    if kind == "dense":
        return Dense(spec["d_in"], spec["d_out"])
    if kind == "conv1d":
        return Conv1D(spec["kernel"], spec["in_channels"], spec["filters"])
    if kind == "lstm":
        return LSTM(spec["units"])
    return LAYER_KINDS[kind]()


class Network:
    """Ordered layer stack with chained forward/backward."""

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self):
        params = []
        for layer in self.layers:
            params.extend(layer.parameters())
        return params

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()
