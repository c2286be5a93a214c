"""Outcome traces, delivery-ratio targets, sliding windows, and splits.

An outcome trace is a binary sequence: one symbol per probe transmission,
1 for an acknowledged frame and 0 for a lost one, sampled at a fixed period
(0.5 s by default). The forecast target at anchor i is the mean of the
horizon outcomes strictly after i, so a (pattern, target) pair couples the
l outcomes ending at i with the delivery ratio over the following window.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParseError, ShapeError

DEFAULT_SAMPLE_PERIOD_S = 0.5


@dataclass
class OutcomeSeries:
    """Binary outcome trace stored as uint8 with metadata.

    Split products may be empty; loaders and statistics reject empty series
    at their own boundaries.
    """

    outcomes: np.ndarray
    sample_period_s: float = DEFAULT_SAMPLE_PERIOD_S
    origin_label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.outcomes, dtype=np.uint8)
        if arr.ndim != 1:
            raise ShapeError(f"outcomes must be 1-D, got shape {arr.shape}")
        if arr.size and arr.max() > 1:
            raise ValueError("outcomes must contain only 0 and 1")
        if not self.sample_period_s > 0:
            raise ValueError(f"sample_period_s must be > 0, got {self.sample_period_s}")
        self.outcomes = arr

    def __len__(self):
        return int(self.outcomes.size)


@dataclass
class WindowedDataset:
    """Aligned (pattern, target) pairs cut from one outcome series.

    Patterns stay uint8 until a model converts them; targets are float64
    ratios in [0,1] with denominator exactly ``horizon``. ``anchors`` holds
    the series index each pattern ends at, which places predictions on the
    original time axis.
    """

    patterns: np.ndarray
    targets: np.ndarray
    window_length: int
    horizon: int
    stride: int
    anchors: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.patterns.shape[0] != self.targets.shape[0]:
            raise ShapeError(
                f"pattern/target counts differ: {self.patterns.shape[0]} "
                f"vs {self.targets.shape[0]}"
            )
        if self.anchors is None:
            self.anchors = np.arange(self.patterns.shape[0], dtype=np.int64)

    def __len__(self):
        return int(self.targets.size)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split fractions; they must sum to 1."""

    train_fraction: float = 0.5
    validation_fraction: float = 0.1667
    test_fraction: float = 0.3333

    def __post_init__(self):
        fs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(f < 0 for f in fs):
            raise ValueError(f"fractions must be >= 0, got {fs}")
        if abs(sum(fs) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(fs)!r}")


_BITLINE_OK = frozenset(b"01\r\n")


def load_outcomes(source, format="bitline", sample_period_s=DEFAULT_SAMPLE_PERIOD_S):
    """Decode a trace from a path, bytes, or binary file object.

    ``bitline`` is a run of ASCII '0'/'1' with newlines ignored; ``csv`` is
    one outcome per row with an optional ``outcome`` header. Any other
    symbol raises ParseError carrying its byte offset.
    """
    label = "stream"
    if isinstance(source, str):
        label = source
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
        label = getattr(source, "name", "stream")
        if isinstance(data, str):
            data = data.encode("ascii")
    else:
        raise TypeError(f"unsupported source type {type(source).__name__}")

    if format == "bitline":
        outcomes = _decode_bitline(data)
    elif format == "csv":
        outcomes = _decode_csv(data)
    else:
        raise ValueError(f"unknown trace format {format!r}")
    if outcomes.size == 0:
        raise InsufficientDataError(f"{label}: trace contains no outcomes")
    return OutcomeSeries(outcomes, sample_period_s=sample_period_s, origin_label=label)


def _decode_bitline(data):
    raw = np.frombuffer(data, dtype=np.uint8)
    keep = (raw != 10) & (raw != 13)
    symbols = raw[keep]
    bad = (symbols != 48) & (symbols != 49)
    if bad.any():
        # report the offset in the original byte stream, not the filtered one
        positions = np.flatnonzero(keep)
        offset = int(positions[int(np.argmax(bad))])
        raise ParseError(
            f"invalid symbol {chr(raw[offset])!r} at byte offset {offset}",
            offset=offset,
        )
    return (symbols - 48).astype(np.uint8)


def _decode_csv(data):
    values = []
    offset = 0
    first = True
    for line in data.split(b"\n"):
        stripped = line.strip()
        if stripped == b"" or (first and stripped.lower() == b"outcome"):
            first = False
            offset += len(line) + 1
            continue
        first = False
        if stripped not in (b"0", b"1"):
            at = offset + line.index(stripped)
            raise ParseError(
                f"invalid row {stripped.decode('ascii', 'replace')!r} "
                f"at byte offset {at}",
                offset=at,
            )
        values.append(stripped == b"1")
        offset += len(line) + 1
    return np.asarray(values, dtype=np.uint8)


def save_outcomes(series, path, format="bitline", line_width=100):
    """Write a trace file; the byte layout is fixed so reruns are identical."""
    x = series.outcomes
    if format == "bitline":
        digits = (x + 48).astype(np.uint8).tobytes()
        lines = [digits[i:i + line_width] for i in range(0, len(digits), line_width)]
        payload = b"\n".join(lines) + b"\n" if lines else b""
    elif format == "csv":
        payload = b"outcome\n" + b"".join(b"1\n" if v else b"0\n" for v in x)
    else:
        raise ValueError(f"unknown trace format {format!r}")
    with open(path, "wb") as fh:
        fh.write(payload)


def _prefix_sums(outcomes):
    sums = np.zeros(outcomes.size + 1, dtype=np.int64)
    np.cumsum(outcomes, dtype=np.int64, out=sums[1:])
    return sums


def compute_target(series, i, horizon):
    """Delivery ratio over the ``horizon`` outcomes strictly after index i.

    0-based: the value at anchor i averages outcomes i+1 .. i+horizon, so
    i + horizon must stay below the series length.
    """
    n = len(series)
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if i < 0 or i + horizon >= n:
        raise InsufficientDataError(
            f"target window [{i + 1}, {i + horizon}] exceeds series of length {n}"
        )
    total = int(np.sum(series.outcomes[i + 1:i + 1 + horizon], dtype=np.int64))
    return total / horizon


def window_count(length, l, horizon, stride):
    """Number of (pattern, target) pairs a series of ``length`` yields."""
    at_stride_1 = length - l - horizon + 1
    if at_stride_1 < 1:
        return 0
    return -(-at_stride_1 // stride)


def make_windows(series, l, horizon, stride=1):
    """Cut every admissible (pattern, target) pair, one anchor per stride.

    The pattern is the l outcomes ending at the anchor inclusive; the target
    averages the ``horizon`` outcomes after it. Anchors run from l-1 upward
    every ``stride`` positions.
    """
    if l < 1 or horizon < 1 or stride < 1:
        raise ValueError(
            f"l, horizon, stride must be >= 1, got {l}, {horizon}, {stride}"
        )
    n = len(series)
    if n < l + horizon:
        raise InsufficientDataError(
            f"series of length {n} too short for windows: "
            f"needs at least l + horizon = {l + horizon}"
        )
    anchors = np.arange(l - 1, n - horizon, stride, dtype=np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(series.outcomes, l)
    patterns = np.ascontiguousarray(windows[anchors - (l - 1)])
    sums = _prefix_sums(series.outcomes)
    totals = sums[anchors + 1 + horizon] - sums[anchors + 1]
    targets = totals.astype(np.float64) / horizon
    return WindowedDataset(
        patterns=patterns,
        targets=targets,
        window_length=l,
        horizon=horizon,
        stride=stride,
        anchors=anchors,
    )


def chronological_split(series, spec=None):
    """Split into contiguous train/validation/test segments, in order.

    Boundaries fall at floor(fraction * length) cumulative; the remainder
    goes to test. Segments can be empty when a fraction is 0.
    """
    spec = spec or SplitSpec()
    n = len(series)
    n_train = int(np.floor(spec.train_fraction * n))
    n_val = int(np.floor(spec.validation_fraction * n))
    parts = []
    bounds = [(0, n_train), (n_train, n_train + n_val), (n_train + n_val, n)]
    for name, (a, b) in zip(("train", "validation", "test"), bounds):
        parts.append(OutcomeSeries(
            series.outcomes[a:b].copy(),
            sample_period_s=series.sample_period_s,
            origin_label=f"{series.origin_label}[{name}]" if series.origin_label else name,
        ))
    return tuple(parts)


def class_balance(series):
    """(delivered fraction, lost fraction) of a nonempty series."""
    n = len(series)
    if n == 0:
        raise InsufficientDataError("class_balance of an empty series")
    success = float(np.sum(series.outcomes, dtype=np.int64)) / n
    return success, 1.0 - success
