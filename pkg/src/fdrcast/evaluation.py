"""Prediction-error statistics, inference benchmarks, and report files.

Sign convention everywhere: error e = prediction - target, so a negative
minimum means under-prediction during delivery-ratio drops. Squared-error
statistics are kept in raw (ratio squared) units; absolute and signed error
statistics are in percent. Standard deviations are population (divide by
N). Percentiles interpolate linearly between closest ranks.
"""

import csv
import json
import os
import platform
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ShapeError
from .models import parameter_count


def percentile(values, q):
    """Linear-interpolation percentile: rank h = (n-1) * q / 100 on the
    sorted values, interpolating between the two closest ranks."""
    if not 0.0 <= q <= 100.0:
        raise ValueError(f"q must be in [0,100], got {q}")
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ShapeError("percentile of an empty sequence")
    h = (arr.size - 1) * q / 100.0
    lo = int(np.floor(h))
    frac = h - lo
    if frac == 0.0 or lo + 1 >= arr.size:
        return float(arr[lo])
    return float(arr[lo] + frac * (arr[lo + 1] - arr[lo]))


@dataclass(frozen=True)
class ErrorStats:
    """The full error-statistic suite for one model on one test set.

    e2_* fields are raw squared-ratio units; *_pct fields are percent.
    """

    mu_e2: float
    e2_p90: float
    e2_p95: float
    e2_p99: float
    e2_max: float
    mu_abs_e_pct: float
    sigma_abs_e_pct: float
    abs_e_p90_pct: float
    abs_e_p95_pct: float
    abs_e_p99_pct: float
    abs_e_max_pct: float
    e_min_pct: float
    e_p5_pct: float
    e_p95_pct: float
    e_max_pct: float
    sample_count: int


def compute_error_stats(predictions, targets):
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise ShapeError(
            f"predictions {predictions.shape} and targets {targets.shape} "
            "must be equal-length 1-D sequences"
        )
    if predictions.size == 0:
        raise ShapeError("compute_error_stats needs at least one pair")
    e = predictions - targets
    e2 = e ** 2
    e_pct = 100.0 * e
    abs_pct = np.abs(e_pct)
    return ErrorStats(
        mu_e2=float(np.mean(e2)),
        e2_p90=percentile(e2, 90),
        e2_p95=percentile(e2, 95),
        e2_p99=percentile(e2, 99),
        e2_max=float(np.max(e2)),
        mu_abs_e_pct=float(np.mean(abs_pct)),
        sigma_abs_e_pct=float(np.std(abs_pct)),
        abs_e_p90_pct=percentile(abs_pct, 90),
        abs_e_p95_pct=percentile(abs_pct, 95),
        abs_e_p99_pct=percentile(abs_pct, 99),
        abs_e_max_pct=float(np.max(abs_pct)),
        e_min_pct=float(np.min(e_pct)),
        e_p5_pct=percentile(e_pct, 5),
        e_p95_pct=percentile(e_pct, 95),
        e_max_pct=float(np.max(e_pct)),
        sample_count=int(predictions.size),
    )


@dataclass(frozen=True)
class ComplexityReport:
    mean_response_time_ms: float
    memory_footprint_mb: float
    memory_peak_mb: float
    sample_count: int
    hardware_label: str


def bench_inference(model, patterns, repetitions=100, warmup=10):
    """Time single-pattern predict calls and sample process memory.

    After ``warmup`` untimed predictions, ``repetitions`` timed ones run,
    cycling through the given patterns. Only the predict call is timed.
    Memory is the process resident set sampled once per repetition (mean as
    footprint, max as peak); when that is unavailable an instrumented
    allocator stands in, and either way the method is named in the label.
    """
    if repetitions < 100:
        raise ValueError(f"repetitions must be >= 100, got {repetitions}")
    if warmup < 10:
        raise ValueError(f"warmup must be >= 10, got {warmup}")
    arr = np.asarray(patterns)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[0] == 0:
        raise ShapeError("bench_inference needs at least one pattern")
    rows = [np.ascontiguousarray(arr[i]) for i in range(arr.shape[0])]
    for i in range(warmup):
        model.predict(rows[i % len(rows)])

    method = "rss-sampled"
    proc = None
    try:
        import psutil
        proc = psutil.Process()
    except Exception:
        import tracemalloc
        method = "traced-alloc"
        tracemalloc.start()

    times = np.empty(repetitions)
    mem = np.empty(repetitions)
    for r in range(repetitions):
        row = rows[r % len(rows)]
        t0 = time.perf_counter()
        model.predict(row)
        times[r] = time.perf_counter() - t0
        if proc is not None:
            mem[r] = proc.memory_info().rss
        else:
            import tracemalloc
            current, _peak = tracemalloc.get_traced_memory()
            mem[r] = current
    if proc is None:
        import tracemalloc
        _current, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        peak_bytes = float(peak)
    else:
        peak_bytes = float(np.max(mem))

    label = (
        f"{platform.platform()}; python {platform.python_version()}; "
        f"numpy {np.__version__}; memory={method}; "
        f"params={parameter_count(model)}"
    )
    return ComplexityReport(
        mean_response_time_ms=float(np.mean(times) * 1e3),
        memory_footprint_mb=float(np.mean(mem) / 1e6),
        memory_peak_mb=peak_bytes / 1e6,
        sample_count=repetitions,
        hardware_label=label,
    )


ACCURACY_COLUMNS = [
    "mu_e2", "e2_p90", "e2_p95", "e2_p99", "e2_max",
    "mu_abs_e_pct", "sigma_abs_e_pct",
    "abs_e_p90_pct", "abs_e_p95_pct", "abs_e_p99_pct", "abs_e_max_pct",
    "e_min_pct", "e_p5_pct", "e_p95_pct", "e_max_pct",
]
# The first five columns are written in thousandths so the accuracy table
# reads in the customary units; the scaling is recorded in the header names.
_E2_SCALE = 1e3

ACCURACY_HEADER = [
    "model",
    "mu_e2_1e-3", "e2_p90_1e-3", "e2_p95_1e-3", "e2_p99_1e-3", "e2_max_1e-3",
    "mu_abs_e_pct", "sigma_abs_e_pct",
    "abs_e_p90_pct", "abs_e_p95_pct", "abs_e_p99_pct", "abs_e_max_pct",
    "e_min_pct", "e_p5_pct", "e_p95_pct", "e_max_pct",
]

COMPLEXITY_HEADER = [
    "model", "mean_response_time_ms", "memory_footprint_mb", "memory_peak_mb",
]

REPORT_FOOTER = (
    "Conventions: error e = prediction - target (negative minimum means "
    "under-prediction during delivery drops); squared-error columns in "
    "units of 1e-3, error columns in percent; standard deviations are "
    "population (divide by N); percentiles interpolate linearly between "
    "closest ranks."
)


def _accuracy_row(name, stats):
    values = []
    for i, col in enumerate(ACCURACY_COLUMNS):
        v = getattr(stats, col)
        values.append(v * _E2_SCALE if i < 5 else v)
    return [name] + values


def report(stats_by_model, complexity_by_model, out_dir):
    """Write table2.csv / table3.csv / report.txt / report.json.

    Either mapping may be empty; only tables with data are written. CSV
    numbers use repr so a parse of the file round-trips exactly.
    """
    if not stats_by_model and not complexity_by_model:
        raise ValueError("report needs at least one model's results")
    os.makedirs(out_dir, exist_ok=True)
    text_blocks = []

    if stats_by_model:
        path = os.path.join(out_dir, "table2.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(ACCURACY_HEADER)
            for name in sorted(stats_by_model):
                row = _accuracy_row(name, stats_by_model[name])
                writer.writerow([row[0]] + [repr(v) for v in row[1:]])
        text_blocks.append(_render_text_table(
            "Prediction accuracy",
            ACCURACY_HEADER,
            [_accuracy_row(n, stats_by_model[n]) for n in sorted(stats_by_model)],
        ))

    if complexity_by_model:
        path = os.path.join(out_dir, "table3.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(COMPLEXITY_HEADER)
            for name in sorted(complexity_by_model):
                c = complexity_by_model[name]
                writer.writerow([name] + [repr(v) for v in (
                    c.mean_response_time_ms, c.memory_footprint_mb,
                    c.memory_peak_mb,
                )])
        rows = [
            [n,
             complexity_by_model[n].mean_response_time_ms,
             complexity_by_model[n].memory_footprint_mb,
             complexity_by_model[n].memory_peak_mb]
            for n in sorted(complexity_by_model)
        ]
        text_blocks.append(_render_text_table(
            "Computational complexity", COMPLEXITY_HEADER, rows))
        for n in sorted(complexity_by_model):
            text_blocks.append(
                f"  {n}: {complexity_by_model[n].sample_count} timed calls; "
                f"{complexity_by_model[n].hardware_label}"
            )

    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n\n".join(text_blocks))
        fh.write("\n\n" + REPORT_FOOTER + "\n")

    payload = {
        "accuracy": {n: asdict(s) for n, s in stats_by_model.items()},
        "complexity": {n: asdict(c) for n, c in complexity_by_model.items()},
        "conventions": REPORT_FOOTER,
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def _render_text_table(title, header, rows):
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.4g}"
        return str(v)

    cells = [header] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = [title, ""]
    for r, row in enumerate(cells):
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
