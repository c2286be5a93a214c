"""Figure rendering smoke tests: files appear and are real PNGs."""

import numpy as np

from fdrcast.figures import (
    error_histogram_figure,
    forecast_figure,
    training_curve_figure,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def assert_png(path):
    data = path.read_bytes()
    assert data[:8] == PNG_MAGIC
    assert len(data) > 1000


def test_forecast_figure(tmp_path):
    rng = np.random.Generator(np.random.PCG64(0))
    targets = rng.random(120)
    out = tmp_path / "forecast.png"
    forecast_figure(out, targets, targets + rng.normal(0, 0.05, 120),
                    sample_period_s=0.5, anchors=np.arange(120) * 10,
                    label="cnn")
    assert_png(out)


def test_forecast_figure_default_anchors(tmp_path):
    out = tmp_path / "forecast.png"
    forecast_figure(out, [0.9, 0.8, 0.85], [0.88, 0.82, 0.8])
    assert_png(out)


def test_error_histogram_figure(tmp_path):
    rng = np.random.Generator(np.random.PCG64(1))
    out = tmp_path / "errors.png"
    error_histogram_figure(out, rng.normal(0, 3, 500), label="lstm")
    assert_png(out)


def test_training_curve_figure(tmp_path):
    out = tmp_path / "curve.png"
    training_curve_figure(out, {"cnn": [0.5, 0.2, 0.1], "lstm": [0.4, 0.3]})
    assert_png(out)
