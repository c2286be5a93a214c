"""Error statistics, percentile method, benchmark, and report files."""

import csv
import json
import math

import numpy as np
import pytest

from fdrcast.errors import ShapeError
from fdrcast.evaluation import (
    ACCURACY_HEADER,
    COMPLEXITY_HEADER,
    ComplexityReport,
    ErrorStats,
    bench_inference,
    compute_error_stats,
    percentile,
    report,
)
from fdrcast.models import Hyperparams, build_model


class TestPercentile:
    def test_hand_values(self):
        assert percentile([1, 2, 3, 4], 100) == 4.0
        assert percentile([1, 2, 3, 4], 0) == 1.0
        assert percentile([1, 2, 3, 4], 50) == 2.5
        assert percentile([1, 2, 3, 4], 25) == 1.75
        assert percentile([7.0], 90) == 7.0

    def test_order_invariant(self):
        assert percentile([4, 1, 3, 2], 50) == 2.5

    def test_matches_numpy_linear_interpolation(self):
        rng = np.random.Generator(np.random.PCG64(1))
        for _ in range(200):
            values = rng.normal(size=int(rng.integers(1, 60)))
            q = float(rng.random() * 100)
            assert percentile(values, q) == pytest.approx(
                float(np.percentile(values, q, method="linear")),
                rel=1e-12, abs=1e-12,
            )

    def test_bounds(self):
        with pytest.raises(ValueError):
            percentile([1, 2], -0.1)
        with pytest.raises(ValueError):
            percentile([1, 2], 100.1)
        with pytest.raises(ShapeError):
            percentile([], 50)


def brute_force_stats(predictions, targets):
    """Independent recomputation with plain Python loops and numpy percentile."""
    e = [float(p) - float(t) for p, t in zip(predictions, targets)]
    n = len(e)
    e2 = [v * v for v in e]
    abs_pct = [abs(v) * 100.0 for v in e]
    e_pct = [v * 100.0 for v in e]
    mu_abs = sum(abs_pct) / n
    var_abs = sum((v - mu_abs) ** 2 for v in abs_pct) / n
    pc = lambda vals, q: float(np.percentile(vals, q, method="linear"))
    return ErrorStats(
        mu_e2=sum(e2) / n,
        e2_p90=pc(e2, 90), e2_p95=pc(e2, 95), e2_p99=pc(e2, 99),
        e2_max=max(e2),
        mu_abs_e_pct=mu_abs, sigma_abs_e_pct=math.sqrt(var_abs),
        abs_e_p90_pct=pc(abs_pct, 90), abs_e_p95_pct=pc(abs_pct, 95),
        abs_e_p99_pct=pc(abs_pct, 99), abs_e_max_pct=max(abs_pct),
        e_min_pct=min(e_pct), e_p5_pct=pc(e_pct, 5),
        e_p95_pct=pc(e_pct, 95), e_max_pct=max(e_pct),
        sample_count=n,
    )


class TestErrorStats:
    def test_hand_example(self):
        # errors are +1 and 0
        s = compute_error_stats([1.0, 0.0], [0.0, 0.0])
        assert s.mu_e2 == 0.5
        assert s.e2_max == 1.0
        assert s.mu_abs_e_pct == 50.0
        assert s.sigma_abs_e_pct == 50.0
        assert s.abs_e_max_pct == 100.0
        assert s.e_min_pct == 0.0
        assert s.e_max_pct == 100.0
        assert s.sample_count == 2

    def test_sign_convention_is_prediction_minus_target(self):
        s = compute_error_stats([0.2], [0.9])
        assert s.e_min_pct == pytest.approx(-70.0)
        assert s.e_max_pct == pytest.approx(-70.0)

    def test_brute_force_oracle(self):
        rng = np.random.Generator(np.random.PCG64(2))
        for _ in range(300):
            n = int(rng.integers(1, 80))
            targets = rng.random(n)
            predictions = np.clip(targets + rng.normal(0, 0.1, n), 0, 1)
            got = compute_error_stats(predictions, targets)
            want = brute_force_stats(predictions, targets)
            for field in ErrorStats.__dataclass_fields__:
                assert getattr(got, field) == pytest.approx(
                    getattr(want, field), rel=1e-12, abs=1e-12
                ), field

    def test_unit_identities(self):
        rng = np.random.Generator(np.random.PCG64(3))
        predictions = rng.random(500)
        targets = rng.random(500)
        s = compute_error_stats(predictions, targets)
        # mean of (|e| pct)^2 equals mu_e2 in raw units times 1e4
        abs_pct = np.abs(predictions - targets) * 100.0
        assert float(np.mean(abs_pct ** 2)) == pytest.approx(
            s.mu_e2 * 1e4, rel=1e-9
        )
        assert s.e2_max == pytest.approx((s.abs_e_max_pct / 100.0) ** 2, rel=1e-12)

    def test_ordering_invariants(self):
        rng = np.random.Generator(np.random.PCG64(4))
        s = compute_error_stats(rng.random(200), rng.random(200))
        assert s.e2_p90 <= s.e2_p95 <= s.e2_p99 <= s.e2_max
        assert s.abs_e_p90_pct <= s.abs_e_p95_pct <= s.abs_e_p99_pct
        assert s.abs_e_p99_pct <= s.abs_e_max_pct
        assert s.e_min_pct <= s.e_p5_pct <= s.e_p95_pct <= s.e_max_pct
        assert s.sigma_abs_e_pct >= 0

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            compute_error_stats([1.0, 2.0], [1.0])
        with pytest.raises(ShapeError):
            compute_error_stats([], [])
        with pytest.raises(ShapeError):
            compute_error_stats([[1.0]], [[1.0]])


class TestBench:
    def model_and_patterns(self):
        model = build_model("cnn", Hyperparams(8, 2, 16), seed=0)
        rng = np.random.Generator(np.random.PCG64(5))
        return model, (rng.random((4, 16)) < 0.9).astype(np.float64)

    def test_report_fields(self):
        model, patterns = self.model_and_patterns()
        rep = bench_inference(model, patterns, repetitions=100, warmup=10)
        assert rep.mean_response_time_ms > 0
        assert rep.memory_footprint_mb > 0
        assert rep.memory_peak_mb >= rep.memory_footprint_mb
        assert rep.sample_count == 100
        assert "memory=" in rep.hardware_label
        assert "numpy" in rep.hardware_label

    def test_minimum_repetitions_and_warmup_enforced(self):
        model, patterns = self.model_and_patterns()
        with pytest.raises(ValueError):
            bench_inference(model, patterns, repetitions=99)
        with pytest.raises(ValueError):
            bench_inference(model, patterns, repetitions=100, warmup=9)

    def test_single_pattern_accepted(self):
        model, patterns = self.model_and_patterns()
        rep = bench_inference(model, patterns[0], repetitions=100, warmup=10)
        assert rep.sample_count == 100

    def test_no_patterns_rejected(self):
        model, patterns = self.model_and_patterns()
        with pytest.raises(ShapeError):
            bench_inference(model, patterns[:0], repetitions=100)


def sample_stats(seed=6, n=50):
    rng = np.random.Generator(np.random.PCG64(seed))
    return compute_error_stats(rng.random(n), rng.random(n))


def sample_complexity():
    return ComplexityReport(
        mean_response_time_ms=12.5,
        memory_footprint_mb=140.0,
        memory_peak_mb=150.25,
        sample_count=100,
        hardware_label="test-host",
    )


class TestReport:
    def test_file_set_and_headers(self, tmp_path):
        report({"cnn": sample_stats()}, {"cnn": sample_complexity()}, str(tmp_path))
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["report.json", "report.txt", "table2.csv", "table3.csv"]
        with open(tmp_path / "table2.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ACCURACY_HEADER
        assert len(rows) == 2 and rows[1][0] == "cnn"
        with open(tmp_path / "table3.csv", newline="", encoding="utf-8") as fh:
            rows3 = list(csv.reader(fh))
        assert rows3[0] == COMPLEXITY_HEADER

    def test_accuracy_csv_values_round_trip_with_e2_scaling(self, tmp_path):
        stats = sample_stats(seed=7)
        report({"m": stats}, {}, str(tmp_path))
        with open(tmp_path / "table2.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        values = [float(v) for v in rows[1][1:]]
        assert values[0] == stats.mu_e2 * 1e3
        assert values[4] == stats.e2_max * 1e3
        assert values[5] == stats.mu_abs_e_pct
        assert values[14] == stats.e_max_pct

    def test_complexity_csv_round_trip(self, tmp_path):
        comp = sample_complexity()
        report({}, {"lstm": comp}, str(tmp_path))
        with open(tmp_path / "table3.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[1] == [
            "lstm", repr(comp.mean_response_time_ms),
            repr(comp.memory_footprint_mb), repr(comp.memory_peak_mb),
        ]

    def test_models_sorted_in_csv(self, tmp_path):
        report(
            {"lstm": sample_stats(8), "cnn": sample_stats(9)}, {}, str(tmp_path)
        )
        with open(tmp_path / "table2.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert [r[0] for r in rows[1:]] == ["cnn", "lstm"]

    def test_single_section_writes_only_its_table(self, tmp_path):
        report({"cnn": sample_stats()}, {}, str(tmp_path / "a"))
        assert not (tmp_path / "a" / "table3.csv").exists()
        assert (tmp_path / "a" / "table2.csv").exists()
        report({}, {"cnn": sample_complexity()}, str(tmp_path / "b"))
        assert not (tmp_path / "b" / "table2.csv").exists()
        assert (tmp_path / "b" / "table3.csv").exists()

    def test_empty_inputs_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            report({}, {}, str(tmp_path))

    def test_text_report_mentions_conventions(self, tmp_path):
        report({"cnn": sample_stats()}, {"cnn": sample_complexity()}, str(tmp_path))
        text = (tmp_path / "report.txt").read_text(encoding="utf-8")
        assert "prediction - target" in text
        assert "population" in text
        assert "test-host" in text

    def test_json_payload_reconstructs_stats(self, tmp_path):
        stats = sample_stats(10)
        comp = sample_complexity()
        report({"cnn": stats}, {"cnn": comp}, str(tmp_path))
        with open(tmp_path / "report.json", encoding="utf-8") as fh:
            payload = json.load(fh)
        assert ErrorStats(**payload["accuracy"]["cnn"]) == stats
        assert ComplexityReport(**payload["complexity"]["cnn"]) == comp
