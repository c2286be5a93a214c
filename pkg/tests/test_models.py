"""Architecture shapes, parameter counts, and the predict contract."""

import numpy as np
import pytest

from fdrcast.errors import ShapeError
from fdrcast.models import (
    Hyperparams,
    build_cnn,
    build_lstm,
    build_model,
    load_model,
    parameter_count,
    save_model,
)
from fdrcast.nn import Network


def cnn_param_formula(l, n):
    flat = ((l - 2) // 2) * n
    conv = 3 * n + n
    return conv + (flat * 128 + 128) + (128 * 64 + 64) + (64 + 1)


def lstm_param_formula(n):
    return 4 * (n * (1 + n) + n) + (n + 1)


def test_lstm_parameter_count_reference_value():
    model = build_lstm(Hyperparams(32, 25, 1200), seed=0)
    assert parameter_count(model) == 2726
    assert parameter_count(model) == lstm_param_formula(25)


def test_cnn_parameter_count_closed_form():
    for l, n in ((3600, 128), (64, 8), (10, 3), (1200, 64)):
        model = build_cnn(Hyperparams(32, n, l), seed=0)
        assert parameter_count(model) == cnn_param_formula(l, n)


def test_cnn_shape_chain_at_full_scale():
    model = build_cnn(Hyperparams(64, 128, 3600), seed=1)
    conv, _, _, _, dense1 = model.network.layers[:5]
    assert conv.spec()["filters"] == 128
    assert dense1.d_in == 1799 * 128 == 230272


def test_cnn_minimal_shape():
    model = build_cnn(Hyperparams(1, 1, 4), seed=0)
    out = model.predict(np.array([1, 0, 1, 1], dtype=np.uint8))
    assert isinstance(out, float)


def test_cnn_rejects_too_short_input_length():
    with pytest.raises(ValueError):
        build_cnn(Hyperparams(1, 1, 3), seed=0)


def test_zero_layer_model_has_zero_parameters():
    from fdrcast.models import TrainedModel
    empty = TrainedModel(kind="cnn", hyperparams=Hyperparams(1, 1, 4),
                         network=Network([]))
    assert parameter_count(empty) == 0


def test_build_determinism_and_seed_sensitivity():
    hp = Hyperparams(32, 5, 20)
    for kind in ("cnn", "lstm"):
        a = build_model(kind, hp, seed=3)
        b = build_model(kind, hp, seed=3)
        c = build_model(kind, hp, seed=4)
        pa = a.network.parameters()
        pb = b.network.parameters()
        pc = c.network.parameters()
        assert all(np.array_equal(x.value, y.value) for x, y in zip(pa, pb))
        assert any(not np.array_equal(x.value, y.value) for x, y in zip(pa, pc))


def test_biases_start_at_zero_weights_do_not():
    model = build_cnn(Hyperparams(32, 4, 16), seed=2)
    conv = model.network.layers[0]
    assert np.all(conv.bias.value == 0)
    assert np.any(conv.filters.value != 0)
    lstm = build_lstm(Hyperparams(32, 4, 16), seed=2).network.layers[0]
    for g in lstm.GATES:
        assert np.all(lstm.b[g].value == 0)
        assert np.any(lstm.w[g].value != 0)


def test_zeroed_lstm_predicts_dense_bias():
    model = build_lstm(Hyperparams(32, 4, 10), seed=0)
    for p in model.network.parameters():
        p.value[...] = 0.0
    head = model.network.layers[-1]
    head.bias.value[...] = 0.37
    for pattern in (np.zeros(10, dtype=np.uint8), np.ones(10, dtype=np.uint8)):
        assert model.predict(pattern) == pytest.approx(0.37, abs=1e-15)


def test_predict_batch_matches_single_rows():
    # BLAS reduces batched and single-row products in different orders, so
    # agreement is to float precision rather than bitwise.
    rng = np.random.Generator(np.random.PCG64(5))
    for kind in ("cnn", "lstm"):
        model = build_model(kind, Hyperparams(32, 6, 30), seed=8)
        pats = (rng.random((67, 30)) < 0.85).astype(np.uint8)
        batch = model.predict(pats)
        singles = np.array([model.predict(pats[i]) for i in range(len(pats))])
        assert np.max(np.abs(batch - singles)) < 1e-12


def test_predict_length_mismatch():
    model = build_lstm(Hyperparams(32, 3, 12), seed=0)
    with pytest.raises(ShapeError):
        model.predict(np.zeros(11, dtype=np.uint8))


def test_predict_is_not_clamped():
    model = build_cnn(Hyperparams(32, 3, 8), seed=0)
    head = model.network.layers[-1]
    head.bias.value[...] = 3.5
    assert model.predict(np.zeros(8, dtype=np.uint8)) > 1.0


def test_unknown_kind():
    with pytest.raises(ValueError):
        build_model("transformer", Hyperparams(32, 3, 8), seed=0)


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(0, 1, 1)
    with pytest.raises(ValueError):
        Hyperparams(1, 1, -4)


def test_save_load_round_trip_keeps_predictions(tmp_path):
    rng = np.random.Generator(np.random.PCG64(6))
    for kind in ("cnn", "lstm"):
        model = build_model(kind, Hyperparams(32, 4, 16), seed=11)
        path = tmp_path / f"{kind}.fdrc"
        save_model(model, str(path))
        loaded = load_model(str(path))
        pats = (rng.random((9, 16)) < 0.8).astype(np.uint8)
        assert np.array_equal(model.predict(pats), loaded.predict(pats))
