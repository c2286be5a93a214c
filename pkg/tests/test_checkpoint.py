"""Model file format: determinism, round-trips, corruption handling."""

import numpy as np
import pytest

from fdrcast.errors import CheckpointError
from fdrcast.models import Hyperparams, build_model, load_model, save_model
from fdrcast.nn import load_checkpoint, save_checkpoint


def _model(seed=5):
    return build_model("lstm", Hyperparams(32, 3, 12), seed=seed)


def test_round_trip_preserves_predictions_bit_exactly(tmp_path):
    model = _model()
    model.val_loss_trace = [0.5, 0.25]
    model.best_epoch = 2
    path = tmp_path / "m.fdrc"
    save_model(model, str(path), meta={"note": "x"})
    loaded = load_model(str(path))
    rng = np.random.Generator(np.random.PCG64(0))
    pats = (rng.random((6, 12)) < 0.8).astype(np.uint8)
    assert np.array_equal(model.predict(pats), loaded.predict(pats))
    assert loaded.kind == "lstm"
    assert loaded.hyperparams == model.hyperparams
    assert loaded.val_loss_trace == [0.5, 0.25]
    assert loaded.best_epoch == 2


def test_identical_inputs_identical_bytes(tmp_path):
    a, b = tmp_path / "a.fdrc", tmp_path / "b.fdrc"
    save_model(_model(), str(a), meta={"seed": 5})
    save_model(_model(), str(b), meta={"seed": 5})
    assert a.read_bytes() == b.read_bytes()


def test_different_seeds_different_bytes(tmp_path):
    a, b = tmp_path / "a.fdrc", tmp_path / "b.fdrc"
    save_model(_model(seed=5), str(a))
    save_model(_model(seed=6), str(b))
    assert a.read_bytes() != b.read_bytes()


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.fdrc"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(CheckpointError) as err:
        load_checkpoint(str(path))
    assert "magic" in str(err.value)


def test_truncated_buffer_rejected(tmp_path):
    path = tmp_path / "m.fdrc"
    save_model(_model(), str(path))
    blob = path.read_bytes()
    path.write_bytes(blob[:-16])
    with pytest.raises(CheckpointError) as err:
        load_checkpoint(str(path))
    assert "truncated" in str(err.value) or "missing" in str(err.value)


def test_trailing_garbage_rejected(tmp_path):
    path = tmp_path / "m.fdrc"
    save_model(_model(), str(path))
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(CheckpointError) as err:
        load_checkpoint(str(path))
    assert "trailing" in str(err.value)


def test_unreadable_header_rejected(tmp_path):
    import struct
    path = tmp_path / "m.fdrc"
    header = b"{not json"
    path.write_bytes(b"FDRC" + struct.pack("<I", 1) + struct.pack("<Q", len(header)) + header)
    with pytest.raises(CheckpointError):
        load_checkpoint(str(path))


def test_generic_network_checkpoint(tmp_path):
    from fdrcast import nn
    rng = np.random.Generator(np.random.PCG64(3))
    net = nn.Network([nn.Conv1D(3, 1, 2), nn.ReLU(), nn.MaxPool1D(),
                      nn.Flatten(), nn.Dense(4, 1)])
    for p in net.parameters():
        p.value[...] = rng.standard_normal(p.shape)
    path = tmp_path / "net.fdrc"
    save_checkpoint(str(path), "cnn", {"batch_size": 1, "width": 2, "input_length": 6},
                    net, [1.0], 1)
    ck = load_checkpoint(str(path))
    x = rng.standard_normal((2, 6, 1))
    assert np.array_equal(net.forward(x), ck.network.forward(x))
