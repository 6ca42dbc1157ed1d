"""
Tests for the binary checkpoint format.
"""

import struct

import numpy as np
import pytest

from src.errors import CheckpointFormatError, CorpusIOError, FingerprintError
from src.model import ModelKind, parameter_shapes
from src.trainer import MAGIC, TrainingSession, encode_pairs, load_checkpoint, save_checkpoint
from tests.conftest import fast_train, small_model


@pytest.fixture
def trained(corpus, vocab, model_config):
    session = TrainingSession(model_config, fast_train(epochs=1), vocab, stage="parent")
    session.fit(encode_pairs(corpus, vocab, model_config.max_len))
    return session


def test_round_trip_is_bitwise(trained, tmp_path):
    path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
    loaded = load_checkpoint(path)

    assert loaded.config == trained.config
    assert loaded.fingerprint == trained.fingerprint
    assert loaded.metadata == {"epoch": "1", "stage": "parent"}
    for name in parameter_shapes(trained.config):
        np.testing.assert_array_equal(loaded.params[name].values, trained.params[name].values)
        assert loaded.params[name].dtype == np.float32

    assert loaded.optimizer.step == trained.global_step
    assert set(loaded.optimizer.m) == set(trained.optimizer.m)
    for name, moment in trained.optimizer.v.items():
        np.testing.assert_array_equal(loaded.optimizer.v[name], moment)


def test_aliases_are_rebound(trained, tmp_path):
    loaded = load_checkpoint(save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt"))
    assert loaded.params["decoder.embedding"] is loaded.params["encoder.embedding"]
    assert loaded.params["output.projection"] is loaded.params["encoder.embedding"]


def test_loaded_arrays_are_writable(trained, tmp_path):
    loaded = load_checkpoint(save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt"))
    loaded.params["encoder.embedding"].values[0, 0] += 1.0


def test_same_state_saves_identical_bytes(trained, tmp_path):
    a = save_checkpoint(trained.checkpoint(), tmp_path / "a.ckpt")
    b = save_checkpoint(trained.checkpoint(), tmp_path / "b.ckpt")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(MAGIC)


def test_without_optimizer(trained, tmp_path):
    loaded = load_checkpoint(save_checkpoint(trained.checkpoint(include_optimizer=False), tmp_path / "m.ckpt"))
    assert loaded.optimizer is None


def test_language_model_round_trip(vocab, tmp_path):
    config = small_model(vocab, kind=ModelKind.LANGUAGE_MODEL)
    session = TrainingSession(config, fast_train(), vocab)
    loaded = load_checkpoint(save_checkpoint(session.checkpoint(), tmp_path / "lm.ckpt"))
    assert loaded.config.kind == ModelKind.LANGUAGE_MODEL
    assert "encoder.embedding" not in loaded.params


def test_resume_keeps_optimizer_state(trained, tmp_path, vocab):
    path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
    resumed = TrainingSession.from_checkpoint(load_checkpoint(path), fast_train(), vocab, keep_optimizer=True)
    assert resumed.global_step == trained.global_step
    fresh = TrainingSession.from_checkpoint(load_checkpoint(path), fast_train(), vocab)
    assert fresh.global_step == 0


class TestCorruptFiles:
    def test_bad_magic(self, trained, tmp_path):
        path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
        data = path.read_bytes()
        path.write_bytes(b"XXXXXX" + data[len(MAGIC):])
        with pytest.raises(CheckpointFormatError, match="magic"):
            load_checkpoint(path)

    def test_truncated(self, trained, tmp_path):
        path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(CheckpointFormatError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_bytes(self, trained, tmp_path):
        path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(CheckpointFormatError, match="trailing"):
            load_checkpoint(path)

    def test_undecodable_tensor_name(self, trained, tmp_path):
        path = save_checkpoint(trained.checkpoint(), tmp_path / "model.ckpt")
        data = bytearray(path.read_bytes())
        (config_len,) = struct.unpack_from("<I", data, len(MAGIC))
        # magic, config length, config, fingerprint, optimizer flag, count, name length
        first_name = len(MAGIC) + 4 + config_len + 8 + 1 + 4 + 2
        data[first_name] = 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointFormatError, match="UTF-8"):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusIOError):
            load_checkpoint(tmp_path / "absent.ckpt")


class TestFingerprint:
    def test_match_passes(self, trained):
        trained.checkpoint().check_fingerprint(trained.fingerprint)

    def test_mismatch_raises(self, trained):
        with pytest.raises(FingerprintError):
            trained.checkpoint().check_fingerprint(trained.fingerprint ^ 1)

    def test_force_overrides(self, trained):
        trained.checkpoint().check_fingerprint(trained.fingerprint ^ 1, force=True)
