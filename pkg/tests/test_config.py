"""
Tests for experiment config files.
"""

from pathlib import Path

import pytest

from src.config import ExperimentConfig, coerce_value, format_value
from src.decoding import FusionMode, SearchStrategy
from src.errors import ConfigError
from src.model import ModelKind


def write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "experiment.conf"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_parses_every_section(tmp_path):
    path = write_config(
        tmp_path,
        "# child pair\n"
        "run.recipe=transfer\n"
        "data.train_src=data/train.t\n"
        "data.vocab_size=600\n"
        "model.profile=desk\n"
        "model.d_model=32\n"
        "train.epochs=3\n"
        "train.freeze=encoder.embedding,decoder.*\n"
        "decode.strategy=greedy\n"
        "fusion.mode=shallow\n"
        "fusion.weight=0.01\n"
        "transfer.parent_epochs=2\n"
        "backtranslation.ratio=none\n",
    )
    config = ExperimentConfig.load(path)
    assert config.source == path
    assert config.run.recipe == "transfer"
    assert config.data.train_src == tmp_path / "data" / "train.t"
    assert config.data.vocab_size == 600
    assert config.model.d_model == 32
    assert config.train.epochs == 3
    assert config.train.freeze == ("encoder.embedding", "decoder.*")
    assert config.decode.strategy == SearchStrategy.GREEDY
    assert config.fusion.mode == FusionMode.SHALLOW
    assert config.transfer.parent_epochs == 2
    assert config.backtranslation.ratio is None


def test_defaults():
    config = ExperimentConfig.from_mapping({})
    assert config.fusion.weight == 0.003
    assert config.backtranslation.ratio == 8.0
    assert config.model.profile == "desk"


def test_unknown_key_and_section(tmp_path):
    with pytest.raises(ConfigError, match="train.epoch"):
        ExperimentConfig.from_mapping({"train.epoch": "3"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"optim.lr": "3"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"epochs": "3"})


def test_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"train.epochs": "many"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"model.share_embeddings": "maybe"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"train.epochs": "-1"})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "absent.conf")


def test_to_lines_round_trips(tmp_path):
    config = ExperimentConfig.from_mapping(
        {"train.freeze": "encoder.*", "data.train_src": "/data/train.t", "fusion.mode": "postnorm"}
    )
    lines = config.to_lines()
    assert "train.freeze=encoder.*" in lines
    assert "fusion.mode=postnorm" in lines
    assert "data.valid_src=" in lines
    values = dict(line.split("=", 1) for line in lines)
    again = ExperimentConfig.from_mapping(values)
    assert again.to_lines() == lines


def test_model_config_applies_overrides():
    config = ExperimentConfig.from_mapping({"model.d_model": "32", "model.n_heads": "2", "model.max_len": "64"})
    model = config.model_config(vocab_size=100, kind=ModelKind.LANGUAGE_MODEL)
    assert (model.d_model, model.n_heads, model.n_layers, model.max_len) == (32, 2, 2, 64)
    assert model.kind == ModelKind.LANGUAGE_MODEL


def test_validation_decoding_is_plain():
    config = ExperimentConfig.from_mapping({"fusion.mode": "shallow", "decode.strategy": "beam"})
    assert config.decode_config().fusion.mode == FusionMode.SHALLOW
    validation = config.decode_config(validation=True)
    assert validation.strategy == SearchStrategy.GREEDY
    assert not validation.fusion.uses_lm


def test_check_paths(tmp_path):
    existing = tmp_path / "train.t"
    existing.write_text("a\n")
    config = ExperimentConfig.from_mapping({"data.train_src": str(existing)})
    config.check_paths(["data.train_src"])
    with pytest.raises(ConfigError, match="data.train_tgt"):
        config.check_paths(["data.train_tgt"])
    missing = ExperimentConfig.from_mapping({"data.valid_src": str(tmp_path / "absent")})
    with pytest.raises(ConfigError, match="does not exist"):
        missing.check_paths([])


def test_value_helpers(tmp_path):
    assert coerce_value("k", "yes", bool, tmp_path) is True
    assert coerce_value("k", "rel/x", Path, tmp_path) == tmp_path / "rel" / "x"
    assert format_value(("a", "b")) == "a,b"
    assert format_value(None) == ""
