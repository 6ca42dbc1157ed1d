"""
Basic tests for the translation toolkit.

These tests verify package wiring, enums, errors and logging without
training anything.
"""

import pytest


def test_imports():
    """Test that the public API can be imported."""
    from src import (
        BleuReport,
        ExperimentConfig,
        ModelConfig,
        SubwordVocabulary,
        TrainingLogger,
        TrainingSession,
        Translator,
        corpus_bleu,
        create_recipe,
        get_logger,
        setup_logging,
    )
    assert True


def test_version():
    from src import __version__

    assert __version__.count(".") == 2


def test_public_exports_resolve():
    """Every name a package exports exists; retired helpers stay retired."""
    import importlib

    for module_name in ("src", "src.model", "src.decoding", "src.trainer", "src.recipes"):
        module = importlib.import_module(module_name)
        missing = [name for name in module.__all__ if not hasattr(module, name)]
        assert missing == [], module_name

    import src.decoding
    import src.model

    assert "scorer_for" not in src.decoding.__all__
    assert "iter_canonical" not in src.model.__all__

def test_enum_values():
    """Test enum values used in config files and on the command line."""
    from src.bleu import CaseMode
    from src.corpus import Origin
    from src.decoding import FusionMode, PostNormNormalization, SearchStrategy
    from src.model import ModelKind
    from src.recipes import RecipeType

    assert FusionMode.SHALLOW == "shallow"
    assert FusionMode.POSTNORM == "postnorm"
    assert PostNormNormalization.SUM == "sum"
    assert SearchStrategy.BEAM == "beam"
    assert ModelKind.LANGUAGE_MODEL == "language-model"
    assert CaseMode.INSENSITIVE == "insensitive"
    assert Origin.SYNTHETIC == "S"
    assert RecipeType.BACKTRANSLATION == "backtranslation"


def test_defaults():
    """Test configuration defaults."""
    from src.decoding import DecodeConfig
    from src.model import ModelConfig
    from src.trainer import TrainConfig

    decode = DecodeConfig()
    assert decode.beam_size == 4
    assert decode.length_penalty == 0.6
    assert decode.fusion.weight == 0.003

    train = TrainConfig()
    assert train.warmup_steps == 4000
    assert train.label_smoothing == 0.1
    assert train.betas == (0.9, 0.98)

    base = ModelConfig.from_profile("base", vocab_size=32768)
    assert (base.n_layers, base.d_model, base.n_heads, base.ffn_dim) == (6, 512, 8, 2048)


def test_exit_codes():
    """Test error classes map to CLI exit codes."""
    from src.errors import (
        AlignmentError,
        CheckpointFormatError,
        ConfigError,
        FusionError,
        NumericError,
        StageError,
        TransferError,
        exit_code_for,
    )

    assert exit_code_for(None) == 0
    assert exit_code_for(ConfigError("x")) == 1
    assert exit_code_for(TransferError("x")) == 1
    assert exit_code_for(FusionError("x")) == 1
    assert exit_code_for(AlignmentError("x")) == 2
    assert exit_code_for(CheckpointFormatError("x")) == 2
    assert exit_code_for(NumericError("x")) == 3
    assert exit_code_for(RuntimeError("x")) == 3

    error = StageError("reverse", AlignmentError("uneven files"))
    assert error.stage == "reverse"
    assert exit_code_for(error) == 2
    assert "reverse" in str(error)


def test_logging_setup(tmp_path):
    """Test logging configuration."""
    from src.logging_config import get_logger, setup_logging

    # Should not raise
    setup_logging(level="DEBUG", log_file=str(tmp_path / "logs" / "nmt.log"))

    logger = get_logger("test")
    assert logger is not None
    assert (tmp_path / "logs").is_dir()


def test_log_file_carries_run_context(tmp_path):
    """File logs are JSON lines with the bound recipe context merged in."""
    import json
    import logging

    from src.logging_config import get_logger, run_context, setup_logging

    log_file = tmp_path / "run.log"
    setup_logging(level="INFO", log_file=str(log_file))
    try:
        with run_context(recipe="transfer", stage="parent"):
            with run_context(epoch=3):
                get_logger("tests.run").info("Epoch finished", mean_loss=1.23456789)
            get_logger("tests.run").info("Stage finished")
        get_logger("tests.run").info("Outside")
        for handler in logging.getLogger().handlers:
            handler.flush()
        events = [json.loads(line) for line in log_file.read_text(encoding="utf-8").splitlines()]
    finally:
        setup_logging(level="INFO")

    epoch, stage, outside = events[-3:]
    assert (epoch["recipe"], epoch["stage"], epoch["epoch"]) == ("transfer", "parent", 3)
    assert epoch["mean_loss"] == 1.23457
    assert "epoch" not in stage and stage["stage"] == "parent"
    assert "stage" not in outside


def test_training_logger():
    """Test TrainingLogger class."""
    from src.logging_config import TrainingLogger

    logger = TrainingLogger(session_id="test_session", stage="child")

    assert logger.session_id == "test_session"
    assert logger.epoch_count == 0

    logger.log_session_start(task="translation", config={"epochs": 2})
    logger.log_epoch(epoch=1, mean_loss=2.5, steps=10, bleu=None, seconds=0.5)
    logger.log_checkpoint("runs/x/last.ckpt")
    logger.log_session_end(epochs=1, steps=10, best_bleu=None)

    assert logger.epoch_count == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
