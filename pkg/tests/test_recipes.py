"""
Tests for experiment recipes on a miniature toy dataset.
"""

import pytest

from src.bleu import CaseMode
from src.config import ExperimentConfig
from src.corpus import Origin, load_parallel
from src.errors import AlignmentError, ConfigError, StageError
from src.recipes import (
    REPORT_FILE,
    RESOLVED_CONFIG,
    BacktranslationRecipe,
    BaselineRecipe,
    RecipeType,
    TransferRecipe,
    create_recipe,
    get_available_recipes,
)
from src.toydata import ToyDataSpec, generate_toy_data, recipe_settings, write_toy_data
from src.trainer import LAST_CHECKPOINT, LOG_FILE

SMALL = {
    "data.vocab_size": "120",
    "model.n_layers": "1",
    "model.d_model": "16",
    "model.n_heads": "2",
    "model.ffn_dim": "32",
    "model.max_len": "48",
    "train.epochs": "1",
    "train.batch_tokens": "256",
    "train.warmup_steps": "10",
    "decode.beam_size": "2",
    "decode.max_len": "12",
    "transfer.parent_epochs": "1",
    "backtranslation.reverse_epochs": "1",
}


@pytest.fixture(scope="module")
def toy_files(tmp_path_factory):
    spec = ToyDataSpec(
        parent_pairs=120, child_pairs=30, child_valid=6, child_test=8, mono_sentences=40, stems=20, max_words=5
    )
    return write_toy_data(generate_toy_data(spec), tmp_path_factory.mktemp("toy"))


def experiment(recipe: str, files, outdir, **extra) -> ExperimentConfig:
    values = recipe_settings(recipe, files)
    values.update(SMALL)
    values["run.outdir"] = str(outdir)
    values.update(extra)
    return ExperimentConfig.from_mapping(values, base_dir=files["mono"].parent)


def test_available_recipes():
    assert get_available_recipes() == ["baseline", "transfer", "backtranslation"]


def test_create_recipe_by_name(toy_files, tmp_path):
    config = experiment("baseline", toy_files, tmp_path)
    recipe = create_recipe(config, "transfer", outdir=tmp_path / "other")
    assert isinstance(recipe, TransferRecipe)
    assert recipe.outdir == tmp_path / "other"
    assert config.run.recipe == "transfer"
    assert isinstance(create_recipe(experiment("backtranslation", toy_files, tmp_path)), BacktranslationRecipe)


def test_unknown_recipe(toy_files, tmp_path):
    with pytest.raises(ConfigError):
        create_recipe(experiment("baseline", toy_files, tmp_path), "pivot")


def test_baseline_run(toy_files, tmp_path):
    result = create_recipe(experiment("baseline", toy_files, tmp_path)).run()
    assert result.recipe == RecipeType.BASELINE
    assert (tmp_path / RESOLVED_CONFIG).exists()
    assert (tmp_path / "train" / LAST_CHECKPOINT).exists()
    assert len((tmp_path / "train" / LOG_FILE).read_text().splitlines()) == 1
    assert len(result.histories["train"]) == 1
    assert set(result.reports) == set(CaseMode)
    assert 0.0 <= result.bleu <= 100.0
    report = (tmp_path / REPORT_FILE).read_text().splitlines()
    assert report[0].startswith("checkpoint = ")
    assert report[1].startswith("BLEU = ") and report[1].endswith("case = insensitive)")
    hyps = result.artifacts["hypotheses"].read_text().splitlines()
    assert len(hyps) == 8


def test_resolved_config_reloads(toy_files, tmp_path):
    create_recipe(experiment("baseline", toy_files, tmp_path)).run()
    again = ExperimentConfig.load(tmp_path / RESOLVED_CONFIG)
    assert again.model.d_model == 16
    assert again.train.epochs == 1


def test_transfer_run(toy_files, tmp_path):
    result = create_recipe(experiment("transfer", toy_files, tmp_path)).run()
    assert set(result.checkpoints) == {"parent", "child"}
    assert (tmp_path / "parent" / LAST_CHECKPOINT).exists()
    assert (tmp_path / "child" / LAST_CHECKPOINT).exists()
    assert len(result.histories["parent"]) == 1
    assert result.bleu is not None


def test_transfer_from_existing_parent_needs_vocab(toy_files, tmp_path):
    parent = tmp_path / "parent.ckpt"
    parent.write_bytes(b"")
    config = experiment("transfer", toy_files, tmp_path, **{"transfer.parent_checkpoint": str(parent)})
    with pytest.raises(StageError) as excinfo:
        create_recipe(config).run()
    assert excinfo.value.stage == "validate"
    assert excinfo.value.exit_code == 1


def test_backtranslation_run(toy_files, tmp_path):
    result = create_recipe(experiment("backtranslation", toy_files, tmp_path)).run()
    assert {"reverse", "forward"} <= set(result.checkpoints)
    mixed_dir = result.artifacts["mixed"]
    mixed = load_parallel(mixed_dir / "train.t", mixed_dir / "train.y", "t", "y", tag_path=mixed_dir / "train.tags")
    assert mixed.count(Origin.AUTHENTIC) == 30
    assert mixed.count(Origin.SYNTHETIC) <= 2 * 30
    synthetic_tags = (result.artifacts["synthetic"] / "synthetic.tags").read_text().split()
    assert set(synthetic_tags) <= {Origin.SYNTHETIC.value}


def test_failing_stage_is_named(toy_files, tmp_path):
    broken = tmp_path / "broken.y"
    broken.write_text("only one line\n", encoding="utf-8")
    config = experiment("baseline", toy_files, tmp_path / "run", **{"data.test_tgt": str(broken)})
    with pytest.raises(StageError) as excinfo:
        BaselineRecipe(config).run()
    assert excinfo.value.stage == "data"
    assert isinstance(excinfo.value.cause, AlignmentError)
    assert excinfo.value.exit_code == 2


def test_fusion_without_language_model_fails_at_evaluation(toy_files, tmp_path):
    config = experiment("baseline", toy_files, tmp_path, **{"fusion.mode": "shallow"})
    with pytest.raises(StageError) as excinfo:
        create_recipe(config).run()
    assert excinfo.value.stage == "evaluate"
    assert isinstance(excinfo.value.cause, ConfigError)
