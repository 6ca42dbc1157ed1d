"""
End-to-end runs on the default toy dataset with the desk profile.

These take minutes; run them with ``pytest -m slow``.
"""

import pytest

from src.config import ExperimentConfig
from src.corpus import Origin, load_parallel
from src.decoding import (
    DecodeConfig,
    FusionConfig,
    FusionMode,
    LanguageModelScorer,
    TransformerScorer,
    Translator,
    translate_corpus,
)
from src.lm import train_lm
from src.model import ModelKind
from src.recipes import create_recipe
from src.tokenizer import SubwordVocabulary
from src.toydata import ToyDataSpec, generate_toy_data, recipe_settings, write_toy_data
from src.trainer import LAST_CHECKPOINT, LOG_FILE, load_checkpoint

pytestmark = pytest.mark.slow

SEED = 1


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    data = generate_toy_data(ToyDataSpec(seed=SEED))
    return data, write_toy_data(data, root)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    return tmp_path_factory.mktemp("runs")


def run_recipe(recipe, files, outdir, **extra):
    values = recipe_settings(recipe, files)
    values["run.outdir"] = str(outdir)
    values.update(extra)
    config = ExperimentConfig.from_mapping(values, base_dir=files["mono"].parent)
    return create_recipe(config).run()


def first_epoch_reaching(history, threshold):
    for record in history:
        if record.bleu is not None and record.bleu >= threshold:
            return record.epoch
    return None


@pytest.fixture(scope="module")
def baseline(toy, runs):
    return run_recipe("baseline", toy[1], runs / "baseline")


def test_baseline_learns_the_child_pair(baseline):
    assert baseline.bleu > 15.0


def test_transfer_reaches_baseline_quality_sooner(toy, runs, baseline):
    history = baseline.histories["train"]
    target = max(r.bleu for r in history)
    baseline_epoch = first_epoch_reaching(history, target)

    transfer = run_recipe("transfer", toy[1], runs / "transfer")
    child_epoch = first_epoch_reaching(transfer.histories["child"], target)
    assert child_epoch is not None
    assert child_epoch < baseline_epoch


def test_backtranslation_mixes_at_the_configured_ratio(toy, runs):
    data, files = toy
    result = run_recipe("backtranslation", files, runs / "backtranslation")
    mixed_dir = result.artifacts["mixed"]
    mixed = load_parallel(mixed_dir / "train.t", mixed_dir / "train.y", "t", "y", tag_path=mixed_dir / "train.tags")
    authentic = mixed.count(Origin.AUTHENTIC)
    assert authentic == len(data.child_train)
    assert mixed.count(Origin.SYNTHETIC) == 2 * authentic
    assert result.bleu is not None


def test_shallow_fusion_weights(toy, runs, baseline):
    data, _ = toy
    checkpoint = load_checkpoint(baseline.checkpoints["train"])
    vocab = SubwordVocabulary.load(baseline.artifacts["vocab"])
    config = ExperimentConfig.from_mapping({"model.max_len": "64", "train.epochs": "2", "train.batch_tokens": "1024"})
    lm = train_lm(
        data.mono,
        config.model_config(vocab.size, kind=ModelKind.LANGUAGE_MODEL),
        config.train,
        vocab,
        fingerprint=checkpoint.fingerprint,
        workdir=runs / "lm",
    )
    scorer = TransformerScorer.from_checkpoint(checkpoint)
    sources = data.child_test.sources[:50]
    plain = translate_corpus(Translator(vocab, scorer), sources).translations
    outputs = {}
    for weight in (0.0, 0.003):
        translator = Translator(
            vocab,
            scorer,
            DecodeConfig(fusion=FusionConfig(FusionMode.SHALLOW, weight)),
            lm=LanguageModelScorer.from_checkpoint(lm),
        )
        outputs[weight] = translate_corpus(translator, sources)
        assert not outputs[weight].failures
    assert outputs[0.0].translations == plain


def test_reruns_are_byte_identical(toy, runs, baseline):
    again = run_recipe("baseline", toy[1], runs / "baseline-again")
    first = baseline.outdir / "train"
    second = again.outdir / "train"
    assert (first / LAST_CHECKPOINT).read_bytes() == (second / LAST_CHECKPOINT).read_bytes()

    def without_seconds(path):
        return [line.rsplit("\t", 1)[0] for line in path.read_text().splitlines()]

    assert without_seconds(first / LOG_FILE) == without_seconds(second / LOG_FILE)
    assert (baseline.outdir / "test.hyp").read_bytes() == (again.outdir / "test.hyp").read_bytes()
