"""
Tests for the command-line interface.
"""

import pytest
from click.testing import CliRunner

from src import __version__
from src.cli import cli
from src.trainer import LAST_CHECKPOINT, LOG_FILE
from tests.conftest import copy_sentences

TINY_MODEL = ["--layers", "1", "--d-model", "16", "--heads", "2", "--ffn-dim", "32", "--model-max-len", "24"]
FAST_TRAIN = ["--epochs", "1", "--batch-tokens", "64", "--warmup-steps", "10"]


@pytest.fixture
def runner():
    return CliRunner()


def write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


@pytest.fixture
def workspace(tmp_path, runner):
    """Copy-task files, a vocabulary and a one-epoch translation model."""
    sentences = copy_sentences(30, seed=0)
    src = write(tmp_path / "train.src", sentences)
    tgt = write(tmp_path / "train.tgt", sentences)
    result = runner.invoke(cli, ["bpe-learn", str(src), str(tgt), "--vocab-size", "24", "--out", str(tmp_path / "vocab")])
    assert result.exit_code == 0, result.stderr
    result = runner.invoke(
        cli,
        ["train", "--src", str(src), "--tgt", str(tgt), "--vocab", str(tmp_path / "vocab"),
         "--outdir", str(tmp_path / "model"), *TINY_MODEL, *FAST_TRAIN],
    )
    assert result.exit_code == 0, result.stderr
    return tmp_path


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_bleu_identical_files(runner, tmp_path):
    lines = ["the cat sat on the mat", "a b c d e"]
    hyp = write(tmp_path / "hyp", lines)
    ref = write(tmp_path / "ref", lines)
    result = runner.invoke(cli, ["bleu", str(hyp), str(ref), "--case", "insensitive"])
    assert result.exit_code == 0
    assert result.stdout.strip().startswith("BLEU = 100.00")


def test_bleu_both_cases(runner, tmp_path):
    hyp = write(tmp_path / "hyp", ["The Cat sat on the mat"])
    ref = write(tmp_path / "ref", ["the cat sat on the mat"])
    result = runner.invoke(cli, ["bleu", str(hyp), str(ref)])
    lines = result.stdout.strip().splitlines()
    assert not lines[0].startswith("BLEU = 100.00") and "case = sensitive" in lines[0]
    assert lines[1].startswith("BLEU = 100.00") and "case = insensitive" in lines[1]


def test_bleu_misaligned_is_data_error(runner, tmp_path):
    hyp = write(tmp_path / "hyp", ["a"])
    ref = write(tmp_path / "ref", ["a", "b"])
    result = runner.invoke(cli, ["bleu", str(hyp), str(ref)])
    assert result.exit_code == 2
    assert "AlignmentError" in result.stderr


def test_prep_dedups_and_splits(runner, tmp_path):
    sources = [f"source {i}" for i in range(40)] + ["source 0", "source 1"]
    targets = [f"target {i}" for i in range(40)] + ["target 0", "target 1"]
    src = write(tmp_path / "all.src", sources)
    tgt = write(tmp_path / "all.tgt", targets)
    out = tmp_path / "prepared"
    result = runner.invoke(
        cli,
        ["prep", str(src), str(tgt), "--src-lang", "k", "--tgt-lang", "y",
         "--valid-size", "5", "--test-size", "5", "--outdir", str(out)],
    )
    assert result.exit_code == 0, result.stderr
    assert len((out / "train.k").read_text().splitlines()) == 30
    assert len((out / "valid.y").read_text().splitlines()) == 5
    assert len((out / "test.k").read_text().splitlines()) == 5


def test_prep_with_oversized_split_is_config_error(runner, tmp_path):
    src = write(tmp_path / "a.src", ["x", "y"])
    tgt = write(tmp_path / "a.tgt", ["x", "y"])
    result = runner.invoke(
        cli,
        ["prep", str(src), str(tgt), "--src-lang", "k", "--tgt-lang", "y",
         "--valid-size", "1", "--test-size", "1", "--outdir", str(tmp_path / "out")],
    )
    assert result.exit_code == 1


def test_mix_caps_synthetic_side(runner, tmp_path):
    src = write(tmp_path / "auth.k", [f"a{i}" for i in range(10)])
    tgt = write(tmp_path / "auth.y", [f"b{i}" for i in range(10)])
    syn_src = write(tmp_path / "syn.k", [f"c{i}" for i in range(50)])
    syn_tgt = write(tmp_path / "syn.y", [f"d{i}" for i in range(50)])
    out = tmp_path / "mixed"
    result = runner.invoke(
        cli,
        ["mix", "--src", str(src), "--tgt", str(tgt), "--synthetic-src", str(syn_src),
         "--synthetic-tgt", str(syn_tgt), "--src-lang", "k", "--tgt-lang", "y",
         "--ratio", "2", "--outdir", str(out)],
    )
    assert result.exit_code == 0, result.stderr
    tags = (out / "train.tags").read_text().split()
    assert len(tags) == 30
    assert tags.count("S") == 20
    assert len((out / "train.k").read_text().splitlines()) == 30


def test_bpe_apply(runner, tmp_path):
    text = write(tmp_path / "text", copy_sentences(20, seed=1))
    runner.invoke(cli, ["bpe-learn", str(text), "--vocab-size", "16", "--out", str(tmp_path / "vocab")])
    result = runner.invoke(cli, ["bpe-apply", str(text), str(tmp_path / "seg"), "--vocab", str(tmp_path / "vocab")])
    assert result.exit_code == 0, result.stderr
    assert len((tmp_path / "seg").read_text().splitlines()) == 20


def test_bpe_learn_with_tiny_vocab_is_config_error(runner, tmp_path):
    text = write(tmp_path / "text", ["abcdefgh"])
    result = runner.invoke(cli, ["bpe-learn", str(text), "--vocab-size", "5", "--out", str(tmp_path / "vocab")])
    assert result.exit_code == 1


def test_train_writes_checkpoint_and_log(workspace):
    assert (workspace / "model" / LAST_CHECKPOINT).exists()
    assert len((workspace / "model" / LOG_FILE).read_text().splitlines()) == 1


def test_translate_to_file(runner, workspace):
    inputs = write(workspace / "input", ["ab ba", "cab"])
    output = workspace / "output"
    result = runner.invoke(
        cli,
        ["translate", "--checkpoint", str(workspace / "model" / LAST_CHECKPOINT),
         "--vocab", str(workspace / "vocab"), "--input", str(inputs), "--output", str(output),
         "--strategy", "greedy", "--max-len", "6"],
    )
    assert result.exit_code == 0, result.stderr
    assert len(output.read_text().splitlines()) == 2


def test_translate_with_fusion_needs_lm(runner, workspace):
    inputs = write(workspace / "input", ["ab"])
    result = runner.invoke(
        cli,
        ["translate", "--checkpoint", str(workspace / "model" / LAST_CHECKPOINT),
         "--vocab", str(workspace / "vocab"), "--input", str(inputs), "--fusion", "shallow"],
    )
    assert result.exit_code == 3
    assert "--lm" in result.stderr


def test_lm_train_perplexity_and_fusion(runner, workspace):
    mono = write(workspace / "mono", copy_sentences(30, seed=4))
    checkpoint = str(workspace / "model" / LAST_CHECKPOINT)
    result = runner.invoke(
        cli,
        ["lm-train", "--mono", str(mono), "--vocab", str(workspace / "vocab"),
         "--translation-checkpoint", checkpoint, "--outdir", str(workspace / "lm"), *TINY_MODEL, *FAST_TRAIN],
    )
    assert result.exit_code == 0, result.stderr
    lm = str(workspace / "lm" / LAST_CHECKPOINT)

    result = runner.invoke(cli, ["perplexity", "--checkpoint", lm, "--vocab", str(workspace / "vocab"), "--input", str(mono)])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("perplexity = ")
    assert float(result.stdout.split("=")[1]) > 1.0

    inputs = write(workspace / "input", ["ab ba"])
    result = runner.invoke(
        cli,
        ["translate", "--checkpoint", checkpoint, "--vocab", str(workspace / "vocab"), "--input", str(inputs),
         "--fusion", "postnorm", "--lm", lm, "--max-len", "6"],
    )
    assert result.exit_code == 0, result.stderr

    result = runner.invoke(
        cli,
        ["fusion-sweep", "--checkpoint", checkpoint, "--lm", lm, "--vocab", str(workspace / "vocab"),
         "--src", str(workspace / "train.src"), "--ref", str(workspace / "train.tgt"),
         "--weights", "0,0.01", "--strategy", "greedy", "--max-len", "6"],
    )
    assert result.exit_code == 0, result.stderr


def test_perplexity_of_translation_model_is_config_error(runner, workspace):
    result = runner.invoke(
        cli,
        ["perplexity", "--checkpoint", str(workspace / "model" / LAST_CHECKPOINT),
         "--vocab", str(workspace / "vocab"), "--input", str(workspace / "train.tgt")],
    )
    assert result.exit_code == 1


def test_backtranslate(runner, workspace):
    mono = write(workspace / "mono", copy_sentences(12, seed=6))
    out = workspace / "bt"
    result = runner.invoke(
        cli,
        ["backtranslate", "--checkpoint", str(workspace / "model" / LAST_CHECKPOINT),
         "--vocab", str(workspace / "vocab"), "--mono", str(mono), "--src-lang", "k", "--tgt-lang", "y",
         "--subset-size", "8", "--strategy", "greedy", "--max-len", "6", "--outdir", str(out)],
    )
    assert result.exit_code == 0, result.stderr
    sources = (out / "synthetic.k").read_text().splitlines()
    targets = (out / "synthetic.y").read_text().splitlines()
    assert len(sources) == len(targets) <= 8


def test_toy_data_with_configs(runner, tmp_path):
    result = runner.invoke(
        cli,
        ["toy-data", str(tmp_path), "--parent-pairs", "20", "--child-pairs", "10",
         "--mono-sentences", "10", "--with-configs"],
    )
    assert result.exit_code == 0, result.stderr
    assert (tmp_path / "baseline.conf").exists()
    assert len((tmp_path / "child.train.t").read_text().splitlines()) == 10


def test_run_rejects_unknown_config_key(runner, tmp_path):
    config = write(tmp_path / "bad.conf", ["train.epoch=3"])
    result = runner.invoke(cli, ["run", str(config)])
    assert result.exit_code == 1
    assert "train.epoch" in result.stderr


def test_run_reports_failing_stage(runner, tmp_path):
    config = write(tmp_path / "missing.conf", ["run.recipe=baseline"])
    result = runner.invoke(cli, ["run", str(config), "--outdir", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "validate" in result.stderr


@pytest.mark.parametrize(
    "args",
    [
        ["translate", "--bogus"],
        ["bleu"],
        ["translate", "--strategy", "sideways"],
        ["no-such-command"],
    ],
    ids=["unknown-flag", "missing-argument", "bad-choice", "unknown-command"],
)
def test_bad_command_line_is_config_error(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "Usage" in result.stderr or "Error" in result.stderr


def test_help_still_exits_zero(runner):
    result = runner.invoke(cli, ["translate", "--help"])
    assert result.exit_code == 0
    assert "--beam" in result.stdout
