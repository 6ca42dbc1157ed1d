"""
CLI interface for the low-resource translation toolkit.

Every stage of the workflows is a subcommand; ``run`` chains them from an
experiment config. Exit codes: 0 success, 1 config error (including a bad command line),
2 data error, 3 training or decoding failure.
"""

import functools
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import click
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .bleu import CaseMode, corpus_bleu
from .config import ExperimentConfig
from .corpus import SplitSpec, deduplicate, load_parallel, mix, split, subsample, write_corpus, write_lines
from .decoding import (
    DEFAULT_FUSION_WEIGHT,
    DecodeConfig,
    FusionConfig,
    FusionMode,
    LanguageModelScorer,
    PostNormNormalization,
    SearchStrategy,
    TransformerScorer,
    Translator,
    sweep_fusion_weights,
    translate_corpus,
)
from .errors import ConfigError, NMTError, UsageError, exit_code_for
from .lm import MonoCorpus, load_mono, perplexity, train_lm
from .logging_config import get_logger, setup_logging
from .model import DEFAULT_PROFILE, PROFILES, ModelConfig, ModelKind
from .recipes import create_recipe, get_available_recipes
from .recipes.backtranslation import backtranslate as backtranslate_corpus
from .tokenizer import SubwordVocabulary, apply_to_file, learn_merges, normalize, read_lines
from .toydata import ToyDataSpec, generate_toy_data, write_recipe_configs, write_toy_data
from .trainer import TrainConfig, TrainingSession, encode_pairs, load_checkpoint

console = Console()
err_console = Console(stderr=True)
logger = get_logger(__name__)


def print_banner():
    """Print the application banner."""
    console.print(f"[bold blue]lowres-nmt {__version__}[/bold blue] [dim]desk-scale low-resource NMT[/dim]")


def print_error(error: BaseException):
    """Print a failure in a red panel."""
    title = type(error).__name__
    stage = getattr(error, "stage", None)
    if stage:
        title += f" (stage: {stage})"
    err_console.print(Panel(str(error), title=title, border_style="red"))


def handle_errors(func: Callable) -> Callable:
    """Turn exceptions into a panel and the matching exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except NMTError as e:
            logger.error("Command failed", command=func.__name__, error=str(e), exit_code=e.exit_code)
            print_error(e)
            sys.exit(exit_code_for(e))
        except (click.exceptions.Exit, click.ClickException, SystemExit):
            raise
        except Exception as e:
            logger.exception("Unexpected failure", command=func.__name__)
            print_error(e)
            sys.exit(3)

    return wrapper


class NMTGroup(click.Group):
    """Command group that treats a bad command line as a config error."""

    def main(self, *args, standalone_mode: bool = True, **kwargs):
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            return super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(exit_code_for(ConfigError(e.format_message())))
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            err_console.print("Aborted!")
            sys.exit(1)


def decode_options(func: Callable) -> Callable:
    """Shared decoding flags."""
    options = [
        click.option("--strategy", type=click.Choice([s.value for s in SearchStrategy]), default="beam",
                     show_default=True, help="Search strategy"),
        click.option("--beam", "beam_size", type=int, default=4, show_default=True, help="Beam size"),
        click.option("--length-penalty", type=float, default=0.6, show_default=True,
                     help="Length normalization exponent alpha"),
        click.option("--max-len", type=int, default=100, show_default=True, help="Maximum output tokens"),
        click.option("--workers", type=int, default=1, show_default=True, envvar="NMT_WORKERS",
                     help="Sentences decoded in parallel (env NMT_WORKERS)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def fusion_options(func: Callable) -> Callable:
    """Language-model fusion flags."""
    options = [
        click.option("--fusion", type=click.Choice([m.value for m in FusionMode]), default="none",
                     show_default=True, help="How the LM is combined with the translation model"),
        click.option("--fusion-weight", type=float, default=DEFAULT_FUSION_WEIGHT, show_default=True,
                     help="Weight of the LM log-probabilities in shallow fusion"),
        click.option("--postnorm-norm", type=click.Choice([n.value for n in PostNormNormalization]),
                     default="softmax", show_default=True, help="Renormalization of PostNorm fusion"),
        click.option("--lm", "lm_path", type=click.Path(exists=True, dir_okay=False),
                     help="Language-model checkpoint for fusion"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_decode_config(
    strategy: str,
    beam_size: int,
    length_penalty: float,
    max_len: int,
    workers: int,
    fusion: str = "none",
    fusion_weight: float = DEFAULT_FUSION_WEIGHT,
    postnorm_norm: str = "softmax",
) -> DecodeConfig:
    return DecodeConfig(
        strategy=SearchStrategy(strategy),
        beam_size=beam_size,
        length_penalty=length_penalty,
        max_len=max_len,
        fusion=FusionConfig(FusionMode(fusion), fusion_weight, PostNormNormalization(postnorm_norm)),
        workers=workers,
    )


def build_translator(
    checkpoint_path: str,
    vocab_path: str,
    config: DecodeConfig,
    lm_path: Optional[str] = None,
    force: bool = False,
) -> Translator:
    """Load checkpoint, vocabulary and optional LM into a translator."""
    vocab = SubwordVocabulary.load(vocab_path)
    checkpoint = load_checkpoint(checkpoint_path)
    if checkpoint.config.kind != ModelKind.TRANSLATION:
        raise UsageError(f"{checkpoint_path} holds a language model, not a translation model")
    lm = None
    if config.fusion.uses_lm:
        if lm_path is None:
            raise UsageError(f"--fusion {config.fusion.mode.value} needs --lm")
        lm = LanguageModelScorer.from_checkpoint(load_checkpoint(lm_path))
    elif lm_path is not None:
        logger.warning("Ignoring --lm without fusion", lm=lm_path)
    return Translator(vocab, TransformerScorer.from_checkpoint(checkpoint), config, lm, force=force)


def read_sentences(path: str) -> List[str]:
    return [normalize(line).strip() for line in read_lines(path)]


def print_counts(title: str, rows: Sequence[tuple]):
    table = Table(title=title)
    table.add_column("Part", style="cyan")
    table.add_column("Count", justify="right", style="green")
    for name, value in rows:
        table.add_row(name, str(value))
    console.print(table)


def model_config_from_options(
    profile: str, vocab_size: int, max_len: int, kind: ModelKind, overrides: dict
) -> ModelConfig:
    values = {k: v for k, v in overrides.items() if v is not None}
    return ModelConfig.from_profile(profile, vocab_size=vocab_size, max_len=max_len, kind=kind, **values)


def model_options(func: Callable) -> Callable:
    """Model profile and size overrides."""
    options = [
        click.option("--profile", type=click.Choice(sorted(PROFILES)), default=DEFAULT_PROFILE,
                     show_default=True, help="Model size profile"),
        click.option("--layers", "n_layers", type=int, help="Override layer count"),
        click.option("--d-model", type=int, help="Override model width"),
        click.option("--heads", "n_heads", type=int, help="Override attention heads"),
        click.option("--ffn-dim", type=int, help="Override feed-forward width"),
        click.option("--dropout", type=float, help="Override dropout"),
        click.option("--model-max-len", type=int, default=256, show_default=True,
                     help="Longest sequence the model accepts"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def train_options(func: Callable) -> Callable:
    """Optimization flags mirroring TrainConfig."""
    defaults = TrainConfig()
    options = [
        click.option("--epochs", type=int, default=defaults.epochs, show_default=True),
        click.option("--batch-tokens", type=int, default=defaults.batch_tokens, show_default=True),
        click.option("--warmup-steps", type=int, default=defaults.warmup_steps, show_default=True),
        click.option("--label-smoothing", type=float, default=defaults.label_smoothing, show_default=True),
        click.option("--lr-scale", type=float, default=defaults.lr_scale, show_default=True),
        click.option("--seed", type=int, default=defaults.seed, show_default=True, envvar="NMT_SEED",
                     help="Seed of batching and dropout (env NMT_SEED)"),
        click.option("--freeze", multiple=True, help="Parameter path glob to keep constant (repeatable)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def train_config_from_options(options: dict) -> TrainConfig:
    return TrainConfig(
        epochs=options["epochs"],
        batch_tokens=options["batch_tokens"],
        warmup_steps=options["warmup_steps"],
        label_smoothing=options["label_smoothing"],
        lr_scale=options["lr_scale"],
        seed=options["seed"],
        freeze=tuple(options["freeze"]),
    )


def print_history(history):
    table = Table(title="Training")
    table.add_column("Epoch", justify="right")
    table.add_column("Loss", justify="right")
    table.add_column("BLEU", justify="right")
    table.add_column("Steps", justify="right")
    for record in history:
        table.add_row(
            str(record.epoch),
            f"{record.mean_loss:.4f}",
            "-" if record.bleu is None else f"{record.bleu:.2f}",
            str(record.steps),
        )
    console.print(table)


@click.group(cls=NMTGroup)
@click.version_option(__version__, prog_name="lowres-nmt")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.option("--log-level", envvar="NMT_LOG_LEVEL", default="INFO", show_default=True,
              help="Log level (env NMT_LOG_LEVEL)")
@click.option("--log-file", type=click.Path(), help="Log file path")
@click.option("--json-logs", is_flag=True, help="Emit JSON log lines")
@click.pass_context
def cli(ctx, verbose: bool, log_level: str, log_file: Optional[str], json_logs: bool):
    """Low-resource neural machine translation at desk scale."""
    ctx.ensure_object(dict)
    setup_logging(level="DEBUG" if verbose else log_level.upper(), log_file=log_file, json_logs=json_logs)
    ctx.obj["verbose"] = verbose


@cli.command()
@click.argument("src", type=click.Path(exists=True, dir_okay=False))
@click.argument("tgt", type=click.Path(exists=True, dir_okay=False))
@click.option("--src-lang", required=True, help="Source language code (file suffix)")
@click.option("--tgt-lang", required=True, help="Target language code (file suffix)")
@click.option("--valid-size", type=int, default=2000, show_default=True)
@click.option("--test-size", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True, envvar="NMT_SEED")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@handle_errors
def prep(src, tgt, src_lang, tgt_lang, valid_size, test_size, seed, outdir):
    """
    Deduplicate a parallel corpus and split it into train/valid/test.

    Writes train, valid and test files with the language codes as suffixes.
    """
    corpus = load_parallel(src, tgt, src_lang, tgt_lang)
    unique = deduplicate(corpus)
    parts = split(unique, SplitSpec(valid_size, test_size, seed))
    outdir = Path(outdir)
    for name, part in zip(("train", "valid", "test"), parts):
        write_corpus(part, outdir / f"{name}.{src_lang}", outdir / f"{name}.{tgt_lang}")
    print_counts(
        "Prepared corpus",
        [
            ("loaded", len(corpus)),
            ("empty side dropped", corpus.dropped),
            ("duplicates removed", len(corpus) - len(unique)),
            ("train", len(parts[0])),
            ("valid", len(parts[1])),
            ("test", len(parts[2])),
        ],
    )


@cli.command("bpe-learn")
@click.argument("inputs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab-size", type=int, default=8000, show_default=True, help="Target vocabulary size")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Vocabulary directory")
@handle_errors
def bpe_learn(inputs, vocab_size, out_dir):
    """Learn one shared BPE vocabulary over all INPUTS."""
    corpora = [read_sentences(path) for path in inputs]
    vocab = learn_merges(corpora, vocab_size)
    vocab.save(out_dir)
    console.print(
        f"[green]✓[/green] {len(vocab.merges)} merges, {vocab.size} tokens, "
        f"fingerprint {vocab.fingerprint():016x} -> {out_dir}"
    )


@cli.command("bpe-apply")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False))
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@handle_errors
def bpe_apply(input_path, output_path, vocab_dir):
    """Write the subword segmentation of each line of INPUT_PATH."""
    vocab = SubwordVocabulary.load(vocab_dir)
    count = apply_to_file(vocab, input_path, output_path)
    console.print(f"[green]✓[/green] Segmented {count} lines -> {output_path}")


@cli.command()
@click.option("--src", "src_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--tgt", "tgt_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--valid-src", type=click.Path(exists=True, dir_okay=False))
@click.option("--valid-tgt", type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--init", "init_path", type=click.Path(exists=True, dir_okay=False),
              help="Start from this checkpoint's parameters (fresh optimizer)")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@model_options
@train_options
@handle_errors
def train(src_path, tgt_path, valid_src, valid_tgt, vocab_dir, init_path, outdir, profile, model_max_len, **options):
    """Train a translation model; writes last.ckpt, best.ckpt and train.log to OUTDIR."""
    vocab = SubwordVocabulary.load(vocab_dir)
    tcfg = train_config_from_options(options)
    if init_path is not None:
        session = TrainingSession.from_checkpoint(load_checkpoint(init_path), tcfg, vocab, workdir=outdir)
    else:
        overrides = {k: options[k] for k in ("n_layers", "d_model", "n_heads", "ffn_dim", "dropout")}
        config = model_config_from_options(profile, vocab.size, model_max_len, ModelKind.TRANSLATION, overrides)
        session = TrainingSession(config, tcfg, vocab, workdir=outdir)
    corpus = load_parallel(src_path, tgt_path, "src", "tgt")
    valid = None
    if valid_src and valid_tgt:
        valid_corpus = load_parallel(valid_src, valid_tgt, "src", "tgt")
        valid = (valid_corpus.sources, valid_corpus.targets)
    examples = encode_pairs(corpus, vocab, session.config.max_len)
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task_id = progress.add_task("Training...", total=None)
        session.on("epoch_end", lambda record: progress.update(
            task_id, description=f"Epoch {record.epoch} loss {record.mean_loss:.4f}"
        ))
        history = session.fit(examples, valid=valid)
    print_history(history)
    console.print(f"[green]✓[/green] Checkpoint: {session.best_path}")


@cli.command("lm-train")
@click.option("--mono", "mono_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--translation-checkpoint", type=click.Path(exists=True, dir_okay=False),
              help="Translation model the LM will be fused with; vocabularies must match")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@model_options
@train_options
@handle_errors
def lm_train(mono_path, vocab_dir, translation_checkpoint, outdir, profile, model_max_len, **options):
    """Train a decoder-only language model on monolingual text."""
    vocab = SubwordVocabulary.load(vocab_dir)
    tcfg = train_config_from_options(options)
    overrides = {k: options[k] for k in ("n_layers", "d_model", "n_heads", "ffn_dim", "dropout")}
    config = model_config_from_options(profile, vocab.size, model_max_len, ModelKind.LANGUAGE_MODEL, overrides)
    fingerprint = None
    if translation_checkpoint is not None:
        fingerprint = load_checkpoint(translation_checkpoint).fingerprint
    mono = load_mono(mono_path, "lm")
    train_lm(mono, config, tcfg, vocab, fingerprint=fingerprint, workdir=outdir)
    console.print(f"[green]✓[/green] Language model: {Path(outdir) / 'last.ckpt'}")


@cli.command()
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), help="Default: stdout")
@click.option("--force", is_flag=True, help="Accept a vocabulary fingerprint mismatch")
@decode_options
@fusion_options
@handle_errors
def translate(checkpoint_path, vocab_dir, input_path, output_path, force, lm_path, **options):
    """Translate one sentence per line of INPUT."""
    config = build_decode_config(**options)
    translator = build_translator(checkpoint_path, vocab_dir, config, lm_path, force)
    result = translate_corpus(translator, read_sentences(input_path))
    if output_path:
        write_lines(output_path, result.translations)
        console.print(f"[green]✓[/green] {len(result)} lines -> {output_path}")
    else:
        for line in result.translations:
            click.echo(line)
    if result.failures:
        err_console.print(f"[yellow]⚠[/yellow] {len(result.failures)} sentences failed and were left empty")


@cli.command()
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Target-to-source model")
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--mono", "mono_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Target-language monolingual text")
@click.option("--src-lang", required=True, help="Language the synthetic sources are in")
@click.option("--tgt-lang", required=True, help="Language of the monolingual text")
@click.option("--subset-size", type=int, help="Back-translate a seeded subset of this size")
@click.option("--seed", type=int, default=1, show_default=True, envvar="NMT_SEED")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@decode_options
@handle_errors
def backtranslate(checkpoint_path, vocab_dir, mono_path, src_lang, tgt_lang, subset_size, seed, outdir, **options):
    """Pair monolingual target sentences with their machine translation."""
    config = build_decode_config(**options)
    translator = build_translator(checkpoint_path, vocab_dir, config)
    mono = load_mono(mono_path, tgt_lang)
    if subset_size is not None:
        mono = MonoCorpus(subsample(mono.sentences, subset_size, seed), tgt_lang)
    synthetic = backtranslate_corpus(translator, mono, src_lang)
    outdir = Path(outdir)
    write_corpus(
        synthetic,
        outdir / f"synthetic.{src_lang}",
        outdir / f"synthetic.{tgt_lang}",
        outdir / "synthetic.tags",
    )
    print_counts("Back-translation", [("monolingual", len(mono)), ("synthetic pairs", len(synthetic))])


@cli.command("mix")
@click.option("--src", "src_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--tgt", "tgt_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--synthetic-src", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--synthetic-tgt", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--src-lang", required=True)
@click.option("--tgt-lang", required=True)
@click.option("--ratio", type=float, help="Cap synthetic pairs at RATIO times the authentic ones")
@click.option("--seed", type=int, default=1, show_default=True, envvar="NMT_SEED")
@click.option("--outdir", type=click.Path(file_okay=False), required=True)
@handle_errors
def mix_command(src_path, tgt_path, synthetic_src, synthetic_tgt, src_lang, tgt_lang, ratio, seed, outdir):
    """Shuffle authentic and synthetic pairs into one tagged training corpus."""
    authentic = load_parallel(src_path, tgt_path, src_lang, tgt_lang)
    synthetic = load_parallel(synthetic_src, synthetic_tgt, src_lang, tgt_lang)
    mixed = mix(authentic, synthetic, ratio, seed)
    outdir = Path(outdir)
    write_corpus(mixed, outdir / f"train.{src_lang}", outdir / f"train.{tgt_lang}", outdir / "train.tags")
    print_counts(
        "Mixed corpus",
        [
            ("authentic", len(authentic)),
            ("synthetic available", len(synthetic)),
            ("total", len(mixed)),
        ],
    )


@cli.command()
@click.argument("hyp_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("ref_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--case", "case", type=click.Choice(["insensitive", "sensitive", "both"]), default="both",
              show_default=True)
@handle_errors
def bleu(hyp_path, ref_path, case):
    """Corpus BLEU of HYP_PATH against one reference per line."""
    hyps = read_lines(hyp_path)
    refs = read_lines(ref_path)
    modes = list(CaseMode) if case == "both" else [CaseMode(case)]
    for mode in modes:
        click.echo(corpus_bleu(hyps, refs, mode).format())


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--recipe", type=click.Choice(get_available_recipes()), help="Override run.recipe")
@click.option("--outdir", type=click.Path(file_okay=False), help="Override run.outdir")
@handle_errors
def run(config_path, recipe, outdir):
    """
    Run an experiment recipe from CONFIG_PATH.

    Examples:

        lowres-nmt run experiments/baseline.conf

        lowres-nmt run toy.conf --recipe transfer --outdir runs/transfer
    """
    print_banner()
    config = ExperimentConfig.load(config_path)
    experiment = create_recipe(config, recipe, outdir)
    console.print(f"[bold]Recipe:[/bold] {experiment.recipe_type.value}")
    console.print(f"[bold]Output:[/bold] {experiment.outdir}")
    result = experiment.run()

    table = Table(title="Test BLEU")
    table.add_column("Case", style="cyan")
    table.add_column("BLEU", justify="right", style="green")
    for mode, report in result.reports.items():
        table.add_row(mode.value, f"{report.score:.2f}")
    console.print(table)
    for name, path in result.checkpoints.items():
        console.print(f"[dim]{name}: {path}[/dim]")


@cli.command("toy-data")
@click.argument("outdir", type=click.Path(file_okay=False))
@click.option("--parent-pairs", type=int, default=5000, show_default=True)
@click.option("--child-pairs", type=int, default=500, show_default=True)
@click.option("--mono-sentences", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True, envvar="NMT_SEED")
@click.option("--with-configs", is_flag=True, help="Also write baseline/transfer/backtranslation configs")
@handle_errors
def toy_data(outdir, parent_pairs, child_pairs, mono_sentences, seed, with_configs):
    """Generate a related-dialect toy dataset in OUTDIR."""
    spec = ToyDataSpec(
        parent_pairs=parent_pairs, child_pairs=child_pairs, mono_sentences=mono_sentences, seed=seed
    )
    files = write_toy_data(generate_toy_data(spec), outdir)
    if with_configs:
        files.update({f"{name}.conf": path for name, path in write_recipe_configs(files, outdir).items()})
    table = Table(title="Toy data")
    table.add_column("File", style="cyan")
    table.add_column("Path")
    for name, path in files.items():
        table.add_row(name, str(path))
    console.print(table)


@cli.command("fusion-sweep")
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--lm", "lm_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--src", "src_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--ref", "ref_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--weights", default="0,0.001,0.003,0.01,0.03", show_default=True,
              help="Comma-separated fusion weights")
@click.option("--mode", type=click.Choice([FusionMode.SHALLOW.value, FusionMode.POSTNORM.value]),
              default="shallow", show_default=True)
@decode_options
@handle_errors
def fusion_sweep(checkpoint_path, lm_path, vocab_dir, src_path, ref_path, weights, mode, **options):
    """Validation BLEU for each fusion weight."""
    try:
        grid = [float(w) for w in weights.split(",") if w.strip()]
    except ValueError as e:
        raise UsageError(f"--weights must be comma-separated numbers, got {weights!r}") from e
    config = build_decode_config(**options, fusion=mode, fusion_weight=grid[0] if grid else 0.0)
    translator = build_translator(checkpoint_path, vocab_dir, config, lm_path)
    results = sweep_fusion_weights(
        translator, read_sentences(src_path), read_sentences(ref_path), grid, FusionMode(mode)
    )
    table = Table(title=f"{mode} fusion sweep")
    table.add_column("Weight", justify="right", style="cyan")
    table.add_column("BLEU", justify="right", style="green")
    best = max(results, key=lambda item: item[1].score) if results else None
    for weight, report in results:
        marker = " *" if best is not None and weight == best[0] else ""
        table.add_row(f"{weight:g}", f"{report.score:.2f}{marker}")
    console.print(table)


@cli.command("perplexity")
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--vocab", "vocab_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@handle_errors
def perplexity_command(checkpoint_path, vocab_dir, input_path):
    """Per-token perplexity of a language model on INPUT."""
    vocab = SubwordVocabulary.load(vocab_dir)
    value = perplexity(load_checkpoint(checkpoint_path), load_mono(input_path, "lm"), vocab)
    click.echo(f"perplexity = {value:.4f}")


def main():
    """Entry point for the CLI."""
    cli(obj={})


if __name__ == "__main__":
    main()
