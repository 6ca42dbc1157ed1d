"""
Back-translation recipe: translate target-language monolingual text with a
reverse model, mix the synthetic pairs with the authentic corpus and train
the forward model on the mixture.
"""

from dataclasses import replace
from typing import List

from ..corpus import Origin, ParallelCorpus, SentencePair, mix, reverse, subsample, write_corpus
from ..decoding import FusionConfig, TransformerScorer, Translator, translate_corpus
from ..lm import MonoCorpus, load_mono
from ..logging_config import get_logger
from ..trainer import load_checkpoint
from .base import Recipe, RecipeType

logger = get_logger(__name__)


def backtranslate(translator: Translator, mono: MonoCorpus, src_lang: str) -> ParallelCorpus:
    """
    Pair every monolingual sentence with its machine translation.

    The translation becomes the source side and the authentic sentence the
    target side; sentences whose translation failed or came out empty are
    left out.
    """
    result = translate_corpus(translator, mono.sentences)
    pairs: List[SentencePair] = []
    skipped = 0
    for i, (sentence, translation) in enumerate(zip(mono.sentences, result.translations)):
        if i in result.failures or not translation.strip():
            skipped += 1
            continue
        pairs.append(SentencePair(translation, sentence, Origin.SYNTHETIC))
    if skipped:
        logger.warning("Skipped sentences without a usable back-translation", skipped=skipped)
    logger.info("Back-translated monolingual corpus", sentences=len(mono), pairs=len(pairs))
    return ParallelCorpus(pairs=pairs, src_lang=src_lang, tgt_lang=mono.lang)


class BacktranslationRecipe(Recipe):
    """
    vocab -> reverse model -> back-translate -> mix -> forward model -> test.

    ``backtranslation.reverse_checkpoint`` skips reverse training;
    ``backtranslation.init_checkpoint`` starts the forward model from an
    earlier (e.g. transfer-learned) checkpoint instead of from scratch.
    """

    recipe_type = RecipeType.BACKTRANSLATION

    @property
    def required_paths(self):
        required = list(Recipe.required_paths) + ["backtranslation.mono"]
        settings = self.config.backtranslation
        if settings.reverse_checkpoint is not None or settings.init_checkpoint is not None:
            required.append("data.vocab")
        return required

    def execute(self) -> None:
        settings = self.config.backtranslation
        data = self.config.data
        seed = self.config.train.seed

        with self.stage("data"):
            train = self.train_corpus()
            valid = self.valid_set()
            test = self.test_corpus()
            mono = load_mono(settings.mono, train.tgt_lang)
            if settings.subset_size is not None:
                mono = MonoCorpus(subsample(mono.sentences, settings.subset_size, seed), mono.lang)
        with self.stage("vocab"):
            self.build_vocab([train.sources, train.targets, mono.sentences])

        if settings.reverse_checkpoint is not None:
            reverse_checkpoint = settings.reverse_checkpoint
            self.result.checkpoints["reverse"] = reverse_checkpoint
        else:
            with self.stage("reverse"):
                reverse_valid = (valid[1], valid[0]) if valid is not None else None
                session = self.new_session("reverse")
                reverse_checkpoint = self.fit_session(
                    "reverse", session, reverse(train), epochs=settings.reverse_epochs, valid=reverse_valid
                )

        with self.stage("backtranslate"):
            checkpoint = load_checkpoint(reverse_checkpoint)
            # The fusion LM speaks the forward target language, not the reverse one.
            decode_config = replace(self.config.decode_config(), fusion=FusionConfig())
            translator = Translator(self.vocab, TransformerScorer.from_checkpoint(checkpoint), decode_config)
            synthetic = backtranslate(translator, mono, train.src_lang)
            synthetic_dir = self.outdir / "backtranslate"
            write_corpus(
                synthetic,
                synthetic_dir / f"synthetic.{train.src_lang}",
                synthetic_dir / f"synthetic.{train.tgt_lang}",
                synthetic_dir / "synthetic.tags",
            )
            self.result.artifacts["synthetic"] = synthetic_dir

        with self.stage("mix"):
            mixed = mix(train, synthetic, settings.ratio, seed)
            mixed_dir = self.outdir / "mixed"
            write_corpus(
                mixed,
                mixed_dir / f"train.{train.src_lang}",
                mixed_dir / f"train.{train.tgt_lang}",
                mixed_dir / "train.tags",
            )
            self.result.artifacts["mixed"] = mixed_dir
            logger.info(
                "Mixed training corpus",
                authentic=mixed.count(Origin.AUTHENTIC),
                synthetic=mixed.count(Origin.SYNTHETIC),
                reverse_direction=data.reverse,
            )

        with self.stage("forward"):
            session = self.new_session("forward", init=settings.init_checkpoint)
            checkpoint = self.fit_session("forward", session, mixed, valid=valid)
        with self.stage("evaluate"):
            self.evaluate(checkpoint, test)
