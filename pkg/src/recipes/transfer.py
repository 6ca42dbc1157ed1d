"""
Trivial transfer learning: train a parent pair, then continue training on
the child pair from the parent's weights with one shared vocabulary.
"""

from dataclasses import replace

from ..logging_config import get_logger
from ..trainer import LAST_CHECKPOINT, load_checkpoint, transfer_init
from .base import Recipe, RecipeType

logger = get_logger(__name__)


class TransferRecipe(Recipe):
    """
    vocab (parent + child) -> parent -> child fine-tune -> test.

    ``transfer.parent_checkpoint`` skips parent training. Nothing is
    frozen unless ``transfer.freeze`` lists globs.
    """

    recipe_type = RecipeType.TRANSFER

    @property
    def required_paths(self):
        required = list(Recipe.required_paths)
        if self.config.transfer.parent_checkpoint is None:
            required += ["transfer.parent_train_src", "transfer.parent_train_tgt"]
        else:
            # The parent was trained with its own vocabulary; reuse it.
            required.append("data.vocab")
        return required

    def execute(self) -> None:
        settings = self.config.transfer
        with self.stage("data"):
            child = self.train_corpus()
            valid = self.valid_set()
            test = self.test_corpus()
            parent = None
            if settings.parent_train_src is not None and settings.parent_train_tgt is not None:
                parent = self.load_pair(
                    settings.parent_train_src,
                    settings.parent_train_tgt,
                    src_lang=settings.parent_src_lang,
                )
        with self.stage("vocab"):
            texts = [child.sources, child.targets]
            if parent is not None:
                texts += [parent.sources, parent.targets]
            self.build_vocab(texts)

        if settings.parent_checkpoint is not None:
            parent_checkpoint = settings.parent_checkpoint
            self.result.checkpoints["parent"] = parent_checkpoint
        else:
            with self.stage("parent"):
                parent_valid = None
                if settings.parent_valid_src is not None and settings.parent_valid_tgt is not None:
                    pv = self.load_pair(
                        settings.parent_valid_src, settings.parent_valid_tgt, src_lang=settings.parent_src_lang
                    )
                    parent_valid = (pv.sources, pv.targets)
                session = self.new_session("parent")
                self.fit_session("parent", session, parent, epochs=settings.parent_epochs, valid=parent_valid)
                parent_checkpoint = self.outdir / "parent" / LAST_CHECKPOINT
                self.result.checkpoints["parent"] = parent_checkpoint

        with self.stage("child"):
            tcfg = self.config.train
            if settings.freeze:
                tcfg = replace(tcfg, freeze=settings.freeze)
            session = transfer_init(
                load_checkpoint(parent_checkpoint),
                child,
                self.vocab,
                tcfg,
                workdir=self.outdir / "child",
            )
            checkpoint = self.fit_session("child", session, None, valid=valid)
        with self.stage("evaluate"):
            self.evaluate(checkpoint, test)
