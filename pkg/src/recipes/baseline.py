"""
Baseline recipe: train one model from scratch on the parallel corpus.
"""

from ..logging_config import get_logger
from .base import Recipe, RecipeType

logger = get_logger(__name__)


class BaselineRecipe(Recipe):
    """vocab -> train -> test."""

    recipe_type = RecipeType.BASELINE

    def execute(self) -> None:
        with self.stage("data"):
            train = self.train_corpus()
            valid = self.valid_set()
            test = self.test_corpus()
        with self.stage("vocab"):
            self.build_vocab([train.sources, train.targets])
        with self.stage("train"):
            session = self.new_session("train")
            checkpoint = self.fit_session("train", session, train, valid=valid)
        with self.stage("evaluate"):
            self.evaluate(checkpoint, test)
