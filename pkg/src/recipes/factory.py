"""
Recipe factory for creating experiment workflows by name.
"""

from pathlib import Path
from typing import Dict, List, Optional, Type, Union

from ..config import ExperimentConfig
from ..errors import ConfigError
from .backtranslation import BacktranslationRecipe
from .base import Recipe, RecipeType
from .baseline import BaselineRecipe
from .transfer import TransferRecipe

RECIPES: Dict[RecipeType, Type[Recipe]] = {
    RecipeType.BASELINE: BaselineRecipe,
    RecipeType.TRANSFER: TransferRecipe,
    RecipeType.BACKTRANSLATION: BacktranslationRecipe,
}


def get_available_recipes() -> List[str]:
    """
    Get list of recipe names.

    Returns:
        Names accepted by :func:`create_recipe` and ``run.recipe``.
    """
    return [recipe.value for recipe in RECIPES]


def create_recipe(
    config: ExperimentConfig,
    recipe_type: Optional[Union[str, RecipeType]] = None,
    outdir: Optional[Union[str, Path]] = None,
) -> Recipe:
    """
    Create a recipe instance.

    Args:
        config: Experiment settings.
        recipe_type: Recipe name (default: ``run.recipe`` from the config).
        outdir: Output directory override.

    Returns:
        Recipe ready to :meth:`~Recipe.run`.

    Raises:
        ConfigError: If the recipe name is unknown.
    """
    name = recipe_type if recipe_type is not None else config.run.recipe
    try:
        kind = RecipeType(name)
    except ValueError as e:
        raise ConfigError(
            f"unknown recipe {name!r}; available: {', '.join(get_available_recipes())}"
        ) from e
    if kind.value != config.run.recipe:
        config.run.recipe = kind.value
    return RECIPES[kind](config, outdir)
