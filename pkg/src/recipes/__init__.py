"""
Experiment recipes: baseline, transfer learning and back-translation.
"""

from .backtranslation import BacktranslationRecipe, backtranslate
from .base import REPORT_FILE, RESOLVED_CONFIG, Recipe, RecipeResult, RecipeType
from .baseline import BaselineRecipe
from .factory import RECIPES, create_recipe, get_available_recipes
from .transfer import TransferRecipe

__all__ = [
    "REPORT_FILE",
    "RESOLVED_CONFIG",
    "RECIPES",
    "BacktranslationRecipe",
    "BaselineRecipe",
    "Recipe",
    "RecipeResult",
    "RecipeType",
    "TransferRecipe",
    "backtranslate",
    "create_recipe",
    "get_available_recipes",
]
