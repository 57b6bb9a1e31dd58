"""Figure-to-config map and a validator that runs every shipped recipe."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bench import ExperimentDiverged, run_experiment
from .config import ConfigError, load_config

CONFIG_DIR = Path(__file__).parent / "configs"


@dataclass(frozen=True)
class FigureRecipe:
    figure: str
    config: str
    expected: str
    runtime: str

    def path(self, config_dir=None) -> Path:
        return Path(config_dir or CONFIG_DIR) / self.config


RECIPES = (
    FigureRecipe("3", "fig3_bg.yaml", "gamma=5e-5 converges faster than 1e-5; theta=0.01 faster than 0.05", "~15 s"),
    FigureRecipe("4", "fig4_bg.yaml", "VPKRMN2 <= VPKRMN1 < KRMN(0.3) < KLMS in steady-state MSE", "~20 s"),
    FigureRecipe("5", "fig5_bg.yaml", "QVPKRMN close to VPKRMN and below QKLMS", "~15 s"),
    FigureRecipe("6", "fig6_bg.yaml", "QVPKRMN network size ends near 20% of the training length", "~5 s"),
    FigureRecipe("7", "fig7_sas.yaml", "parameter sensitivity of both rules under alpha-stable noise", "~15 s"),
    FigureRecipe("8", "fig8_sas.yaml", "VPKRMN family below KLMS; linear baselines far above the kernel filters", "~20 s"),
    FigureRecipe("9", "fig9_sas.yaml", "QVPKRMN close to VPKRMN and below QKLMS", "~15 s"),
    FigureRecipe("10", "fig10_sas.yaml", "QVPKRMN network size ends near 20% of the training length", "~5 s"),
)


@dataclass
class RecipeResult:
    figure: str
    config: str
    ok: bool
    message: str = ""


@dataclass
class RecipeReport:
    results: list[RecipeResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if r.ok else 'FAIL'} fig{r.figure} {r.config}" + (f": {r.message}" if r.message else "")
            for r in self.results
        ]


def _check_recipe(recipe: FigureRecipe, config_dir, train_len: int | None, trials: int | None) -> RecipeResult:
    try:
        cfg = load_config(recipe.path(config_dir))
    except ConfigError as exc:
        return RecipeResult(recipe.figure, recipe.config, False, str(exc))
    for name, exp in cfg.experiments().items():
        if train_len is not None:
            exp = replace(exp, train_len=train_len)
        if trials is not None:
            exp = replace(exp, trials=trials)
        try:
            curve = run_experiment(exp)
        except ExperimentDiverged as exc:
            return RecipeResult(recipe.figure, recipe.config, False, f"{name}: {exc}")
        if not np.all(np.isfinite(curve.test_mse)):
            return RecipeResult(recipe.figure, recipe.config, False, f"{name}: non-finite test MSE")
        if np.any(np.diff(curve.network_size) < 0):
            return RecipeResult(recipe.figure, recipe.config, False, f"{name}: network size decreased")
    return RecipeResult(recipe.figure, recipe.config, True)


def validate_recipes(
    recipes=RECIPES, config_dir=None, train_len: int | None = None, trials: int | None = None
) -> RecipeReport:
    """Parse and run every recipe at desk scale.

    ``train_len`` and ``trials`` shrink the runs for smoke testing.
    """
    report = RecipeReport()
    for recipe in recipes:
        report.results.append(_check_recipe(recipe, config_dir, train_len, trials))
    return report
