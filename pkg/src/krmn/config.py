"""Experiment config files (YAML).

A config file describes one figure: shared data/noise settings and a named
set of filters that all run on the same seeded data. See
``docs/reproduction.md`` for the field reference.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Dict, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .bench import DEFAULT_TAPS, ExperimentConfig, PlantConfig
from .filters import ALGORITHMS, FilterConfig
from .kernels import KernelParams
from .mixing import MixingState
from .noise import RNG_ALGORITHM, BgParams, SasParams, snr_to_dispersion


class ConfigError(ValueError):
    """A config file could not be read or failed validation."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MixingSpec(_Strict):
    initial_lambda: float = Field(0.5, ge=0, le=1)
    gamma: float = Field(0.0, ge=0)
    delta: float = Field(1.0, ge=0, le=1)
    theta: float = Field(0.0, ge=0)
    beta: float = Field(0.0, ge=0, le=1)


class FilterSpec(_Strict):
    algorithm: Literal[ALGORITHMS]  # type: ignore[valid-type]
    step_size: float = Field(ge=0)
    fixed_lambda: float = Field(0.5, ge=0, le=1)
    epsilon_u: float = Field(0.0, ge=0)
    mixing_rule: Literal[1, 2] = 2
    bandwidth: Optional[float] = Field(None, gt=0)
    mixing: MixingSpec = MixingSpec()


class BgSpec(_Strict):
    model: Literal["bg"]
    impulse_prob: float = Field(0.2, ge=0, le=1)
    sigma_impulse: float = Field(0.02, ge=0)
    sigma_gauss: float = Field(0.02, ge=0)


class SasSpec(_Strict):
    model: Literal["sas"]
    alpha: float = Field(gt=0, le=2)
    dispersion: Optional[float] = Field(None, gt=0)
    snr_db: Optional[float] = None

    @model_validator(mode="after")
    def _one_scale(self):
        if (self.dispersion is None) == (self.snr_db is None):
            raise ValueError("give exactly one of 'dispersion' or 'snr_db'")
        return self


class PlantSpec(_Strict):
    fir_taps: Tuple[float, ...] = DEFAULT_TAPS
    input_variance: float = Field(1.0, gt=0)


class ScaleSpec(_Strict):
    train_len: int = Field(15000, ge=1)
    test_len: int = Field(1000, ge=1)
    trials: int = Field(50, ge=1)


class ConfigFile(_Strict):
    name: str
    description: str = ""
    rng: Literal[RNG_ALGORITHM] = RNG_ALGORITHM  # type: ignore[valid-type]
    seed: int = Field(0, ge=0)
    train_len: int = Field(3000, ge=1)
    test_len: int = Field(500, ge=1)
    trials: int = Field(10, ge=1)
    embed_dim: int = Field(9, ge=1)
    eval_every: int = Field(10, ge=1)
    noisy_test: bool = False
    bandwidth: float = Field(0.1, gt=0)
    full_scale: ScaleSpec = ScaleSpec()
    plant: PlantSpec = PlantSpec()
    noise: Annotated[Union[BgSpec, SasSpec], Field(discriminator="model")]
    filters: Dict[str, FilterSpec] = Field(min_length=1)

    def noise_params(self) -> BgParams | SasParams:
        n = self.noise
        if isinstance(n, BgSpec):
            return BgParams(n.impulse_prob, n.sigma_impulse, n.sigma_gauss)
        m = n.dispersion if n.dispersion is not None else snr_to_dispersion(n.snr_db, self.plant.input_variance)
        return SasParams(n.alpha, m)

    def filter_config(self, name: str) -> FilterConfig:
        f = self.filters[name]
        mix = f.mixing
        return FilterConfig(
            algorithm=f.algorithm,
            step_size=f.step_size,
            fixed_lambda=f.fixed_lambda,
            kernel=KernelParams(f.bandwidth if f.bandwidth is not None else self.bandwidth),
            epsilon_u=f.epsilon_u,
            mixing=MixingState(lam=mix.initial_lambda, gamma=mix.gamma, delta=mix.delta, theta=mix.theta, beta=mix.beta),
            mixing_rule=f.mixing_rule,
        )

    def experiments(self, full_scale: bool = False) -> dict[str, ExperimentConfig]:
        sizes = self.full_scale if full_scale else self
        plant = PlantConfig(self.plant.fir_taps, self.plant.input_variance)
        noise = self.noise_params()
        return {
            name: ExperimentConfig(
                filter=self.filter_config(name),
                plant=plant,
                noise=noise,
                train_len=sizes.train_len,
                test_len=sizes.test_len,
                trials=sizes.trials,
                seed=self.seed,
                embed_dim=self.embed_dim,
                eval_every=self.eval_every,
                noisy_test=self.noisy_test,
            )
            for name in self.filters
        }

    def digest(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _describe(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"field '{loc}': {item['msg']}")
    return "; ".join(lines)


def parse_config(data) -> ConfigFile:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of field names to values")
    try:
        return ConfigFile.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def load_config(path) -> ConfigFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file '{path}': {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file '{path}' is not valid YAML: {exc}") from None
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
