"""Impulsive noise: Bernoulli-Gaussian mixture and symmetric alpha-stable draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Pinned generator; bump the version if the draw order below ever changes.
RNG_ALGORITHM = "pcg64-v1"


@dataclass(frozen=True)
class BgParams:
    """Gaussian background (std ``sigma_gauss``) plus, with probability
    ``impulse_prob``, an independent Gaussian impulse (std ``sigma_impulse``)."""

    impulse_prob: float = 0.2
    sigma_impulse: float = 0.02
    sigma_gauss: float = 0.02

    def __post_init__(self):
        if not 0.0 <= self.impulse_prob <= 1.0:
            raise ValueError(f"impulse_prob must lie in [0, 1], got {self.impulse_prob!r}")
        if self.sigma_impulse < 0 or self.sigma_gauss < 0:
            raise ValueError("noise standard deviations must be nonnegative")


@dataclass(frozen=True)
class SasParams:
    """Symmetric alpha-stable law with characteristic function exp(-dispersion |t|^alpha)."""

    alpha: float = 1.4
    dispersion: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if not self.dispersion > 0:
            raise ValueError(f"dispersion must be positive, got {self.dispersion!r}")


class SeededStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Distinct ``stream_id`` values under one seed give independent substreams
    (one per Monte Carlo trial).
    """

    def __init__(self, seed: int, stream_id: int = 0, algorithm: str = RNG_ALGORITHM):
        if algorithm != RNG_ALGORITHM:
            raise ValueError(f"unsupported RNG algorithm {algorithm!r}; this build provides {RNG_ALGORITHM!r}")
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))))

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, stream_id={self.stream_id})"


def sample_bg(params: BgParams, stream: SeededStream, size=None, return_gates: bool = False):
    """Draw ``g + b * i`` with g ~ N(0, sigma_gauss^2), b ~ Bernoulli(c), i ~ N(0, sigma_impulse^2).

    With ``return_gates`` the Bernoulli indicators are returned as well.
    """
    rng = stream.rng
    g = rng.normal(0.0, params.sigma_gauss, size)
    b = rng.random(size) < params.impulse_prob
    i = rng.normal(0.0, params.sigma_impulse, size)
    v = g + b * i
    if size is None:
        v, b = float(v), bool(b)
    return (v, b) if return_gates else v


def standard_sas(alpha: float, phi, w):
    """Chambers-Mallows-Stuck transform of phi ~ U(-pi/2, pi/2) and w ~ Exp(1).

    The result has characteristic function exp(-|t|^alpha).
    """
    if alpha == 1.0:
        return np.tan(phi)
    if alpha == 2.0:
        return 2.0 * np.sqrt(w) * np.sin(phi)
    return (
        np.sin(alpha * phi)
        / np.cos(phi) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * phi) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_sas(params: SasParams, stream: SeededStream, size=None):
    rng = stream.rng
    phi = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    x = params.dispersion ** (1.0 / params.alpha) * standard_sas(params.alpha, phi, w)
    return float(x) if size is None else x


def snr_to_dispersion(snr_db: float, input_variance: float = 1.0) -> float:
    """Dispersion giving ``input_variance / dispersion`` equal to ``snr_db`` decibels."""
    if not input_variance > 0:
        raise ValueError("input_variance must be positive")
    return input_variance / 10.0 ** (snr_db / 10.0)


def sample_noise(params: BgParams | SasParams, stream: SeededStream, size=None):
    if isinstance(params, BgParams):
        return sample_bg(params, stream, size)
    if isinstance(params, SasParams):
        return sample_sas(params, stream, size)
    raise TypeError(f"unsupported noise model {type(params).__name__}")
