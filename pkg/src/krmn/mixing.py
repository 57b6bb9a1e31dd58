"""Adaptation rules for the l2/l1 mixing parameter and the mixed-norm cost."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


@dataclass(frozen=True)
class MixingState:
    """Mixing parameter ``lam`` plus the constants of both adaptation rules.

    Rule 1 uses ``gamma``; rule 2 uses ``delta``, ``theta`` and ``beta`` and
    carries ``p``, a low-pass estimate of the error autocorrelation.
    """

    lam: float = 0.5
    p: float = 0.0
    gamma: float = 0.0
    delta: float = 1.0
    theta: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("delta must lie in [0, 1]")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")


def update_alg1(state: MixingState, e: float) -> MixingState:
    """lam <- clamp(lam + gamma * (|e| - e^2)).

    Small errors (|e| < 1) push the filter towards the squared-error update,
    large ones towards the sign-error update.
    """
    lam = _clamp01(state.lam + state.gamma * (abs(e) - e * e))
    return replace(state, lam=lam)


def update_alg2(state: MixingState, e: float, e_prev: float) -> MixingState:
    """p <- beta p + (1 - beta) e e_prev, then lam <- clamp(delta lam + theta p^2)."""
    p = state.beta * state.p + (1.0 - state.beta) * e * e_prev
    lam = _clamp01(state.delta * state.lam + state.theta * p * p)
    return replace(state, lam=lam, p=p)


def mixed_norm_cost(errors, lam: float) -> float:
    """Sample estimate of ``lam * E[e^2] + (1 - lam) * E[|e|]``."""
    errors = np.asarray(errors, dtype=float).ravel()
    if errors.size == 0:
        raise ValueError("mixed_norm_cost needs at least one error sample")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    return float(lam * np.mean(errors**2) + (1.0 - lam) * np.mean(np.abs(errors)))
