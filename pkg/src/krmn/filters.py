"""One-step online updates for the kernel mixed-norm filter family.

Every kernel algorithm shares one update: predict ``y`` with the current
expansion, form ``e = d - y`` and apply the gain

    mu * (2 * lam * e + (1 - lam) * sign(e))

either as a new center at ``u`` or, for quantized variants, as a change to
the coefficient of the nearest center. Algorithms differ only in how ``lam``
is chosen:

========  ======================================================
KLMS      textbook KLMS, gain ``mu * e`` (same as KRMN, lam=1, mu/2)
KLAD      lam = 0 (sign error)
KRMN      fixed lam
VPKRMN1   lam adapted by :func:`~krmn.mixing.update_alg1`
VPKRMN2   lam adapted by :func:`~krmn.mixing.update_alg2`
QKLMS     KLMS with input-space quantization
QVPKRMN   VPKRMN (rule 1 or 2) with input-space quantization
LinLMS    linear RMN with lam = 1, gain ``2 * mu * e``
LinRMN    linear RMN with fixed lam
========  ======================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .kernels import KernelParams
from .mixing import MixingState, update_alg1, update_alg2
from .quantizer import Merge, decide_from_sq
from .rbf_network import RbfNetwork

KERNEL_ALGORITHMS = ("KLMS", "KLAD", "KRMN", "VPKRMN1", "VPKRMN2", "QKLMS", "QVPKRMN")
LINEAR_ALGORITHMS = ("LinLMS", "LinRMN")
ALGORITHMS = KERNEL_ALGORITHMS + LINEAR_ALGORITHMS


class DataError(ValueError):
    """A sample contained NaN or infinite entries."""


def sign(x: float) -> float:
    return 1.0 if x > 0 else -1.0 if x < 0 else 0.0


def krmn_gain(e: float, lam: float, mu: float) -> float:
    return mu * (2.0 * lam * e + (1.0 - lam) * sign(e))


@dataclass(frozen=True)
class FilterConfig:
    algorithm: str
    step_size: float
    fixed_lambda: float = 0.5
    kernel: KernelParams = field(default_factory=KernelParams)
    epsilon_u: float = 0.0
    mixing: MixingState = field(default_factory=MixingState)
    mixing_rule: int = 2  # QVPKRMN only; VPKRMN1/VPKRMN2 imply their rule

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not (self.step_size >= 0 and math.isfinite(self.step_size)):
            raise ValueError(f"step_size must be a nonnegative finite number, got {self.step_size!r}")
        if not 0.0 <= self.fixed_lambda <= 1.0:
            raise ValueError(f"fixed_lambda must lie in [0, 1], got {self.fixed_lambda!r}")
        if not self.epsilon_u >= 0:
            raise ValueError(f"epsilon_u must be nonnegative, got {self.epsilon_u!r}")
        if self.mixing_rule not in (1, 2):
            raise ValueError(f"mixing_rule must be 1 or 2, got {self.mixing_rule!r}")

    @property
    def is_linear(self) -> bool:
        return self.algorithm in LINEAR_ALGORITHMS

    @property
    def is_quantized(self) -> bool:
        return self.algorithm in ("QKLMS", "QVPKRMN")

    @property
    def rule(self) -> int:
        """Mixing adaptation rule in use: 0 (fixed), 1 or 2."""
        if self.algorithm == "VPKRMN1":
            return 1
        if self.algorithm == "VPKRMN2":
            return 2
        if self.algorithm == "QVPKRMN":
            return self.mixing_rule
        return 0

    def initial_lambda(self) -> float:
        if self.algorithm in ("KLMS", "QKLMS", "LinLMS"):
            return 1.0
        if self.algorithm == "KLAD":
            return 0.0
        if self.algorithm in ("KRMN", "LinRMN"):
            return self.fixed_lambda
        return self.mixing.lam


@dataclass
class FilterState:
    """Mutable per-run state. ``last_update`` is ``(center index, coefficient change)``."""

    network: RbfNetwork | None
    weights: np.ndarray | None
    mixing: MixingState
    previous_error: float = 0.0
    iteration: int = 0
    last_update: tuple[int, float] | None = None

    @property
    def lam(self) -> float:
        return self.mixing.lam

    @property
    def size(self) -> int:
        if self.network is not None:
            return len(self.network)
        return 0 if self.weights is None else len(self.weights)


def init_state(config: FilterConfig, dim: int | None = None) -> FilterState:
    mixing = replace(config.mixing, lam=config.initial_lambda())
    if config.is_linear:
        if dim is None:
            raise ValueError("linear filters need the input dimension")
        return FilterState(None, np.zeros(dim), mixing)
    return FilterState(RbfNetwork(config.kernel, dim), None, mixing)


def _check_sample(u, d):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)) or not math.isfinite(d):
        raise DataError("sample contains non-finite values")
    return u, float(d)


def _adapt_mixing(state: FilterState, config: FilterConfig, e: float) -> None:
    rule = config.rule
    if rule == 1:
        state.mixing = update_alg1(state.mixing, e)
    elif rule == 2:
        state.mixing = update_alg2(state.mixing, e, state.previous_error)


def step(state: FilterState, config: FilterConfig, u, d: float) -> tuple[FilterState, float, float]:
    """Process one sample ``(u, d)``; ``state`` is updated in place and returned."""
    if config.is_linear:
        return step_linear(state, config, u, d)
    u, d = _check_sample(u, d)
    net = state.network
    sq = net.sq_distances(u)
    y = net.predict_from_sq(sq)
    e = d - y
    lam = state.mixing.lam
    if config.algorithm in ("KLMS", "QKLMS"):
        gain = krmn_gain(e, 1.0, 0.5 * config.step_size)
    else:
        gain = krmn_gain(e, lam, config.step_size)

    action = decide_from_sq(sq, config.epsilon_u) if config.is_quantized else None
    if isinstance(action, Merge):
        net.merge_coefficient(action.index, gain)
        state.last_update = (action.index, gain)
    else:
        net.append_center(u, gain)
        state.last_update = (len(net) - 1, gain)

    _adapt_mixing(state, config, e)
    state.previous_error = e
    state.iteration += 1
    return state, e, y


def step_linear(state: FilterState, config: FilterConfig, u, d: float) -> tuple[FilterState, float, float]:
    """LMS / RMN in input space: ``w <- w + gain * u``."""
    u, d = _check_sample(u, d)
    w = state.weights
    if u.shape != w.shape:
        raise ValueError(f"dimension mismatch: input has shape {u.shape}, weights {w.shape}")
    y = float(np.dot(w, u))
    e = d - y
    gain = krmn_gain(e, state.mixing.lam, config.step_size)
    w += gain * u
    state.last_update = None
    state.previous_error = e
    state.iteration += 1
    return state, e, y


@dataclass
class Trajectory:
    outputs: np.ndarray
    errors: np.ndarray
    lambdas: np.ndarray  # lam used at each step
    sizes: np.ndarray  # network size after each step


def run_filter(config: FilterConfig, inputs, targets, state: FilterState | None = None) -> Trajectory:
    """Run ``step`` over a whole stream and keep the per-step traces."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.asarray(targets, dtype=float)
    n = len(targets)
    if state is None:
        state = init_state(config, inputs.shape[1])
    ys, es, lams = np.empty(n), np.empty(n), np.empty(n)
    sizes = np.empty(n, dtype=int)
    for i in range(n):
        lams[i] = state.mixing.lam
        _, es[i], ys[i] = step(state, config, inputs[i], targets[i])
        sizes[i] = state.size
    return Trajectory(ys, es, lams, sizes)
