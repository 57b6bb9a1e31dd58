"""Nonlinear system-identification benchmark with impulsive output noise.

The plant is a 9-tap FIR filter followed by ``r -> r - 0.9 r^2``; white
Gaussian input, noisy training targets, clean test targets by default.
Test-set predictions are maintained incrementally (each step changes one
coefficient), so the test MSE costs O(test_len) per recorded point.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .filters import FilterConfig, init_state, step
from .noise import BgParams, SasParams, SeededStream, sample_noise

DEFAULT_TAPS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.4, 0.3, 0.2, 0.1)
NONLINEAR_COEF = 0.9

FULL_SCALE = {"train_len": 15000, "test_len": 1000, "trials": 50}


class ExperimentDiverged(RuntimeError):
    """Every trial of an experiment diverged."""


@dataclass(frozen=True)
class PlantConfig:
    fir_taps: tuple[float, ...] = DEFAULT_TAPS
    input_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "fir_taps", tuple(float(t) for t in self.fir_taps))
        if not self.fir_taps:
            raise ValueError("fir_taps must not be empty")
        if not self.input_variance > 0:
            raise ValueError("input_variance must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    filter: FilterConfig
    plant: PlantConfig = field(default_factory=PlantConfig)
    noise: BgParams | SasParams = field(default_factory=BgParams)
    train_len: int = 3000
    test_len: int = 500
    trials: int = 10
    seed: int = 0
    embed_dim: int = 9
    eval_every: int = 10
    noisy_test: bool = False

    def __post_init__(self):
        for name in ("train_len", "test_len", "trials", "embed_dim", "eval_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def full_scale(self) -> "ExperimentConfig":
        return replace(self, **FULL_SCALE)


def plant_output(cfg: PlantConfig, input_history, v: float = 0.0) -> float:
    """Plant output for the newest input; ``input_history`` is oldest-first."""
    hist = np.asarray(input_history, dtype=float)
    taps = np.asarray(cfg.fir_taps)
    if hist.ndim != 1 or hist.size < taps.size:
        raise ValueError(f"input history needs at least {taps.size} samples, got {hist.size}")
    r = float(np.dot(taps, hist[::-1][: taps.size]))
    return r - NONLINEAR_COEF * r * r + v


def plant_response(cfg: PlantConfig, x) -> np.ndarray:
    """Noise-free plant output for a whole input signal (zero initial state)."""
    x = np.asarray(x, dtype=float)
    r = np.convolve(x, cfg.fir_taps)[: x.size]
    return r - NONLINEAR_COEF * r * r


def embed(x, dim: int) -> np.ndarray:
    """Rows ``[x(n), x(n-1), ..., x(n-dim+1)]`` with zero-padded warm-up."""
    x = np.asarray(x, dtype=float)
    padded = np.concatenate([np.zeros(dim - 1), x])
    windows = np.lib.stride_tricks.sliding_window_view(padded, dim)
    return np.ascontiguousarray(windows[:, ::-1])


@dataclass
class Dataset:
    train_u: np.ndarray
    train_d: np.ndarray
    test_u: np.ndarray
    test_d: np.ndarray


def make_dataset(cfg: ExperimentConfig, stream: SeededStream) -> Dataset:
    rng = stream.rng
    std = math.sqrt(cfg.plant.input_variance)
    # draw order is part of the reproducibility contract
    x_train = rng.normal(0.0, std, cfg.train_len)
    x_test = rng.normal(0.0, std, cfg.test_len)
    v_train = np.asarray(sample_noise(cfg.noise, stream, cfg.train_len))
    d_train = plant_response(cfg.plant, x_train) + v_train
    d_test = plant_response(cfg.plant, x_test)
    if cfg.noisy_test:
        d_test = d_test + np.asarray(sample_noise(cfg.noise, stream, cfg.test_len))
    return Dataset(embed(x_train, cfg.embed_dim), d_train, embed(x_test, cfg.embed_dim), d_test)


@dataclass
class TrialResult:
    iterations: np.ndarray
    test_mse: np.ndarray
    network_size: np.ndarray
    lam: np.ndarray  # lam after each recorded iteration
    lambda_trace: np.ndarray  # lam used at every training step
    diverged: bool = False
    diverged_at: int | None = None


def _record_points(n: int, every: int) -> np.ndarray:
    pts = list(range(0, n + 1, every))
    if pts[-1] != n:
        pts.append(n)
    return np.array(pts)


def run_trial(cfg: ExperimentConfig, stream: SeededStream) -> TrialResult:
    data = make_dataset(cfg, stream)
    fcfg = cfg.filter
    state = init_state(fcfg, cfg.embed_dim)
    points = _record_points(cfg.train_len, cfg.eval_every)
    mse = np.empty(points.size)
    sizes = np.empty(points.size, dtype=int)
    lams = np.empty(points.size)
    lam_trace = np.empty(cfg.train_len)

    test_u, test_d = data.test_u, data.test_d
    pred = np.zeros(test_d.size)
    h = fcfg.kernel.bandwidth

    def record(k):
        if fcfg.is_linear:
            pred[:] = test_u @ state.weights
        mse[k] = np.mean((test_d - pred) ** 2)
        sizes[k] = state.size
        lams[k] = state.lam

    record(0)
    k = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(cfg.train_len):
            lam_trace[n] = state.lam
            _, e, _ = step(state, fcfg, data.train_u[n], data.train_d[n])
            if not math.isfinite(e):
                return _truncated(points, mse, sizes, lams, lam_trace, k, n + 1)
            if state.last_update is not None:
                j, delta = state.last_update
                diff = test_u - state.network.centers[j]
                pred += delta * np.exp(-h * np.einsum("ij,ij->i", diff, diff))
            if points[k] == n + 1:
                record(k)
                if not math.isfinite(mse[k]):
                    return _truncated(points, mse, sizes, lams, lam_trace, k, n + 1)
                k += 1
    return TrialResult(points, mse, sizes, lams, lam_trace)


def _truncated(points, mse, sizes, lams, lam_trace, k, n) -> TrialResult:
    return TrialResult(points[:k], mse[:k], sizes[:k], lams[:k], lam_trace[:n], diverged=True, diverged_at=n)


@dataclass
class LearningCurve:
    iterations: np.ndarray
    test_mse: np.ndarray
    network_size: np.ndarray
    lambda_mean: np.ndarray
    trials: int
    diverged_trials: list[int] = field(default_factory=list)
    per_trial: list[TrialResult] | None = None

    def steady_state_mse(self, fraction: float = 0.1) -> float:
        """Mean test MSE over the final ``fraction`` of training iterations."""
        last = self.iterations[-1]
        mask = self.iterations > last * (1.0 - fraction)
        return float(np.mean(self.test_mse[mask]))


def _run_one(args):
    cfg, stream_id = args
    return run_trial(cfg, SeededStream(cfg.seed, stream_id))


def run_experiment(cfg: ExperimentConfig, workers: int = 1, keep_trials: bool = False) -> LearningCurve:
    """Run ``cfg.trials`` trials on substreams ``0..trials-1`` and average them.

    Diverged trials are excluded from the means and listed in
    ``diverged_trials``.
    """
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]

    good = [r for r in results if not r.diverged]
    diverged = [i for i, r in enumerate(results) if r.diverged]
    if not good:
        raise ExperimentDiverged(f"all {cfg.trials} trials diverged")
    curve = LearningCurve(
        iterations=good[0].iterations.copy(),
        test_mse=np.mean([r.test_mse for r in good], axis=0),
        network_size=np.mean([r.network_size for r in good], axis=0),
        lambda_mean=np.mean([r.lam for r in good], axis=0),
        trials=cfg.trials,
        diverged_trials=diverged,
    )
    if keep_trials:
        curve.per_trial = results
    return curve
