"""Numerical checks of the convergence analysis.

Everything here runs in an explicit (finite-dimensional) feature space, where
the weight vector and its deviation from a reference can be written down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .filters import krmn_gain
from .kernels import POLY2, ExplicitFeatureMap, map_features
from .mixing import MixingState, update_alg2
from .quantizer import Codebook, Merge, decide
from .rbf_network import RbfNetwork

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
KAPPA_FLOOR = 1e-12


class SingularKernelError(ArithmeticError):
    """kappa(u_q, u) is too close to zero to divide by."""


class RankDeficiencyError(np.linalg.LinAlgError):
    def __init__(self, dim: int, rank: int, column: int):
        self.dim, self.rank, self.column = dim, rank, column
        super().__init__(
            f"feature autocorrelation matrix is singular: rank {rank} < {dim}; "
            f"feature {column} is linearly dependent on features 0..{column - 1}"
        )


@dataclass
class ExplicitWeightState:
    omega: np.ndarray
    omega_opt: np.ndarray
    fmap: ExplicitFeatureMap

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float).copy()
        self.omega_opt = np.asarray(self.omega_opt, dtype=float)
        n = self.fmap.feature_dim
        if self.omega.shape != (n,) or self.omega_opt.shape != (n,):
            raise ValueError(f"omega and omega_opt must have length {n}")

    @property
    def deviation(self) -> np.ndarray:
        return self.omega - self.omega_opt


@dataclass(frozen=True)
class EcrRecord:
    error: float
    e_a: float
    e_p: float
    kappa: float
    v_norm_before: float
    v_norm_after: float
    beta_q: float
    residual: float


def ecr_step(state: ExplicitWeightState, u, u_q, d: float, lam: float, mu: float) -> EcrRecord:
    """One quantized mixed-norm update of ``state.omega`` (in place) and the
    energy balance across it.

    The balance
        |V_new|^2 + e_a^2 / k^2 = |V_old|^2 + e_p^2 / k^2 + beta_q
    is exact when the quantized feature vector has unit norm (normalized
    maps); ``residual`` is the absolute mismatch of the two sides.
    """
    phi = map_features(u, state.fmap)
    phi_q = map_features(u_q, state.fmap)
    kappa = float(phi_q @ phi)
    if abs(kappa) < KAPPA_FLOOR:
        raise SingularKernelError(f"kappa(u_q, u) = {kappa:.3e} is below {KAPPA_FLOOR:g}")

    v_old = state.deviation
    e_a = float(v_old @ phi)
    e = d - float(state.omega @ phi)
    state.omega = state.omega + krmn_gain(e, lam, mu) * phi_q
    v_new = state.deviation
    e_p = float(v_new @ phi)

    k2 = kappa * kappa
    de = e_p - e_a
    beta_q = 2.0 * de * (float(v_old @ phi_q) * kappa - e_a) / k2
    before = float(v_old @ v_old)
    after = float(v_new @ v_new)
    # Both sides carry e^2 / k^2, which is huge when kappa is small. Comparing
    # the differences |V_new|^2 - |V_old|^2 and (e_p^2 - e_a^2) / k^2 avoids
    # subtracting two large, nearly equal sums.
    d_norm = float((v_new - v_old) @ (v_new + v_old))
    residual = abs(d_norm - de * (e_p + e_a) / k2 - beta_q)
    return EcrRecord(e, e_a, e_p, kappa, before, after, beta_q, residual)


def run_ecr_check(
    steps: int = 500,
    kind: str = POLY2,
    input_dim: int = 3,
    seed: int = 0,
    mu: float = 0.1,
    epsilon_u: float = 0.3,
    mixing: MixingState | None = None,
    omega_opt=None,
) -> list[EcrRecord]:
    """Run a quantized VPKRMN (rule 2) in an explicit normalized feature space
    on random inputs from [-1, 1]^input_dim and check the energy balance at
    every step.

    ``omega_opt`` defaults to a random reference vector.
    """
    fmap = ExplicitFeatureMap(kind, input_dim, normalize=True)
    rng = np.random.default_rng(seed)
    if omega_opt is None:
        omega_opt = rng.normal(size=fmap.feature_dim)
    teacher = rng.normal(size=fmap.feature_dim)
    state = ExplicitWeightState(np.zeros(fmap.feature_dim), omega_opt, fmap)
    mix = mixing if mixing is not None else MixingState(lam=0.5, delta=0.99, theta=0.01, beta=0.9)
    book = Codebook(RbfNetwork(dim=input_dim), epsilon_u)
    records = []
    e_prev = 0.0
    for _ in range(steps):
        u = rng.uniform(-1.0, 1.0, input_dim)
        d = float(teacher @ map_features(u, fmap)) + 0.05 * rng.standard_normal()
        action = decide(book, u)
        if isinstance(action, Merge):
            u_q = book.centers[action.index]
        else:
            book.network.append_center(u, 0.0)
            u_q = u
        rec = ecr_step(state, u, u_q, d, mix.lam, mu)
        mix = update_alg2(mix, rec.error, e_prev)
        e_prev = rec.error
        records.append(rec)
    return records


def stepsize_bound(lam: float, sigma_e: float, trace_r: float) -> float:
    """Upper step-size limit for mean convergence using tr(R).

    ``trace_r`` may be replaced by the largest eigenvalue of R, which gives
    the looser limit (see :func:`stepsize_bound_eig`).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if not (sigma_e > 0 and trace_r > 0):
        raise ValueError("sigma_e and trace_r must be positive")
    return 2.0 / ((2.0 * lam + (1.0 - lam) * SQRT_2_OVER_PI / sigma_e) * trace_r)


def stepsize_bound_eig(lam: float, sigma_e: float, lambda_max: float) -> float:
    return stepsize_bound(lam, sigma_e, lambda_max)


def error_std(errors, window: int = 200) -> float:
    """Sample standard deviation of the last ``window`` errors."""
    tail = np.asarray(errors, dtype=float)[-window:]
    if tail.size < 2:
        raise ValueError("need at least two errors to estimate sigma_e")
    return float(np.std(tail, ddof=1))


def _first_dependent_column(r: np.ndarray, tol: float) -> int:
    for k in range(1, r.shape[0] + 1):
        if np.linalg.matrix_rank(r[:k, :k], tol=tol) < k:
            return k - 1
    return r.shape[0] - 1


def wiener_solution(inputs, targets) -> tuple[np.ndarray, float]:
    """Least-squares optimum ``R^-1 p`` from sample moments, and the minimum
    MSE ``E[d^2] - p.omega_opt``.

    ``inputs`` holds one feature vector per row.
    """
    phi = np.atleast_2d(np.asarray(inputs, dtype=float))
    d = np.asarray(targets, dtype=float).ravel()
    if phi.shape[0] != d.size:
        raise ValueError(f"{phi.shape[0]} feature rows but {d.size} targets")
    n, dim = phi.shape
    r = phi.T @ phi / n
    p = phi.T @ d / n
    tol = dim * np.finfo(float).eps * max(np.abs(r).max(), 1e-300) * 10
    rank = np.linalg.matrix_rank(r, tol=tol)
    if rank < dim:
        raise RankDeficiencyError(dim, rank, _first_dependent_column(r, tol))
    omega = np.linalg.solve(r, p)
    zeta = float(d @ d / n - p @ omega)
    return omega, zeta


@dataclass(frozen=True)
class MomentState:
    """Second moment of the weight deviation in the eigenbasis of R."""

    xi: np.ndarray
    eigenvalues: np.ndarray
    sigma_e: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        ev = np.asarray(self.eigenvalues, dtype=float)
        if xi.shape != (ev.size, ev.size):
            raise ValueError("xi must be square with one row per eigenvalue")
        if not np.array_equal(xi, xi.T):
            raise ValueError("xi must be symmetric")
        if np.any(ev < 0):
            raise ValueError("eigenvalues must be nonnegative")
        if not self.sigma_e > 0:
            raise ValueError("sigma_e must be positive")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eigenvalues", ev)

    @classmethod
    def from_correlation(cls, r, sigma_e: float, eta=None) -> "MomentState":
        """Rotate ``eta`` (default zero) into the eigenbasis of ``r``."""
        r = np.asarray(r, dtype=float)
        ev, m = np.linalg.eigh(r)
        ev = np.clip(ev, 0.0, None)
        if eta is None:
            xi = np.zeros_like(r)
        else:
            xi = m.T @ np.asarray(eta, dtype=float) @ m
            xi = 0.5 * (xi + xi.T)
        return cls(xi, ev, sigma_e)


def moment_recursion_step(state: MomentState, lam: float, mu: float) -> MomentState:
    """Elementwise second-moment update.

    xi_ij <- (1 - mu (1 - lam) sqrt(2/pi) / sigma_e (l_i + l_j)) xi_ij
             + mu^2 l_i [i == j] + 4 mu lam sigma_e^2
    """
    ev = state.eigenvalues
    c = mu * (1.0 - lam) * SQRT_2_OVER_PI / state.sigma_e
    factor = 1.0 - c * (ev[:, None] + ev[None, :])
    xi = factor * state.xi + mu * mu * np.diag(ev) + 4.0 * mu * lam * state.sigma_e**2
    return replace(state, xi=xi)


@dataclass
class MisalignmentRun:
    mu: float
    bound: float
    mean_deviation_norm: np.ndarray  # ||mean over trials of V(n)||, n = 0..steps


def mean_misalignment(
    mu: float,
    lam: float = 0.5,
    steps: int = 60,
    trials: int = 200,
    dim: int = 4,
    noise_std: float = 1.0,
    seed: int = 0,
) -> MisalignmentRun:
    """Mean weight deviation of a fixed-lam mixed-norm filter on a linear
    problem ``d = w_opt.u + v`` with ``u ~ N(0, I)``.

    The reference vector and ``sigma_e = sqrt(zeta_min)`` come from
    :func:`wiener_solution` on a calibration sample, and the returned
    ``bound`` is :func:`stepsize_bound` for that problem.
    """
    rng = np.random.default_rng(seed)
    w_true = rng.normal(size=dim)
    cal_u = rng.normal(size=(20000, dim))
    cal_d = cal_u @ w_true + noise_std * rng.normal(size=20000)
    omega_opt, zeta = wiener_solution(cal_u, cal_d)
    trace_r = float(np.trace(cal_u.T @ cal_u / cal_u.shape[0]))
    bound = stepsize_bound(lam, math.sqrt(zeta), trace_r)

    w = np.zeros((trials, dim))
    norms = np.empty(steps + 1)
    norms[0] = np.linalg.norm((w - omega_opt).mean(axis=0))
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(steps):
            u = rng.normal(size=(trials, dim))
            d = u @ w_true + noise_std * rng.normal(size=trials)
            e = d - np.einsum("ij,ij->i", w, u)
            gain = mu * (2.0 * lam * e + (1.0 - lam) * np.sign(e))
            w = w + gain[:, None] * u
            norms[n + 1] = np.linalg.norm((w - omega_opt).mean(axis=0))
    norms[~np.isfinite(norms)] = np.inf
    return MisalignmentRun(mu, bound, norms)

