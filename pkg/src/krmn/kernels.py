"""Gaussian kernel and explicit finite-dimensional feature maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LINEAR = "linear-identity"
POLY2 = "polynomial-degree-2"
MAP_KINDS = (LINEAR, POLY2)


@dataclass(frozen=True)
class KernelParams:
    """Gaussian kernel ``exp(-h * ||u - v||^2)`` with bandwidth ``h``."""

    bandwidth: float = 0.1

    def __post_init__(self):
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth!r}")


def _check_pair(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u, v


def eval_gaussian(u, v, params: KernelParams) -> float:
    u, v = _check_pair(u, v)
    diff = u - v
    return float(np.exp(-params.bandwidth * np.dot(diff.ravel(), diff.ravel())))


def gaussian_gram(points, v, params: KernelParams) -> np.ndarray:
    """Kernel values between each row of ``points`` and the vector ``v``."""
    diff = np.asarray(points, dtype=float) - np.asarray(v, dtype=float)
    return np.exp(-params.bandwidth * np.einsum("ij,ij->i", diff, diff))


@dataclass(frozen=True)
class ExplicitFeatureMap:
    """A kernel whose feature vector can be written out.

    ``linear-identity`` maps ``u`` to itself (kernel ``u.v``).
    ``polynomial-degree-2`` maps to the monomials ``u_i u_j`` (i <= j) with the
    cross terms scaled by sqrt(2), so the induced kernel is ``(u.v)^2``.

    With ``normalize=True`` every feature vector is scaled to unit length and
    the induced kernel becomes ``k(u, v) / sqrt(k(u, u) k(v, v))``; this gives
    ``k(u, u) = 1`` like the Gaussian kernel.
    """

    kind: str
    input_dim: int
    normalize: bool = False
    feature_dim: int = field(init=False)

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown feature map kind {self.kind!r}; expected one of {MAP_KINDS}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be a positive integer")
        if self.kind == LINEAR:
            dim = self.input_dim
        else:
            dim = self.input_dim * (self.input_dim + 1) // 2
        object.__setattr__(self, "feature_dim", dim)

    def raw_kernel(self, u, v) -> float:
        u, v = _check_pair(u, v)
        dot = float(np.dot(u, v))
        return dot if self.kind == LINEAR else dot * dot

    def kernel(self, u, v) -> float:
        """The kernel this map induces, computed without the map."""
        k = self.raw_kernel(u, v)
        if not self.normalize:
            return k
        norm = math.sqrt(self.raw_kernel(u, u) * self.raw_kernel(v, v))
        if norm == 0.0:
            raise ValueError("cannot normalize the feature vector of a zero input")
        return k / norm


def map_features(u, fmap: ExplicitFeatureMap) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (fmap.input_dim,):
        raise ValueError(f"dimension mismatch: input has shape {u.shape}, map expects ({fmap.input_dim},)")
    if fmap.kind == LINEAR:
        phi = u.copy()
    else:
        iu, ju = np.triu_indices(fmap.input_dim)
        scale = np.where(iu == ju, 1.0, math.sqrt(2.0))
        phi = scale * u[iu] * u[ju]
    if fmap.normalize:
        norm = np.linalg.norm(phi)
        if norm == 0.0:
            raise ValueError("cannot normalize the feature vector of a zero input")
        phi = phi / norm
    return phi
