"""Online vector quantization of the input space.

A new input either merges into its nearest stored center (distance at most
``epsilon_u``) or becomes a new center. The codebook is the ordered center
list of an :class:`~krmn.rbf_network.RbfNetwork`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rbf_network import RbfNetwork


class EmptyCodebookError(LookupError):
    """Raised by :func:`nearest` when there are no centers to search."""


class Merge(NamedTuple):
    index: int


class Admit(NamedTuple):
    pass


@dataclass
class Codebook:
    network: RbfNetwork
    epsilon_u: float = 0.0

    def __post_init__(self):
        if not self.epsilon_u >= 0:
            raise ValueError(f"epsilon_u must be nonnegative, got {self.epsilon_u!r}")

    @property
    def centers(self) -> np.ndarray:
        return self.network.centers

    def __len__(self):
        return len(self.network)


def nearest_from_sq(sq: np.ndarray) -> tuple[int, float]:
    # np.argmin returns the first minimum, i.e. the lowest index on ties
    j = int(np.argmin(sq))
    return j, float(np.sqrt(sq[j]))


def nearest(book: Codebook, u) -> tuple[int, float]:
    """Index and Euclidean distance of the closest center to ``u``."""
    if len(book) == 0:
        raise EmptyCodebookError("codebook is empty")
    return nearest_from_sq(book.network.sq_distances(u))


def decide_from_sq(sq: np.ndarray, epsilon_u: float) -> Merge | Admit:
    if sq.size == 0:
        return Admit()
    j, dist = nearest_from_sq(sq)
    return Merge(j) if dist <= epsilon_u else Admit()


def decide(book: Codebook, u) -> Merge | Admit:
    return decide_from_sq(book.network.sq_distances(u), book.epsilon_u)
