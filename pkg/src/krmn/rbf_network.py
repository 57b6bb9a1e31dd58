"""Growing radial-basis-function expansion ``f(u) = sum_j a_j k(u, c_j)``."""

from __future__ import annotations

import io

import numpy as np

from .kernels import KernelParams

SNAPSHOT_HEADER = "rbf-network v1"


class RbfNetwork:
    """Ordered centers and coefficients of a kernel expansion.

    Storage grows by doubling; ``centers`` and ``coefficients`` are views of
    the filled part. Mutating methods work in place and return ``self``.
    """

    def __init__(self, kernel: KernelParams | None = None, dim: int | None = None, capacity: int = 64):
        self.kernel = kernel if kernel is not None else KernelParams()
        self.dim = dim
        self._size = 0
        self._capacity = max(int(capacity), 1)
        self._centers = None if dim is None else np.empty((self._capacity, dim))
        self._coefs = np.empty(self._capacity)

    def __len__(self):
        return self._size

    @property
    def size(self) -> int:
        return self._size

    @property
    def centers(self) -> np.ndarray:
        if self._centers is None:
            return np.empty((0, 0))
        return self._centers[: self._size]

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefs[: self._size]

    def _as_input(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim != 1:
            raise ValueError(f"input must be a 1-D vector, got shape {u.shape}")
        if self.dim is not None and u.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: input has {u.shape[0]} entries, centers have {self.dim}")
        return u

    def sq_distances(self, u) -> np.ndarray:
        """Squared Euclidean distance from ``u`` to every stored center."""
        u = self._as_input(u)
        if self._size == 0:
            return np.empty(0)
        diff = self._centers[: self._size] - u
        return np.einsum("ij,ij->i", diff, diff)

    def predict_from_sq(self, sq: np.ndarray) -> float:
        if sq.size == 0:
            return 0.0
        k = np.exp(-self.kernel.bandwidth * sq)
        return float(np.dot(self._coefs[: self._size], k))

    def predict(self, u) -> float:
        return self.predict_from_sq(self.sq_distances(u))

    def predict_many(self, inputs) -> np.ndarray:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if self._size == 0:
            return np.zeros(inputs.shape[0])
        if inputs.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: inputs have {inputs.shape[1]} columns, centers have {self.dim}")
        c = self.centers
        sq = (
            np.einsum("ij,ij->i", inputs, inputs)[:, None]
            - 2.0 * inputs @ c.T
            + np.einsum("ij,ij->i", c, c)[None, :]
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-self.kernel.bandwidth * sq) @ self.coefficients

    def append_center(self, u, a: float) -> "RbfNetwork":
        u = self._as_input(u)
        if self._centers is None:
            self.dim = u.shape[0]
            self._centers = np.empty((self._capacity, self.dim))
        if self._size == self._capacity:
            self._capacity *= 2
            centers = np.empty((self._capacity, self.dim))
            centers[: self._size] = self._centers[: self._size]
            coefs = np.empty(self._capacity)
            coefs[: self._size] = self._coefs[: self._size]
            self._centers, self._coefs = centers, coefs
        self._centers[self._size] = u
        self._coefs[self._size] = a
        self._size += 1
        return self

    def merge_coefficient(self, index: int, delta: float) -> "RbfNetwork":
        if not 0 <= index < self._size:
            raise ValueError(f"center index {index} out of range for network of size {self._size}")
        self._coefs[index] += delta
        return self

    def copy(self) -> "RbfNetwork":
        other = RbfNetwork(self.kernel, self.dim, self._capacity)
        if self._size:
            other._centers[: self._size] = self.centers
            other._coefs[: self._size] = self.coefficients
        other._size = self._size
        return other

    # textual snapshot: header, "bandwidth dim size", centers row-major, coefficients
    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"{SNAPSHOT_HEADER}\n")
        out.write(f"{self.kernel.bandwidth!r} {self.dim or 0} {self._size}\n")
        for row in self.centers:
            out.write(" ".join(repr(float(x)) for x in row) + "\n")
        out.write(" ".join(repr(float(a)) for a in self.coefficients) + "\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RbfNetwork":
        lines = text.splitlines()
        if not lines or lines[0].strip() != SNAPSHOT_HEADER:
            raise ValueError("not an rbf-network snapshot")
        try:
            bw, dim, size = lines[1].split()
            dim, size = int(dim), int(size)
            net = cls(KernelParams(float(bw)), dim or None, max(size, 1))
            rows = [np.array(lines[2 + i].split(), dtype=float) for i in range(size)]
            coefs = np.array(lines[2 + size].split(), dtype=float) if size else np.empty(0)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed rbf-network snapshot: {exc}") from None
        if len(coefs) != size or any(r.shape != (dim,) for r in rows):
            raise ValueError("malformed rbf-network snapshot: size does not match contents")
        for row, a in zip(rows, coefs):
            net.append_center(row, a)
        return net

    def __repr__(self):
        return f"RbfNetwork(size={self._size}, dim={self.dim}, bandwidth={self.kernel.bandwidth})"
