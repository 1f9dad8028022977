"""Coefficient-space representation of functions on [0, 1].

Every function is stored by its coefficients in one fixed orthonormal
basis, phi_k(t) = sqrt(2) * cos(k * pi * t) for k = 1, 2, ...  Inner
products and norms are Parseval sums over coefficients; evaluation on a
grid is derived output.  Representations of different length are
compatible: the shorter one is treated as zero-padded.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FunctionRep",
    "CosineBasis",
    "inner",
    "norm_sq",
    "evaluate_on_grid",
    "uniform_grid",
]


def _as_coeffs(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("coefficient array must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return arr


@dataclass(frozen=True)
class FunctionRep:
    """A function on [0, 1], stored as cosine-basis coefficients.

    An empty coefficient array represents the zero function.  Instances
    are immutable; the coefficient array is copied and locked at
    construction.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        arr = _as_coeffs(self.coeffs).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    @property
    def basis_size(self) -> int:
        return self.coeffs.shape[0]

    def padded(self, size: int) -> np.ndarray:
        """Coefficients zero-padded to the requested length."""
        if size < self.basis_size:
            raise ValueError("cannot pad to a smaller size")
        out = np.zeros(size)
        out[: self.basis_size] = self.coeffs
        return out

    def __add__(self, other: "FunctionRep") -> "FunctionRep":
        size = max(self.basis_size, other.basis_size)
        return FunctionRep(self.padded(size) + other.padded(size))

    def __sub__(self, other: "FunctionRep") -> "FunctionRep":
        size = max(self.basis_size, other.basis_size)
        return FunctionRep(self.padded(size) - other.padded(size))

    def __neg__(self) -> "FunctionRep":
        return FunctionRep(-self.coeffs)


@dataclass(frozen=True)
class CosineBasis:
    """The first `size` elements of the orthonormal cosine system."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("basis size must be at least 1")

    def matrix(self, points) -> np.ndarray:
        """Matrix of basis values, shape (len(points), size)."""
        t = np.atleast_1d(np.asarray(points, dtype=float))
        k = np.arange(1, self.size + 1)
        return np.sqrt(2.0) * np.cos(np.outer(t, k) * np.pi)


def inner(f: FunctionRep, g: FunctionRep) -> float:
    """L2 inner product <f, g>, a Parseval sum over shared coefficients."""
    k = min(f.basis_size, g.basis_size)
    return float(np.dot(f.coeffs[:k], g.coeffs[:k]))


def norm_sq(f: FunctionRep) -> float:
    """Squared L2 norm of f."""
    return float(np.dot(f.coeffs, f.coeffs))


def uniform_grid(num_points: int) -> np.ndarray:
    """`num_points` equally spaced points spanning [0, 1]."""
    if num_points < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(0.0, 1.0, num_points)


def evaluate_on_grid(f: FunctionRep, num_points: int) -> np.ndarray:
    """Values of f on the uniform grid with `num_points` points."""
    grid = uniform_grid(num_points)
    if f.basis_size == 0:
        return np.zeros(num_points)
    return CosineBasis(f.basis_size).matrix(grid) @ f.coeffs
