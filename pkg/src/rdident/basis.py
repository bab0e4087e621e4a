"""Gaussian-basis univariate functions on a compact interval.

A :class:`RangedFn` is a sum of uniformly spaced Gaussians centered in
``J = [lo, hi]`` that is extended by its endpoint values outside ``J``.  Arguments are always
clamped before evaluation, so the derivative vanishes identically off ``J``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficient
from .io import write_csv

DEFAULT_CENTERS = 40
WIDTH_FACTOR = 1.5
RIDGE_FACTOR = 1e-8
N_STORED = 100


@dataclass(frozen=True)
class RangeInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, s) -> np.ndarray:
        s = np.asarray(s)
        return (s >= self.lo) & (s <= self.hi)

    def intersect(self, other: "RangeInterval") -> "RangeInterval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return RangeInterval(lo, hi) if lo < hi else None

    def stored_abscissae(self, n: int = N_STORED) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)


def clamp(s, J: RangeInterval):
    """Projection onto J: ``max(lo, min(hi, s))``."""
    out = np.minimum(np.maximum(s, J.lo), J.hi)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class ClampCounter:
    """Tallies arguments that fell outside J during evaluation."""

    calls: int = 0
    outside: int = 0

    def reset(self):
        self.calls = 0
        self.outside = 0


@dataclass(frozen=True)
class RangedFn:
    centers: np.ndarray
    width: float
    coeffs: np.ndarray
    interval: RangeInterval
    counter: ClampCounter = field(default_factory=ClampCounter, compare=False, repr=False)

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("Gaussian width must be positive")
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 1 or len(c) != len(self.coeffs) or np.any(np.diff(c) <= 0):
            raise ValueError("centers must be strictly increasing and match coeffs")

    @classmethod
    def zero(cls, J: RangeInterval, ncenters: int = DEFAULT_CENTERS) -> "RangedFn":
        centers, width = gaussian_layout(J, ncenters)
        return cls(centers, width, np.zeros(ncenters), J)

    def _clamped(self, s):
        s = np.asarray(s, dtype=float)
        inside = self.interval.contains(s)
        self.counter.calls += s.size
        self.counter.outside += int(s.size - np.count_nonzero(inside))
        return np.clip(s, self.interval.lo, self.interval.hi), inside

    def __call__(self, s):
        z, _ = self._clamped(s)
        return design_matrix(z, self.centers, self.width) @ self.coeffs

    def derivative(self, s):
        z, inside = self._clamped(s)
        return np.where(inside, _design_derivative(z, self.centers, self.width) @ self.coeffs, 0.0)

    def value_and_derivative(self, s):
        z, inside = self._clamped(s)
        G = design_matrix(z, self.centers, self.width)
        d = (G * ((self.centers - z[..., None]) / self.width**2)) @ self.coeffs
        return G @ self.coeffs, np.where(inside, d, 0.0)

    def profile(self, n: int = N_STORED) -> "StoredProfile":
        s = self.interval.stored_abscissae(n)
        return StoredProfile(s, self(s))


def gaussian_layout(J: RangeInterval, ncenters: int):
    """Uniform centers from ``J.lo`` to ``J.hi`` and the width ``1.5 x spacing``."""
    if ncenters < 2:
        raise ValueError("need at least two centers")
    centers = np.linspace(J.lo, J.hi, ncenters)
    return centers, WIDTH_FACTOR * (centers[1] - centers[0])


def design_matrix(s, centers, width):
    s = np.asarray(s, dtype=float)
    return np.exp(-((s[..., None] - centers) ** 2) / (2 * width**2))


def _design_derivative(s, centers, width):
    d = s[..., None] - centers
    return -d / width**2 * np.exp(-(d**2) / (2 * width**2))


def default_ridge(A) -> float:
    return RIDGE_FACTOR * float(np.einsum("ij,ij->", A, A)) / A.shape[1]


def fit_from_pairs(abscissae, values, J: RangeInterval, ncenters: int = DEFAULT_CENTERS,
                   ridge: float | None = None) -> RangedFn:
    """Ridge least-squares fit of ``values`` indexed by ``abscissae``.

    Abscissae need not be sorted or distinct; they are clamped into J first.
    ``ridge=None`` selects the default ``1e-8 * trace(A^T A) / ncenters``.
    """
    s = clamp(np.asarray(abscissae, dtype=float).ravel(), J)
    y = np.asarray(values, dtype=float).ravel()
    if s.shape != y.shape:
        raise ValueError("abscissae and values differ in length")
    if len(np.unique(s)) < 2:
        raise ValueError("need at least two distinct abscissae inside J")
    centers, width = gaussian_layout(J, ncenters)
    A = design_matrix(s, centers, width)
    mu = default_ridge(A) if ridge is None else float(ridge)
    if mu == 0.0:
        coeffs, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank < ncenters:
            raise RankDeficient(f"design matrix rank {rank} < {ncenters} centers; use a ridge")
    else:
        coeffs = np.linalg.solve(A.T @ A + mu * np.eye(ncenters), A.T @ y)
    return RangedFn(centers, width, coeffs, J)


def refresh_range(f: RangedFn, J_new: RangeInterval, nsamples: int = 400) -> RangedFn:
    """Re-center the Gaussians on ``J_new`` keeping the function's values.

    Where ``J_new`` reaches past the old interval the old function's constant
    extension is what gets fitted.
    """
    if J_new == f.interval:
        return f
    s = np.linspace(J_new.lo, J_new.hi, nsamples)
    return fit_from_pairs(s, f(s), J_new, len(f.centers))


@dataclass(frozen=True)
class StoredProfile:
    abscissae: np.ndarray
    values: np.ndarray

    def to_csv(self, path):
        write_csv(path, ["abscissa", "value"], zip(self.abscissae, self.values))

    @classmethod
    def from_csv(cls, path) -> "StoredProfile":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1])
