"""Problem description for two coupled reaction-diffusion species on (0, L).

Each species obeys

    u_t = a u_xx - q u + f_i(u_i) + beta_i phi_i(w(u, v)) + r_i(x, t, u, v)

with Dirichlet, Neumann or Robin conditions at both ends.  Either the pair
(f1, f2) or the pair (phi1, phi2) is designated unknown for inversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import GridTooCoarse

SPECIES = ("u", "v")


@dataclass(frozen=True)
class Grid:
    nx: int
    nt: int
    length: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if self.nx < 9:
            raise GridTooCoarse(f"nx={self.nx} < 9")
        if self.nt < 2:
            raise GridTooCoarse(f"nt={self.nt} < 2")
        if not (self.length > 0 and self.T > 0):
            raise ValueError("length and T must be positive")

    @property
    def dx(self) -> float:
        return self.length / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.T / (self.nt - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt)

    def refined(self) -> "Grid":
        """Grid with dx and dt halved; every other node coincides with ours."""
        return Grid(2 * self.nx - 1, 2 * self.nt - 1, self.length, self.T)


def _as_time_function(value):
    if callable(value):
        return value
    c = float(value)
    return lambda t: c


@dataclass(frozen=True)
class BC:
    """One endpoint condition.

    ``kind`` is ``"dirichlet"`` (``value(t)`` imposed), ``"neumann"``
    (outward flux ``du/dnu = value(t)``) or ``"robin"``
    (``du/dnu + gamma u = value(t)``).
    """

    kind: str
    value: Callable[[float], float] = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if not np.isfinite(self.gamma):
            raise ValueError("Robin gamma must be finite")
        object.__setattr__(self, "value", _as_time_function(self.value))

    def __call__(self, t: float) -> float:
        return float(self.value(t))

    @property
    def homogeneous(self) -> bool:
        return self.value(0.0) == 0.0 and self.value(1.0) == 0.0


def Dirichlet(value=0.0) -> BC:
    return BC("dirichlet", value)


def Neumann(flux=0.0) -> BC:
    return BC("neumann", flux)


def Robin(gamma: float, flux=0.0) -> BC:
    return BC("robin", flux, gamma)


class Univariate:
    """A scalar function of one variable with a derivative.

    When no derivative is supplied a central difference is used.
    """

    def __init__(self, func, deriv=None, name: str = ""):
        self._func = func
        self._deriv = deriv
        self.name = name

    def __call__(self, s):
        return np.asarray(self._func(np.asarray(s, dtype=float)), dtype=float)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self._deriv is not None:
            return np.asarray(self._deriv(s), dtype=float) * np.ones_like(s)
        h = 1e-6 * np.maximum(1.0, np.abs(s))
        return (self(s + h) - self(s - h)) / (2 * h)

    def __repr__(self):
        return f"Univariate({self.name or self._func!r})"


def constant(c: float) -> Univariate:
    return Univariate(lambda s: np.full_like(s, c), lambda s: np.zeros_like(s), name=f"{c}")


def linear(c: float) -> Univariate:
    return Univariate(lambda s: c * s, lambda s: np.full_like(s, c), name=f"{c}*s")


IDENTITY = linear(1.0)
ZERO = constant(0.0)


@dataclass(frozen=True)
class Coupling:
    """Interaction argument w(u, v) with its partial derivatives."""

    value: Callable
    du: Callable
    dv: Callable
    name: str = ""

    def __call__(self, u, v):
        return self.value(u, v)


PRODUCT = Coupling(lambda u, v: u * v, lambda u, v: v, lambda u, v: u, "u*v")
U2V = Coupling(lambda u, v: u * u * v, lambda u, v: 2 * u * v, lambda u, v: u * u, "u^2*v")


@dataclass(frozen=True)
class Source:
    """Known term r(x, t, u, v); partials default to zero."""

    value: Callable
    du: Callable | None = None
    dv: Callable | None = None
    name: str = ""

    def __call__(self, x, t, u, v):
        return np.asarray(self.value(x, t, u, v), dtype=float) * np.ones_like(u)

    def partials(self, x, t, u, v):
        zero = np.zeros_like(u)
        ru = zero if self.du is None else np.asarray(self.du(x, t, u, v), dtype=float) * np.ones_like(u)
        rv = zero if self.dv is None else np.asarray(self.dv(x, t, u, v), dtype=float) * np.ones_like(u)
        return ru, rv


NO_SOURCE = Source(lambda x, t, u, v: 0.0, name="0")


def _zero_initial(x):
    return np.zeros_like(x)


@dataclass(frozen=True)
class SystemSpec:
    """Full description of the coupled two-species system."""

    f1: Callable = ZERO
    f2: Callable = ZERO
    phi1: Callable = IDENTITY
    phi2: Callable = IDENTITY
    w: Coupling = PRODUCT
    beta_u: float = 0.0
    beta_v: float = 0.0
    r_u: Source = NO_SOURCE
    r_v: Source = NO_SOURCE
    u0: Callable = _zero_initial
    v0: Callable = _zero_initial
    bc: tuple = ((Dirichlet(), Neumann()), (Dirichlet(), Neumann()))
    a: float = 1.0
    q: float = 0.0
    length: float = 1.0
    unknown: str = "f"
    blowup_cap: float = 1e6
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("diffusion coefficient must be positive")
        if self.unknown not in ("f", "phi"):
            raise ValueError("unknown must be 'f' or 'phi'")

    # the reaction assembly is the only place species terms are combined

    def reaction(self, x, t, u, v):
        wv = self.w(u, v)
        ru = self.f1(u) + self.beta_u * self.phi1(wv) + self.r_u(x, t, u, v)
        rv = self.f2(v) + self.beta_v * self.phi2(wv) + self.r_v(x, t, u, v)
        return ru, rv

    def reaction_jacobian(self, x, t, u, v):
        """Return (dRu/du, dRu/dv, dRv/du, dRv/dv)."""
        wv = self.w(u, v)
        wu, wvv = self.w.du(u, v), self.w.dv(u, v)
        p1 = self.beta_u * self.phi1.derivative(wv)
        p2 = self.beta_v * self.phi2.derivative(wv)
        su_u, su_v = self.r_u.partials(x, t, u, v)
        sv_u, sv_v = self.r_v.partials(x, t, u, v)
        j11 = self.f1.derivative(u) + p1 * wu + su_u
        j12 = p1 * wvv + su_v
        j21 = p2 * wu + sv_u
        j22 = self.f2.derivative(v) + p2 * wvv + sv_v
        return j11, j12, j21, j22

    def unknowns(self):
        if self.unknown == "f":
            return self.f1, self.f2
        return self.phi1, self.phi2

    def with_unknowns(self, first, second) -> "SystemSpec":
        if self.unknown == "f":
            return replace(self, f1=first, f2=second)
        return replace(self, phi1=first, phi2=second)

    def betas(self):
        return self.beta_u, self.beta_v

    def initial(self, x):
        u = np.asarray(self.u0(x), dtype=float) * np.ones_like(x)
        v = np.asarray(self.v0(x), dtype=float) * np.ones_like(x)
        return u, v

    def swapped(self) -> "SystemSpec":
        """Relabel u <-> v throughout."""
        w = self.w
        sw = Coupling(lambda u, v: w(v, u), lambda u, v: w.dv(v, u), lambda u, v: w.du(v, u),
                      name=f"swap({w.name})")

        def swap_source(s):
            du = None if s.dv is None else (lambda x, t, u, v: s.dv(x, t, v, u))
            dv = None if s.du is None else (lambda x, t, u, v: s.du(x, t, v, u))
            return Source(lambda x, t, u, v: s.value(x, t, v, u), du, dv, s.name)

        return replace(
            self, f1=self.f2, f2=self.f1, phi1=self.phi2, phi2=self.phi1, w=sw,
            beta_u=self.beta_v, beta_v=self.beta_u,
            r_u=swap_source(self.r_v), r_v=swap_source(self.r_u),
            u0=self.v0, v0=self.u0, bc=(self.bc[1], self.bc[0]),
        )


@dataclass(frozen=True)
class Trajectory:
    """values[species, time, space] on ``grid``."""

    values: np.ndarray
    grid: Grid

    @property
    def u(self) -> np.ndarray:
        return self.values[0]

    @property
    def v(self) -> np.ndarray:
        return self.values[1]

    @property
    def final(self) -> np.ndarray:
        return self.values[:, -1, :]

    def trace(self, endpoint: str = "right") -> np.ndarray:
        idx = -1 if endpoint == "right" else 0
        return self.values[:, :, idx]
