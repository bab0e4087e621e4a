"""Numerical checks of the hypotheses behind the reconstruction scheme.

These do not prove anything about a run; they report whether a concrete
instance looks dissipative, whether its time derivative decays, and whether
the data range covers the states the solution actually visits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import RangeInterval
from .io import write_csv
from .errors import GridTooCoarse, NotDissipative
from .model import SystemSpec, Trajectory


@dataclass(frozen=True)
class DecayFit:
    C2: float
    c2: float
    residual: float

    def bound(self, t):
        return self.C2 * np.exp(-self.c2 * np.asarray(t))


def decay_fit(traj: Trajectory, start_fraction: float = 0.1) -> DecayFit:
    """Fit ``max_x |D_t u| ~ C2 exp(-c2 t)`` over ``t >= start_fraction * T``.

    Both species enter through the Euclidean norm of ``(D_t u, D_t v)``.
    A negative ``c2`` means the time derivative grows.
    """
    grid = traj.grid
    if grid.nt < 20:
        raise GridTooCoarse("decay_fit needs nt >= 20")
    dudt = np.gradient(traj.values, grid.t, axis=1, edge_order=2)
    m = np.max(np.sqrt(np.sum(dudt**2, axis=0)), axis=1)
    keep = grid.t >= start_fraction * grid.T
    t, logm = grid.t[keep], np.log(np.maximum(m[keep], np.finfo(float).tiny))
    A = np.column_stack([np.ones_like(t), -t])
    (logC, c2), *_ = np.linalg.lstsq(A, logm, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([logC, c2]) - logm) ** 2)))
    return DecayFit(float(np.exp(logC)), float(c2), resid)


@dataclass
class DissipativityReport:
    """Outcome of the 2x2 nonnegativity test on a grid of states.

    ``margins[i, j]`` is ``min(A, D, 4AD - (B+C)^2)`` at ``(u_i, v_j)``.
    """

    u: np.ndarray
    v: np.ndarray
    margins: np.ndarray
    worst: float
    worst_point: tuple
    failed_test: str | None

    @property
    def passed(self) -> bool:
        return self.worst >= 0.0

    def to_text(self) -> str:
        lines = [f"dissipativity: {'pass' if self.passed else 'FAIL'}",
                 f"worst margin: {self.worst:.6g} at u={self.worst_point[0]:.6g}, v={self.worst_point[1]:.6g}"]
        if self.failed_test:
            lines.append(f"violated: {self.failed_test}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path):
        rows = ([uu, vv, self.margins[i, j]] for i, uu in enumerate(self.u) for j, vv in enumerate(self.v))
        write_csv(path, ["u", "v", "margin"], rows)


def dissipativity_check(spec: SystemSpec, intervals, c_Q: float = 0.0, nsamples: int = 41,
                        x: float | None = None, t: float = 0.0) -> DissipativityReport:
    """Test ``Q - M - c_Q I >= 0`` with M the reaction Jacobian.

    The 2x2 matrix ``[[A, B], [C, D]]`` is nonnegative in the sense used
    here when ``A >= 0``, ``D >= 0`` and ``4AD >= (B + C)^2``, which only
    looks at its symmetric part.  ``x`` and ``t`` fix where explicitly
    space- or time-dependent terms are evaluated (default: mid-domain, t=0).
    """
    I1, I2 = intervals
    u = np.linspace(I1.lo, I1.hi, nsamples)
    v = np.linspace(I2.lo, I2.hi, nsamples)
    U, V = np.meshgrid(u, v, indexing="ij")
    xs = 0.5 * spec.length if x is None else x
    q = spec.q(xs) if callable(spec.q) else spec.q
    X, Tm = np.full_like(U, xs), np.full_like(U, t)
    j11, j12, j21, j22 = spec.reaction_jacobian(X, Tm, U, V)
    A = q - c_Q - j11
    D = q - c_Q - j22
    B, C = -j12, -j21
    tests = np.stack([A, D, 4 * A * D - (B + C) ** 2])
    margins = tests.min(axis=0)
    k = np.unravel_index(np.argmin(margins), margins.shape)
    worst = float(margins[k])
    failed = None
    if worst < 0:
        # name the first test, in order, that fails at the worst point
        first = int(np.argmax(tests[(slice(None),) + k] < 0))
        failed = ("A >= 0", "D >= 0", "4AD >= (B+C)^2")[first]
    return DissipativityReport(u, v, margins, worst, (float(u[k[0]]), float(v[k[1]])), failed)


def _one_sided_bound(d_own, d_other_at_zero, s):
    # largest root of beta^2 s^2 - 4 a s beta - 4 a b = 0, a = -d_own, b = -d_other(0)
    root = np.sqrt(d_own**2 + d_other_at_zero * d_own)
    return np.min(2.0 / s * (-d_own + root))


def competing_beta_bound(f1, f2, intervals, ngrid: int = 2000) -> float:
    """Largest interaction strength the competing-species test admits.

    For ``u_t = u_xx + f1(u) - beta u v`` and the analogous v-equation, the
    choice v = 0 (and u = 0) in the 2x2 test gives two upper bounds on
    beta as minima over (0, u_max] and (0, v_max]; the smaller is returned.
    Each bound is the positive root of the quadratic in beta that the
    determinant condition becomes on that edge.
    Requires f1, f2 nonincreasing on their intervals.

    :class:`SystemSpec` writes the interaction as ``+beta_u * u * v``, so the
    returned bound ``b`` corresponds to ``beta_u = beta_v >= -b`` there.
    """
    I1, I2 = intervals
    s1 = I1.hi * np.arange(1, ngrid + 1) / ngrid
    s2 = I2.hi * np.arange(1, ngrid + 1) / ngrid
    d1 = np.asarray(f1.derivative(s1), dtype=float)
    d2 = np.asarray(f2.derivative(s2), dtype=float)
    d1_0 = float(f1.derivative(np.array([0.0]))[0])
    d2_0 = float(f2.derivative(np.array([0.0]))[0])
    if np.any(d1 > 0) or np.any(d2 > 0) or d1_0 > 0 or d2_0 > 0:
        raise NotDissipative("competing-species bound needs nonincreasing f1 and f2")
    return float(min(_one_sided_bound(d1, d2_0, s1), _one_sided_bound(d2, d1_0, s2)))


@dataclass(frozen=True)
class RangeReport:
    fraction_outside: tuple
    max_excursion: tuple

    @property
    def holds(self) -> bool:
        return all(e == 0.0 for e in self.max_excursion)

    def to_text(self) -> str:
        status = "holds" if self.holds else "violated"
        parts = [f"range condition {status}"]
        for name, frac, exc in zip("uv", self.fraction_outside, self.max_excursion):
            parts.append(f"  {name}: {100 * frac:.3g}% of nodes outside, max excursion {exc:.6g}")
        return "\n".join(parts) + "\n"


def range_condition_check(traj: Trajectory, intervals) -> RangeReport:
    """How far the states before the final time stray outside each J."""
    fracs, excursions = [], []
    for values, J in zip(traj.values, intervals):
        states = values[:-1]
        below = np.maximum(J.lo - states, 0.0)
        above = np.maximum(states - J.hi, 0.0)
        gap = np.maximum(below, above)
        fracs.append(float(np.mean(gap > 0)))
        excursions.append(float(gap.max()))
    return RangeReport(tuple(fracs), tuple(excursions))


def data_intervals_from(values) -> list:
    """Convenience: [min, max] of each species' observed values."""
    return [RangeInterval(float(np.min(v)), float(np.max(v))) for v in values]
