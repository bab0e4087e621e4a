"""Simulated measurements and their smoothing onto dense working grids.

Final-time data ``g(x) = u(x, T)`` are smoothed by a filtered eigenfunction
expansion that respects the boundary conditions and yields ``g'`` and
``(a d^2/dx^2 - q) g`` directly.  Time-trace data ``h(t) = u(x0, t)`` are
smoothed by an H^1 Tikhonov fit over cubic-spline interpolants anchored at
the initial value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .basis import RangeInterval
from .errors import DegenerateRange, IllConditioned
from .forward import eigenbasis
from .io import fmt, write_csv
from .model import Trajectory

FINAL_TIME = "final-time"
TIME_TRACE = "time-trace"
KINDS = (FINAL_TIME, TIME_TRACE)

DEFAULT_S = {FINAL_TIME: 20, TIME_TRACE: 25}
SPATIAL_MU_NOISEFREE = 1e-10
MAX_SPATIAL_COEF = 20


@dataclass(frozen=True)
class Measurement:
    """Sparse observations of both species.

    ``abscissae`` are sample positions (final-time) or sample times
    (time-trace); ``values`` has shape (2, S).
    """

    kind: str
    abscissae: np.ndarray
    values: np.ndarray
    delta: float = 0.0
    seed: int = 0
    endpoint: str = "right"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if len(self.abscissae) < 4:
            raise ValueError("need at least 4 samples")
        if np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("sample points must be strictly increasing")
        if self.values.shape != (2, len(self.abscissae)):
            raise ValueError("values must have shape (2, S)")
        if self.delta < 0:
            raise ValueError("noise level must be non-negative")

    @property
    def S(self) -> int:
        return len(self.abscissae)

    def to_csv(self, path):
        meta = [["S", str(self.S)], ["delta", fmt(self.delta)], ["seed", str(self.seed)],
                ["endpoint", self.endpoint], ["abscissa", "u", "v"]]
        write_csv(path, ["kind", self.kind],
                  meta + [[a, u, v] for a, u, v in zip(self.abscissae, *self.values)])

    @classmethod
    def from_csv(cls, path) -> "Measurement":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        meta = {r[0]: r[1] for r in rows[:5]}
        if rows[5] != ["abscissa", "u", "v"]:
            raise ValueError(f"{path}: expected column header abscissa,u,v")
        body = np.array(rows[6:], dtype=float)
        if len(body) != int(meta["S"]):
            raise ValueError(f"{path}: header says S={meta['S']} but found {len(body)} rows")
        return cls(meta["kind"], body[:, 0], body[:, 1:].T.copy(), float(meta["delta"]),
                   int(meta["seed"]), meta.get("endpoint", "right"))


@dataclass(frozen=True)
class SmoothedData:
    """Dense working data: values, first derivative and (final-time) ``L g``."""

    kind: str
    abscissae: np.ndarray
    values: np.ndarray
    d1: np.ndarray
    lap: np.ndarray | None = None
    endpoint: str = "right"
    mu: tuple = (0.0, 0.0)
    coeffs: np.ndarray | None = None

    def to_csv(self, path):
        cols = ["abscissa", "u", "v", "du", "dv"]
        arrays = [self.abscissae, *self.values, *self.d1]
        if self.lap is not None:
            cols += ["Lu", "Lv"]
            arrays += [*self.lap]
        write_csv(path, cols, zip(*arrays))


def sample_points(kind: str, S: int, extent: float) -> np.ndarray:
    """Equally spaced sample locations.

    Space uses cell midpoints, which avoids both ends; time uses
    ``T/S, 2T/S, ..., T`` because ``t = 0`` is covered by the initial value.
    """
    j = np.arange(1, S + 1)
    if kind == FINAL_TIME:
        return (j - 0.5) * extent / S
    return j * extent / S


def sample_measurement(traj: Trajectory, kind: str, S: int | None = None, delta: float = 0.0,
                       seed: int = 0, endpoint: str = "right") -> Measurement:
    """Sample the trajectory and add uniform noise of relative size ``delta``.

    The noise for each species is i.i.d. uniform on
    ``[-delta * max|signal|, delta * max|signal|]``.
    """
    grid = traj.grid
    S = DEFAULT_S[kind] if S is None else S
    if kind == FINAL_TIME:
        if S > grid.nx:
            raise ValueError("S exceeds the spatial resolution")
        pts = sample_points(kind, S, grid.length)
        signal = CubicSpline(grid.x, traj.final, axis=1)(pts)
    elif kind == TIME_TRACE:
        if S > grid.nt:
            raise ValueError("S exceeds the temporal resolution")
        pts = sample_points(kind, S, grid.T)
        signal = CubicSpline(grid.t, traj.trace(endpoint), axis=1)(pts)
    else:
        raise ValueError(f"unknown measurement kind {kind!r}")
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=signal.shape)
    scale = delta * np.max(np.abs(signal), axis=1, keepdims=True)
    return Measurement(kind, pts, signal + scale * noise, float(delta), int(seed), endpoint)


def noise_std(m: Measurement) -> np.ndarray:
    """Per-species standard deviation of the uniform noise model."""
    return m.delta * np.max(np.abs(m.values), axis=1) / np.sqrt(3.0)


def _discrepancy_mu(residual, target, lo=-14.0, hi=4.0):
    """Largest-smoothing mu whose residual matches ``target`` (log10 search)."""
    f = lambda e: residual(10.0**e) - target
    if f(lo) >= 0:
        return 10.0**lo
    if f(hi) <= 0:
        return 10.0**hi
    return 10.0 ** brentq(f, lo, hi, xtol=1e-6)


def spatial_fit(y, lam, phi, mu):
    """Coefficients minimizing ``|phi c - y|^2 + mu sum lam^2 c^2``."""
    A = phi.T @ phi + mu * np.diag(lam**2)
    return np.linalg.solve(A, phi.T @ y)


def smooth_spatial(m: Measurement, bc, x_dense, ncoef: int | None = None, mu=None,
                   a: float = 1.0, q: float = 0.0, length: float = 1.0) -> SmoothedData:
    """Filtered eigen-expansion of final-time samples.

    ``bc`` holds one (left, right) pair per species.  ``mu=None`` picks the
    filter by the discrepancy principle (or ``1e-10`` for noise-free data);
    a scalar or a pair fixes it.
    """
    if m.kind != FINAL_TIME:
        raise ValueError("smooth_spatial needs final-time data")
    ncoef = min(m.S, MAX_SPATIAL_COEF) if ncoef is None else ncoef
    x_dense = np.asarray(x_dense, dtype=float)
    sigma = noise_std(m)
    vals, d1, lap, mus, coeffs = [], [], [], [], []
    for s in range(2):
        lam, phi = eigenbasis(ncoef, m.abscissae, bc[s], length, a, q)
        y = m.values[s]
        if mu is None:
            if m.delta == 0:
                mu_s = SPATIAL_MU_NOISEFREE
            else:
                res = lambda mu_: float(np.sum((phi @ spatial_fit(y, lam, phi, mu_) - y) ** 2))
                mu_s = _discrepancy_mu(res, m.S * sigma[s] ** 2)
        else:
            mu_s = float(np.broadcast_to(mu, (2,))[s])
        if mu_s == 0 and ncoef > m.S:
            raise IllConditioned(f"{ncoef} modes from {m.S} samples needs a positive filter")
        c = spatial_fit(y, lam, phi, mu_s)
        _, phid, dphid = eigenbasis(ncoef, x_dense, bc[s], length, a, q, derivative=True)
        vals.append(phid @ c)
        d1.append(dphid @ c)
        lap.append(phid @ (-lam * c))
        mus.append(mu_s)
        coeffs.append(c)
    return SmoothedData(FINAL_TIME, x_dense, np.array(vals), np.array(d1), np.array(lap),
                        m.endpoint, tuple(mus), np.array(coeffs))


def _spline_operators(knots, t_dense):
    """Dense values and derivatives of the not-a-knot spline through each unit vector."""
    eye = np.eye(len(knots))
    spl = CubicSpline(knots, eye, axis=0)
    return spl(t_dense), spl(t_dense, 1)


def smooth_temporal(m: Measurement, t_dense, anchor, mu=None) -> SmoothedData:
    """H^1-penalized spline fit of time-trace samples with ``s(0) = anchor``.

    Minimizes ``sum_j (s(t_j) - h_j)^2 + mu * int s'(t)^2 dt`` over cubic
    splines with knots at 0 and the sample times.  ``mu=None`` uses the
    discrepancy principle for noisy data and plain interpolation otherwise.
    """
    if m.kind != TIME_TRACE:
        raise ValueError("smooth_temporal needs time-trace data")
    t_dense = np.asarray(t_dense, dtype=float)
    anchor = np.broadcast_to(np.asarray(anchor, dtype=float), (2,))
    knots = np.concatenate([[0.0], m.abscissae])
    B, dB = _spline_operators(knots, t_dense)
    # trapezoid weights for int s'^2
    tw = np.zeros_like(t_dense)
    dt = np.diff(t_dense)
    tw[:-1] += dt / 2
    tw[1:] += dt / 2
    K = dB.T @ (tw[:, None] * dB)
    Kff, Kf0 = K[1:, 1:], K[1:, 0]
    sigma = noise_std(m)
    eye = np.eye(m.S)

    def solve(mu_, y, z0):
        return np.linalg.solve(eye + mu_ * Kff, y - mu_ * Kf0 * z0)

    vals, d1, mus = [], [], []
    for s in range(2):
        y = m.values[s]
        if mu is None:
            if m.delta == 0:
                mu_s = 0.0
            else:
                res = lambda mu_: float(np.sum((solve(mu_, y, anchor[s]) - y) ** 2))
                mu_s = _discrepancy_mu(res, m.S * sigma[s] ** 2)
        else:
            mu_s = float(np.broadcast_to(mu, (2,))[s])
        z = np.concatenate([[anchor[s]], solve(mu_s, y, anchor[s])])
        vals.append(B @ z)
        d1.append(dB @ z)
        mus.append(mu_s)
    return SmoothedData(TIME_TRACE, t_dense, np.array(vals), np.array(d1), None,
                        m.endpoint, tuple(mus))


def estimate_range(d: SmoothedData, tol: float = 1e-12):
    """[min, max] of each species' dense values."""
    out = []
    for s, vals in enumerate(d.values):
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if hi - lo < tol:
            raise DegenerateRange(f"species {s}: data range {hi - lo:.3g} is degenerate")
        out.append(RangeInterval(lo, hi))
    return out


def composite_range(d: SmoothedData, w, tol: float = 1e-12) -> RangeInterval:
    vals = w(d.values[0], d.values[1])
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi - lo < tol:
        raise DegenerateRange(f"composite range {hi - lo:.3g} is degenerate")
    return RangeInterval(lo, hi)


def invertibility_margin(d: SmoothedData, w=None) -> np.ndarray:
    """``min |sum_j dw_i/dxi_j (data) * data_j'|`` per species.

    ``w=None`` means each unknown is evaluated at its own species
    (``w_i(xi) = xi_i``); otherwise ``w`` is the shared coupling.
    """
    if w is None:
        return np.min(np.abs(d.d1), axis=1)
    u, v = d.values
    m = np.min(np.abs(w.du(u, v) * d.d1[0] + w.dv(u, v) * d.d1[1]))
    return np.array([m, m])
