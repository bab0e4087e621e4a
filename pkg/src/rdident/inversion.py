"""Fixed-point reconstruction of an unknown pair of univariate functions.

Each sweep solves the forward problem with the current iterates, evaluates
the PDE residual identity on the observation manifold (final time ``t = T``
or the boundary point ``x0``), and projects the result back to functions of
one variable by a Gaussian least-squares fit on the data range.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import (DEFAULT_CENTERS, N_STORED, RangedFn, RangeInterval, StoredProfile,
                    fit_from_pairs)
from .data import FINAL_TIME, TIME_TRACE, Measurement, SmoothedData, composite_range, estimate_range
from .errors import ForwardFailure, ZeroMultiplier
from .io import write_csv, write_json
from .forward import laplacian_at_boundary, solve_forward, time_derivative_at_T
from .model import Grid, SystemSpec

log = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    CONVERGED = "converged"
    STAGNATED = "stagnated"
    DIVERGED = "diverged"

    @property
    def failed(self) -> bool:
        return self is Verdict.DIVERGED


@dataclass
class InverseProblem:
    spec: SystemSpec
    grid: Grid
    data: SmoothedData
    measurement: Measurement | None = None
    max_iters: int = 12
    tol: float = 1e-4
    truth: tuple | None = None
    ncenters: int = DEFAULT_CENTERS
    ridge: float | None = None
    extrapolate: bool = True
    intervals: list = field(default=None)

    def __post_init__(self):
        if self.data.kind not in (FINAL_TIME, TIME_TRACE):
            raise ValueError(f"unknown data kind {self.data.kind!r}")
        if self.spec.unknown == "phi" and 0.0 in self.spec.betas():
            raise ZeroMultiplier("interaction reconstruction needs nonzero beta_u and beta_v")
        if self.intervals is None:
            self.intervals = data_intervals(self.spec, self.data)

    @property
    def mode(self) -> str:
        return self.data.kind

    def zero_guess(self):
        return tuple(RangedFn.zero(J, self.ncenters) for J in self.intervals)


def data_intervals(spec: SystemSpec, data: SmoothedData):
    """Interval J for each unknown: data extrema, or extrema of w(data)."""
    if spec.unknown == "f":
        return estimate_range(data)
    J = composite_range(data, spec.w)
    return [J, J]


def _observation(prob: InverseProblem, spec: SystemSpec):
    """Forward-solve and return (x or t, model part of the residual identity).

    For final-time data this is ``D_t u(., T)`` from the solver; for time-trace
    data it is ``D_t h - (L u)(x0, .)``; either way the data-side terms are
    subtracted by the caller.
    """
    traj = solve_forward(spec, prob.grid, extrapolate=prob.extrapolate)
    d = prob.data
    if d.kind == FINAL_TIME:
        return prob.grid.x, prob.grid.T, time_derivative_at_T(traj) - d.lap
    lap = laplacian_at_boundary(traj, d.endpoint, spec.a, spec.q)
    return prob.grid.t, None, d.d1 - lap


def _sources(spec: SystemSpec, prob: InverseProblem, coord, tfix, vals):
    u, v = vals
    if prob.data.kind == FINAL_TIME:
        x, t = coord, tfix
    else:
        x = 0.0 if prob.data.endpoint == "left" else prob.grid.length
        x, t = np.full_like(coord, x), coord
    return spec.r_u(x, t, u, v), spec.r_v(x, t, u, v)


def update(pair, prob: InverseProblem):
    """One application of the fixed-point map to ``pair``."""
    spec = prob.spec.with_unknowns(*pair)
    coord, tfix, model = _observation(prob, spec)
    vals = prob.data.values
    u, v = vals
    ru, rv = _sources(spec, prob, coord, tfix, vals)
    if spec.unknown == "f":
        wv = spec.w(u, v)
        rhs = (model[0] - spec.beta_u * spec.phi1(wv) - ru,
               model[1] - spec.beta_v * spec.phi2(wv) - rv)
        absc = (u, v)
    else:
        bu, bv = spec.betas()
        if bu == 0 or bv == 0:
            raise ZeroMultiplier("beta_u and beta_v must be nonzero")
        rhs = ((model[0] - spec.f1(u) - ru) / bu, (model[1] - spec.f2(v) - rv) / bv)
        wv = spec.w(u, v)
        absc = (wv, wv)
    return tuple(fit_from_pairs(a, r, J, prob.ncenters, prob.ridge)
                 for a, r, J in zip(absc, rhs, prob.intervals))


def step_f_finaltime(f1, f2, prob: InverseProblem):
    if prob.spec.unknown != "f" or prob.data.kind != FINAL_TIME:
        raise ValueError("problem is not an f-pair final-time reconstruction")
    return update((f1, f2), prob)


def step_f_timetrace(f1, f2, prob: InverseProblem):
    if prob.spec.unknown != "f" or prob.data.kind != TIME_TRACE:
        raise ValueError("problem is not an f-pair time-trace reconstruction")
    return update((f1, f2), prob)


def step_phi(phi1, phi2, prob: InverseProblem):
    if prob.spec.unknown != "phi":
        raise ValueError("problem is not an interaction reconstruction")
    return update((phi1, phi2), prob)


def error_norm(f, truth, J: RangeInterval, n: int = N_STORED) -> float:
    """Relative discrete L2 distance on the stored abscissae of J."""
    s = J.stored_abscissae(n)
    ref = np.asarray(truth(s), dtype=float)
    diff = np.linalg.norm(np.asarray(f(s)) - ref)
    norm = np.linalg.norm(ref)
    return float(diff / norm) if norm > 0 else float(diff)


@dataclass
class ReconstructionResult:
    iterates: list
    error_history: np.ndarray
    step_history: np.ndarray
    verdict: Verdict
    contraction_q: float | None
    message: str = ""
    params: dict = field(default_factory=dict)

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    def write_error_history(self, path):
        write_csv(path, ["iter", "err_f1", "err_f2"],
                  ([str(k), row[0], row[1]] for k, row in enumerate(self.error_history)))

    def write_profiles(self, path):
        rows = ([str(k), str(s + 1), a, v]
                for k, pair in enumerate(self.iterates)
                for s, prof in enumerate(pair)
                for a, v in zip(prof.abscissae, prof.values))
        write_csv(path, ["iter", "species", "abscissa", "value"], rows)

    def summary(self) -> dict:
        last = self.error_history[-1].tolist() if len(self.error_history) else None
        q = None if self.contraction_q is None else float(self.contraction_q)
        return {"verdict": self.verdict.value, "contraction_q": q, "iterations": self.iterations,
                "final_error": last, "message": self.message, "params": self.params}

    def write_summary(self, path):
        write_json(path, self.summary())


def contraction_estimate(history) -> float | None:
    """Geometric-mean ratio over the longest stretch of decreasing values.

    A transient rise in the first sweeps (common when the zero guess is far
    off) does not hide the decay that follows.  With no decrease at all the
    first ratio is returned, which is then >= 1.
    """
    h = np.asarray(history, dtype=float)
    if len(h) < 2:
        return None
    best, start = (0, 0), 0
    for k in range(1, len(h)):
        if not h[k] < h[k - 1]:
            start = k
        elif k - start > best[1] - best[0]:
            best = (start, k)
    a, b = best
    if b == a:
        return float(h[1] / h[0]) if h[0] > 0 else float("inf")
    if h[a] <= 0 or h[b] <= 0:
        return 0.0
    return float((h[b] / h[a]) ** (1.0 / (b - a)))


def growth_estimate(history) -> float:
    """Geometric-mean ratio over the trailing stretch of increases (>= 1)."""
    h = np.asarray(history, dtype=float)
    start = len(h) - 1
    while start > 0 and h[start] > h[start - 1]:
        start -= 1
    n = len(h) - 1 - start
    if n == 0:
        return float("inf")
    return float((h[-1] / h[start]) ** (1.0 / n)) if h[start] > 0 else float("inf")


def run(prob: InverseProblem, initial=None) -> ReconstructionResult:
    """Iterate the fixed-point map from ``initial`` (default zero functions).

    Stops after ``max_iters`` sweeps, when the monitored error changes by less
    than ``tol`` relative to its first value, after two consecutive increases,
    or on a forward failure.  The monitored quantity is the error against
    ``truth`` when given, else the size of the update.
    """
    pair = prob.zero_guess() if initial is None else tuple(initial)
    profiles = [tuple(f.profile() for f in pair)]
    errors, steps = [], []
    if prob.truth is not None:
        errors.append([error_norm(f, t, J) for f, t, J in zip(pair, prob.truth, prob.intervals)])
    verdict, message = None, ""
    for k in range(prob.max_iters):
        try:
            new = update(pair, prob)
        except ForwardFailure as exc:
            verdict, message = Verdict.DIVERGED, f"forward failure at iteration {k + 1}: {exc}"
            log.info(message)
            break
        steps.append([error_norm(a, b, J) for a, b, J in zip(new, pair, prob.intervals)])
        pair = new
        profiles.append(tuple(f.profile() for f in pair))
        if prob.truth is not None:
            errors.append([error_norm(f, t, J) for f, t, J in zip(pair, prob.truth, prob.intervals)])
        monitor = np.max(errors, axis=1) if prob.truth is not None else np.max(steps, axis=1)
        log.debug("iteration %d monitor %.3e", k + 1, monitor[-1])
        if len(monitor) >= 3 and monitor[-1] > monitor[-2] > monitor[-3]:
            verdict, message = Verdict.DIVERGED, f"monitor grew twice in a row at iteration {k + 1}"
            break
        if len(monitor) >= 2 and abs(monitor[-1] - monitor[-2]) < prob.tol * max(monitor[0], 1e-300):
            message = f"stagnation stop at iteration {k + 1}"
            break
    errors = np.array(errors) if errors else np.zeros((0, 2))
    steps = np.array(steps) if steps else np.zeros((0, 2))
    monitor = np.max(errors, axis=1) if len(errors) else np.max(steps, axis=1) if len(steps) else []
    q = contraction_estimate(monitor)
    if verdict is not None:
        q = growth_estimate(monitor)
    else:
        verdict = Verdict.CONVERGED if q is not None and q < 1 else Verdict.STAGNATED
    return ReconstructionResult(profiles, errors, steps, verdict, q, message)
