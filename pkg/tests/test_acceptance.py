"""Acceptance criteria, one test per criterion (or per regime).

Run directly (``python tests/test_acceptance.py``) or through pytest; the
terminal summary prints one PASS/FAIL line per criterion.  Tolerances are
the ones fixed by the acceptance criteria and are not loosened here; parts
that are not met are marked as strict expected failures with the reason.
"""

import sys
import time

import numpy as np
import pytest

from conftest import record
from rdident import presets
from rdident.data import (FINAL_TIME, TIME_TRACE, estimate_range, sample_measurement,
                          smooth_spatial, smooth_temporal)
from rdident.diagnostics import decay_fit, range_condition_check
from rdident.forward import solve_forward
from rdident.inversion import InverseProblem, Verdict, run
from rdident.model import (Dirichlet, Grid, Neumann, Robin, Source, SystemSpec, Univariate)

DENSE = Grid(200, 300)


def reconstruct(spec, mode, grid=DENSE, max_iters=12, delta=0.0, seed=0, smoothing=True):
    tr = solve_forward(spec, grid)
    m = sample_measurement(tr, mode, delta=delta, seed=seed)
    mu = None if smoothing else 0.0
    if mode == FINAL_TIME:
        d = smooth_spatial(m, spec.bc, grid.x, mu=mu)
    else:
        d = smooth_temporal(m, grid.t, spec_trace_anchor(spec, grid), mu=mu)
    return run(InverseProblem(spec, grid, d, m, max_iters=max_iters, truth=spec.unknowns()))


def spec_trace_anchor(spec, grid):
    return [float(np.ravel(a)[0]) for a in spec.initial(np.array([grid.length]))]


# ---------------------------------------------------------------- criterion 1

def manufactured():
    """Coupled pair with an exact solution and four different end conditions."""
    def u(x, t): return np.exp(-t) * np.sin(2 * x + 0.3) + 1
    def ut(x, t): return -np.exp(-t) * np.sin(2 * x + 0.3)
    def ux(x, t): return 2 * np.exp(-t) * np.cos(2 * x + 0.3)
    def uxx(x, t): return -4 * np.exp(-t) * np.sin(2 * x + 0.3)
    def v(x, t): return (1 + t * t) * (x**3 + 1)
    def vt(x, t): return 2 * t * (x**3 + 1)
    def vx(x, t): return (1 + t * t) * 3 * x**2
    def vxx(x, t): return (1 + t * t) * 6 * x
    beta = 0.7
    f1 = Univariate(lambda s: -s**3, lambda s: -3 * s**2)
    f2 = Univariate(np.sin, np.cos)
    ru = Source(lambda x, t, a, b: ut(x, t) - uxx(x, t) - f1(u(x, t)) - beta * u(x, t) * v(x, t))
    rv = Source(lambda x, t, a, b: vt(x, t) - vxx(x, t) - f2(v(x, t)) - beta * u(x, t) * v(x, t))
    bc = ((Dirichlet(lambda t: u(0, t)), Neumann(lambda t: ux(1, t))),
          (Neumann(lambda t: -vx(0, t)), Robin(2.0, lambda t: vx(1, t) + 2 * v(1, t))))
    spec = SystemSpec(f1=f1, f2=f2, beta_u=beta, beta_v=beta, r_u=ru, r_v=rv,
                      u0=lambda x: u(x, 0), v0=lambda x: v(x, 0), bc=bc)
    return spec, u, v


def test_c1_forward_order():
    spec, u, v = manufactured()
    start = time.perf_counter()
    errs = []
    for n in (41, 81, 161):
        g = Grid(n, n)
        tr = solve_forward(spec, g)
        errs.append(max(np.max(np.abs(tr.u[-1] - u(g.x, g.T))), np.max(np.abs(tr.v[-1] - v(g.x, g.T)))))
    elapsed = time.perf_counter() - start
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = bool(np.all(orders >= 3.5)) and elapsed < 10
    record(1, ok, f"orders {orders.round(2).tolist()} at t=T, {elapsed:.1f}s")
    assert np.all(orders >= 3.5)
    assert elapsed < 10


# ---------------------------------------------------------------- criterion 2

def test_c2_eigen_solution_and_range_violation():
    spec = presets.eigen_mode()
    tr = solve_forward(spec, DENSE)
    exact = presets.eigen_exact(DENSE.x, DENSE.t)
    err = max(np.max(np.abs(tr.u - exact)), np.max(np.abs(tr.v - exact)))
    m = sample_measurement(tr, FINAL_TIME)
    rng = range_condition_check(tr, estimate_range(smooth_spatial(m, spec.bc, DENSE.x)))
    record(2, err <= 1e-4 and not rng.holds,
           f"max error {err:.2e}, range condition {'holds' if rng.holds else 'violated'}")
    assert err <= 1e-4
    assert not rng.holds


# ---------------------------------------------------------------- criterion 3

@pytest.mark.xfail(strict=True, reason=(
    "errors level off near 0.08 (f1) and 0.22 (f2): the trace of v at x=1 stays in "
    "[0.99, 2.55] while v is 0 at the Dirichlet end, so 47% of the states the solution "
    "visits lie outside the range the data determine"))
def test_c3_time_trace_f_pair_beta_minus_one():
    start = time.perf_counter()
    res = reconstruct(presets.competing_species(-1.0), TIME_TRACE, max_iters=10)
    elapsed = time.perf_counter() - start
    h = res.error_history
    ratios = h[2:8] / h[1:7]
    best = h.min(axis=0)
    ok = bool(np.all(best <= 1e-2) and np.all(ratios < 0.9) and elapsed < 60)
    record(3, ok, f"best errors {best.round(4).tolist()}, max ratio (it 1-6) "
                  f"{ratios.max():.3f}, {elapsed:.0f}s")
    assert np.all(best <= 1e-2)
    assert np.all(ratios < 0.9)
    assert elapsed < 60


# ---------------------------------------------------------------- criterion 4

REGIMES = [
    (TIME_TRACE, 1.0, 1.0, Verdict.CONVERGED),
    (TIME_TRACE, 1.5, 1.0, Verdict.DIVERGED),
    (FINAL_TIME, 0.3, 1.0, Verdict.CONVERGED),
    (FINAL_TIME, 1.0, 1.0, Verdict.DIVERGED),
    (FINAL_TIME, 0.5, 0.75, Verdict.CONVERGED),
]


@pytest.mark.parametrize("mode,beta,T,expected", REGIMES)
def test_c4_regime_boundaries(mode, beta, T, expected):
    grid = Grid(200, 300, T=T)
    res = reconstruct(presets.competing_species(beta), mode, grid=grid)
    record(4, res.verdict is expected, f"{mode} beta={beta:g} T={T:g}: {res.verdict.value}")
    assert res.verdict is expected


# ---------------------------------------------------------------- criterion 5

def _phi_case(spec, label, expect_ok=True):
    res = reconstruct(spec, TIME_TRACE, max_iters=5)
    err = res.error_history[-1]
    ok = res.verdict is Verdict.CONVERGED and np.all(err <= 5e-2)
    record(5, ok, f"{label}: {res.verdict.value}, errors {err.round(4).tolist()}")
    assert res.verdict is Verdict.CONVERGED
    assert np.all(err <= 5e-2)


@pytest.mark.parametrize("beta", [-1.0, 0.1, 1.0])
def test_c5_phi_pair(beta):
    _phi_case(presets.interaction(beta), f"beta={beta:g}")


@pytest.mark.xfail(strict=True, reason=(
    "at beta=10 the coupling w=u*v climbs from 0 to 31 within a few samples; only four "
    "of the 25 trace samples fall in [0, 3] where the interaction has its bump, and one "
    "step from the exact pair already has error 0.052 > 5e-2"))
def test_c5_phi_pair_strong_coupling():
    _phi_case(presets.interaction(10.0), "beta=10")


def test_c5_brusselator_coupling():
    _phi_case(presets.brusselator(), "w=u^2 v, beta_u=1, beta_v=-1")


# ---------------------------------------------------------------- criterion 6

SEEDS = range(5)


def test_c6_noise_study():
    spec = presets.competing_species(-1.0)

    def mean_error(delta, smoothing=True):
        return np.mean([reconstruct(spec, TIME_TRACE, max_iters=5, delta=delta, seed=s,
                                    smoothing=smoothing).error_history[-1].max() for s in SEEDS])

    low, high, raw = mean_error(1e-3), mean_error(1e-2), mean_error(1e-2, smoothing=False)
    ok = low < high and high < raw
    record(6, ok, f"mean errors 0.1%: {low:.3f}, 1%: {high:.3f}, 1% unsmoothed: {raw:.3f}")
    assert low < high
    assert high < raw


# ---------------------------------------------------------------- criterion 7

def test_c7_decay_rate():
    tr = solve_forward(presets.eigen_mode(-1.0), DENSE)
    fit = decay_fit(tr)
    rate = (np.pi / 2) ** 2 + 1.0
    rel = abs(fit.c2 - rate) / rate
    record(7, fit.c2 > 0 and rel <= 0.05, f"c2={fit.c2:.5f} vs {rate:.5f} (rel {rel:.1e})")
    assert fit.c2 > 0
    assert rel <= 0.05


if __name__ == "__main__":
    here = __file__.rsplit("/", 1)[0]
    sys.exit(pytest.main([__file__, f"{here}/test_properties.py", "-q", "-p", "no:cacheprovider"]))
