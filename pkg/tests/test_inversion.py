import numpy as np
import pytest

from rdident import presets
from rdident.basis import RangedFn, RangeInterval, fit_from_pairs
from rdident.data import (FINAL_TIME, TIME_TRACE, estimate_range, sample_measurement, smooth_spatial,
                          smooth_temporal)
from rdident.errors import ZeroMultiplier
from rdident.forward import solve_forward
from rdident.inversion import (InverseProblem, Verdict, contraction_estimate, error_norm,
                               growth_estimate, run, step_f_finaltime, step_f_timetrace,
                               step_phi)
from rdident.model import Grid, Univariate


def f1_target(u):
    return 2 * u * (1 - u) * (u - 0.9)


def problem(spec, grid, mode, **kw):
    tr = solve_forward(spec, grid)
    m = sample_measurement(tr, mode)
    if mode == FINAL_TIME:
        d = smooth_spatial(m, spec.bc, grid.x)
    else:
        d = smooth_temporal(m, grid.t, tr.values[:, 0, -1])
    return InverseProblem(spec, grid, d, m, truth=spec.unknowns(), **kw)


class TestErrorNorm:
    J = RangeInterval(0.0, 1.2)

    def test_identical(self):
        f = Univariate(f1_target)
        assert error_norm(f, f1_target, self.J) == 0.0

    def test_double(self):
        f = Univariate(lambda u: 2 * f1_target(u))
        assert error_norm(f, f1_target, self.J) == pytest.approx(1.0)

    def test_zero_function(self):
        assert error_norm(RangedFn.zero(self.J), f1_target, self.J) == pytest.approx(1.0)

    def test_zero_truth_uses_absolute(self):
        f = Univariate(lambda u: np.ones_like(u))
        assert error_norm(f, lambda s: 0 * s, self.J) == pytest.approx(10.0)


class TestEstimates:
    def test_contraction_geometric(self):
        assert contraction_estimate([1.0, 0.5, 0.25, 0.125]) == pytest.approx(0.5)

    def test_contraction_after_transient(self):
        assert contraction_estimate([1.0, 2.0, 1.0, 0.5]) == pytest.approx(0.5)

    def test_contraction_no_decrease(self):
        assert contraction_estimate([1.0, 2.0, 4.0]) >= 1.0

    def test_growth(self):
        assert growth_estimate([1.0, 0.5, 1.0, 2.0]) == pytest.approx(2.0)


@pytest.fixture(scope="module")
def in_span_problem():
    """beta=0 final-time problem whose true reactions are Gaussian sums on J.

    The reactions are refitted on the data range they produce until that
    range settles, so the truth lies in the span used by the update.  Both
    vanish at 0, matching the Dirichlet sine basis at x=0; 40 samples keep
    the truncation error of the smoothed Laplacian below the tolerance.
    """
    base = presets.competing_species(0.0)
    targets = (f1_target, lambda s: presets.bump(s) - presets.bump(0.0))
    g = Grid(200, 300)
    J = [RangeInterval(-0.2, 3.0)] * 2
    for _ in range(3):
        fs = [fit_from_pairs(np.linspace(j.lo, j.hi, 400), t(np.linspace(j.lo, j.hi, 400)), j)
              for t, j in zip(targets, J)]
        spec = base.with_unknowns(*fs)
        tr = solve_forward(spec, g)
        m = sample_measurement(tr, FINAL_TIME, S=40)
        d = smooth_spatial(m, spec.bc, g.x, ncoef=40)
        J = estimate_range(d)
    return InverseProblem(spec, g, d, m, truth=spec.unknowns(), max_iters=3)


def test_fixed_point_at_truth(in_span_problem):
    prob = in_span_problem
    new = step_f_finaltime(*prob.truth, prob)
    for f, t, J in zip(new, prob.truth, prob.intervals):
        assert error_norm(f, t, J) <= 1e-3


def test_truth_as_initial_guess_stays_put(in_span_problem):
    prob = in_span_problem
    res = run(prob, initial=prob.truth)
    assert np.all(res.error_history <= 1e-3)
    assert len(res.error_history) == res.iterations + 1


def test_first_step_reduces_error():
    prob = problem(presets.competing_species(-1.0), Grid(200, 300), FINAL_TIME, max_iters=1)
    res = run(prob)
    assert np.all(res.error_history[1] < res.error_history[0])


def test_diverging_regime_detected():
    prob = problem(presets.competing_species(1.0), Grid(100, 150), FINAL_TIME)
    res = run(prob)
    assert res.verdict is Verdict.DIVERGED
    assert res.verdict.failed
    assert res.contraction_q >= 1


def test_arguments_outside_range_are_clamped():
    prob = problem(presets.competing_species(-1.0), Grid(60, 80), TIME_TRACE, max_iters=1)
    f1, f2 = prob.zero_guess()
    step_f_timetrace(f1, f2, prob)
    assert f1.counter.calls > 0
    # the solution visits states the final data never shows
    assert f1.counter.outside + f2.counter.outside > 0
    J = f1.interval
    probe = np.array([J.lo - 1.0, J.hi + 1.0])
    assert np.array_equal(f1.derivative(probe), np.zeros(2))


def test_phi_needs_nonzero_multipliers():
    spec = presets.interaction(1.0)
    prob = problem(spec, Grid(60, 80), TIME_TRACE)
    zero = spec.__class__(**{**spec.__dict__, "beta_v": 0.0})
    with pytest.raises(ZeroMultiplier):
        InverseProblem(zero, prob.grid, prob.data)


def test_steps_check_their_mode():
    prob = problem(presets.competing_species(-1.0), Grid(60, 80), TIME_TRACE)
    pair = prob.zero_guess()
    with pytest.raises(ValueError):
        step_f_finaltime(*pair, prob)
    with pytest.raises(ValueError):
        step_phi(*pair, prob)


def test_result_serialization(tmp_path):
    prob = problem(presets.competing_species(-1.0), Grid(60, 80), FINAL_TIME, max_iters=2)
    res = run(prob)
    res.params = {"beta": -1.0}
    res.write_error_history(tmp_path / "e.csv")
    res.write_profiles(tmp_path / "p.csv")
    res.write_summary(tmp_path / "s.json")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "iter,err_f1,err_f2" and len(lines) == res.iterations + 2
    assert (tmp_path / "p.csv").read_text().startswith("iter,species,abscissa,value\n")
    assert '"verdict"' in (tmp_path / "s.json").read_text()
    assert (res.contraction_q < 1) == (res.verdict is Verdict.CONVERGED)
