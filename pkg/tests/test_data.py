import numpy as np
import pytest

from rdident import presets
from rdident.basis import RangeInterval
from rdident.data import (DEFAULT_S, FINAL_TIME, TIME_TRACE, Measurement, SmoothedData,
                          estimate_range, invertibility_margin, sample_measurement,
                          smooth_spatial, smooth_temporal)
from rdident.errors import DegenerateRange, IllConditioned
from rdident.forward import eigenbasis, solve_forward
from rdident.model import PRODUCT, Coupling, Dirichlet, Grid, Neumann, Trajectory

DN = (Dirichlet(), Neumann())
BC = (DN, DN)


@pytest.fixture(scope="module")
def competing():
    g = Grid(200, 300)
    spec = presets.competing_species(-1.0)
    return spec, g, solve_forward(spec, g)


def trace_traj(h_u, h_v, grid):
    """Trajectory whose right-end trace is (h_u, h_v); the interior is irrelevant."""
    vals = np.zeros((2, grid.nt, grid.nx))
    vals[0] = h_u(grid.t)[:, None]
    vals[1] = h_v(grid.t)[:, None]
    return Trajectory(vals, grid)


class TestSampling:
    def test_noise_free_samples_are_exact(self, competing):
        _, g, tr = competing
        # sample times jT/S land on grid levels when S = nt - 1
        m = sample_measurement(tr, TIME_TRACE, S=g.nt - 1)
        assert m.delta == 0.0
        assert np.allclose(m.values, tr.trace("right")[:, 1:], rtol=0, atol=1e-14)

    def test_default_sizes(self, competing):
        _, _, tr = competing
        assert sample_measurement(tr, FINAL_TIME).S == DEFAULT_S[FINAL_TIME] == 20
        assert sample_measurement(tr, TIME_TRACE).S == 25

    def test_noise_mean_is_zero(self, competing):
        _, g, tr = competing
        clean = sample_measurement(tr, TIME_TRACE, S=g.nt - 1)
        draws = []
        for seed in range(40):
            noisy = sample_measurement(tr, TIME_TRACE, S=g.nt - 1, delta=0.01, seed=seed)
            scale = 0.01 * np.max(np.abs(clean.values), axis=1, keepdims=True)
            draws.append(((noisy.values - clean.values) / scale).ravel())
        draws = np.concatenate(draws)
        assert draws.size >= 10_000
        assert np.all(np.abs(draws) <= 1.0 + 1e-9)
        assert abs(draws.mean()) <= 3 * draws.std() / np.sqrt(draws.size)

    def test_deterministic_per_seed(self, competing):
        _, _, tr = competing
        a = sample_measurement(tr, FINAL_TIME, delta=0.01, seed=7)
        b = sample_measurement(tr, FINAL_TIME, delta=0.01, seed=7)
        c = sample_measurement(tr, FINAL_TIME, delta=0.01, seed=8)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_too_many_samples(self, competing):
        _, g, tr = competing
        with pytest.raises(ValueError):
            sample_measurement(tr, FINAL_TIME, S=g.nx + 1)

    def test_csv_round_trip(self, competing, tmp_path):
        _, _, tr = competing
        m = sample_measurement(tr, TIME_TRACE, delta=0.001, seed=3)
        m.to_csv(tmp_path / "m.csv")
        back = Measurement.from_csv(tmp_path / "m.csv")
        assert back.kind == m.kind and back.seed == 3 and back.delta == m.delta
        assert np.array_equal(back.values, m.values)
        assert np.array_equal(back.abscissae, m.abscissae)


class TestMeasurementInvariants:
    def test_needs_four_samples(self):
        with pytest.raises(ValueError):
            Measurement(FINAL_TIME, np.arange(3.0), np.zeros((2, 3)))

    def test_increasing(self):
        with pytest.raises(ValueError):
            Measurement(FINAL_TIME, np.array([0.0, 0.2, 0.1, 0.3]), np.zeros((2, 4)))


class TestSpatialSmoothing:
    def test_first_eigenfunction_recovered(self):
        x = (np.arange(1, 21) - 0.5) / 20
        lam, phi = eigenbasis(1, x, DN)
        m = Measurement(FINAL_TIME, x, np.stack([phi[:, 0], phi[:, 0]]))
        xd = np.linspace(0, 1, 200)
        d = smooth_spatial(m, BC, xd, ncoef=20, mu=0.0)
        assert abs(d.coeffs[0, 0] - 1.0) <= 1e-8
        assert np.max(np.abs(d.coeffs[0, 1:])) <= 1e-8
        _, phid = eigenbasis(1, xd, DN)
        assert np.max(np.abs(d.lap[0] + lam[0] * phid[:, 0])) <= 1e-6

    def test_noise_free_interpolant(self, competing):
        spec, g, tr = competing
        m = sample_measurement(tr, FINAL_TIME)
        d = smooth_spatial(m, spec.bc, g.x)
        assert np.max(np.abs(d.values - tr.final)) <= 1e-4

    def test_reproduces_samples_with_full_basis(self, competing):
        spec, g, tr = competing
        m = sample_measurement(tr, FINAL_TIME)
        d = smooth_spatial(m, spec.bc, m.abscissae, ncoef=m.S, mu=0.0)
        assert np.max(np.abs(d.values - m.values)) <= 1e-8

    def test_filter_beats_finite_differences_on_noise(self, competing):
        spec, g, tr = competing
        m = sample_measurement(tr, FINAL_TIME, delta=0.01, seed=1)
        d = smooth_spatial(m, spec.bc, m.abscissae)
        true_lap = np.gradient(np.gradient(tr.final, g.x, axis=1), g.x, axis=1)
        ref = np.array([np.interp(m.abscissae, g.x, true_lap[s]) for s in range(2)])
        h = m.abscissae[1] - m.abscissae[0]
        fd = (m.values[:, 2:] - 2 * m.values[:, 1:-1] + m.values[:, :-2]) / h**2
        assert np.linalg.norm(d.lap[:, 1:-1] - ref[:, 1:-1]) < np.linalg.norm(fd - ref[:, 1:-1])

    def test_penalty_monotone_in_mu(self, competing):
        spec, g, tr = competing
        m = sample_measurement(tr, FINAL_TIME, delta=0.01, seed=2)
        lam, _ = eigenbasis(20, g.x, DN)
        semis = [np.sum(lam**2 * smooth_spatial(m, spec.bc, g.x, mu=mu).coeffs[0] ** 2)
                 for mu in (0.0, 1e-8, 1e-6, 1e-4, 1e-2)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(semis, semis[1:]))

    def test_too_many_modes_without_filter(self, competing):
        spec, g, tr = competing
        m = sample_measurement(tr, FINAL_TIME, S=10)
        with pytest.raises(IllConditioned):
            smooth_spatial(m, spec.bc, g.x, ncoef=15, mu=0.0)


class TestTemporalSmoothing:
    t = np.linspace(0, 1, 300)

    def test_linear_slope(self):
        g = Grid(20, 300)
        m = sample_measurement(trace_traj(lambda t: 3 * t, lambda t: -t, g), TIME_TRACE)
        d = smooth_temporal(m, self.t, [0.0, 0.0], mu=1e-12)
        assert np.max(np.abs(d.d1[0] - 3.0)) <= 1e-6
        assert np.max(np.abs(d.d1[1] + 1.0)) <= 1e-6

    def test_interpolates_with_zero_penalty(self, competing):
        _, g, tr = competing
        m = sample_measurement(tr, TIME_TRACE)
        d = smooth_temporal(m, m.abscissae, tr.values[:, 0, -1], mu=0.0)
        assert np.max(np.abs(d.values - m.values)) <= 1e-12

    def test_smoothing_improves_derivative(self, competing):
        _, g, tr = competing
        truth = np.gradient(tr.trace("right"), g.t, axis=1)
        m = sample_measurement(tr, TIME_TRACE, delta=0.01, seed=5)
        anchor = tr.values[:, 0, -1]
        smooth = smooth_temporal(m, g.t, anchor)
        raw = smooth_temporal(m, g.t, anchor, mu=0.0)
        assert np.linalg.norm(smooth.d1 - truth) < np.linalg.norm(raw.d1 - truth)


class TestRange:
    def test_constant_is_degenerate(self):
        d = SmoothedData(FINAL_TIME, np.linspace(0, 1, 5), np.ones((2, 5)), np.zeros((2, 5)))
        with pytest.raises(DegenerateRange):
            estimate_range(d)

    def test_monotone(self):
        x = np.linspace(0, 1, 11)
        d = SmoothedData(FINAL_TIME, x, np.stack([2 * x, x]), np.ones((2, 11)))
        assert estimate_range(d) == [RangeInterval(0.0, 2.0), RangeInterval(0.0, 1.0)]

    def test_eigen_final_range(self):
        g = Grid(200, 300)
        c = 0.5
        tr = solve_forward(presets.eigen_mode(c), g)
        m = sample_measurement(tr, FINAL_TIME)
        J = estimate_range(smooth_spatial(m, BC, g.x))
        decay = np.exp(-((np.pi / 2) ** 2 - c))
        assert J[0].lo == pytest.approx(0.0, abs=1e-4)
        assert J[0].hi == pytest.approx(np.sqrt(2) * decay, abs=1e-4)

    def test_matches_true_final_range(self, competing):
        spec, g, tr = competing
        J = estimate_range(smooth_spatial(sample_measurement(tr, FINAL_TIME), spec.bc, g.x))
        for s in range(2):
            assert J[s].lo == pytest.approx(tr.final[s].min(), abs=1e-4)
            assert J[s].hi == pytest.approx(tr.final[s].max(), abs=1e-4)


class TestInvertibility:
    t = np.linspace(0, 1, 101)

    def test_identity_coupling(self):
        d = SmoothedData(TIME_TRACE, self.t, np.stack([0.3 * self.t + self.t**2, self.t]),
                         np.stack([0.3 + 2 * self.t, np.ones_like(self.t)]))
        ident = Coupling(lambda u, v: u, lambda u, v: np.ones_like(u), lambda u, v: np.zeros_like(u))
        assert invertibility_margin(d, ident)[0] == pytest.approx(0.3)

    def test_interior_extremum(self):
        h = (self.t - 0.5) ** 2
        d = SmoothedData(TIME_TRACE, self.t, np.stack([h, h]), np.stack([2 * (self.t - 0.5)] * 2))
        assert invertibility_margin(d)[0] == 0.0

    def test_product_coupling_on_interaction_data(self):
        g = Grid(200, 300)
        spec = presets.interaction(1.0)
        tr = solve_forward(spec, g)
        m = sample_measurement(tr, TIME_TRACE)
        d = smooth_temporal(m, g.t, tr.values[:, 0, -1])
        assert invertibility_margin(d, PRODUCT)[0] > 0
