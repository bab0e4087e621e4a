import numpy as np
import pytest

from rdident import presets
from rdident.errors import BlowUp, ForwardFailure, GridTooCoarse, UnsupportedBC
from rdident.forward import (cn_step, eigenbasis, eigenpair, laplacian_at_boundary, solve_forward,
                             time_derivative_at_T)
from rdident.model import (Dirichlet, Grid, Neumann, Robin, Source, SystemSpec, Trajectory,
                           Univariate, linear)

DN = (Dirichlet(), Neumann())


def field_traj(fn, grid):
    X, T = np.meshgrid(grid.x, grid.t)
    u = fn(X, T)
    return Trajectory(np.stack([u, 2 * u]), grid)


def test_zero_data_stays_zero():
    g = Grid(21, 11)
    out, _ = cn_step(np.zeros((2, g.nx)), 0.0, g.dt, SystemSpec(), g)
    assert np.array_equal(out, np.zeros((2, g.nx)))


def test_single_step_matches_eigenmode():
    g = Grid(201, 301)
    c = 0.5
    lam, phi = eigenpair(1, g, DN)
    spec = presets.eigen_mode(c)
    state = np.stack([phi, phi])
    dt = 1e-3
    out, _ = cn_step(state, 0.0, dt, spec, g)
    expected = np.exp(-(lam - c) * dt) * phi
    # the spatial error of the 201-node grid dominates the dt^3 local error
    assert np.max(np.abs(out[0] - expected)) < 1e-5


def test_manufactured_step_error_is_third_order_in_dt():
    # u* = exp(-t) sin(pi x / 2) solves u_t = u_xx + r with Dirichlet/Neumann ends
    k = np.pi / 2
    r = Source(lambda x, t, u, v: (k**2 - 1) * np.exp(-t) * np.sin(k * x))
    spec = SystemSpec(r_u=r, r_v=r, u0=lambda x: np.sin(k * x), v0=lambda x: np.sin(k * x))
    g = Grid(401, 3)
    u0 = np.sin(k * g.x)
    errs = []
    for dt in (0.04, 0.02):
        out, _ = cn_step(np.stack([u0, u0]), 0.0, dt, spec, g)
        errs.append(np.max(np.abs(out[0] - np.exp(-dt) * u0)))
    assert np.log2(errs[0] / errs[1]) > 2.7


def test_eigen_solution_accuracy():
    g = Grid(200, 300)
    tr = solve_forward(presets.eigen_mode(0.5), g)
    exact = presets.eigen_exact(g.x, g.t, 0.5)
    assert np.max(np.abs(tr.u - exact)) <= 1e-4
    assert np.max(np.abs(tr.v - exact)) <= 1e-4


def test_blowup_is_reported():
    spec = SystemSpec(f1=linear(50.0), u0=lambda x: np.sin(np.pi / 2 * x), blowup_cap=1e3)
    with pytest.raises(BlowUp):
        solve_forward(spec, Grid(21, 41))


def test_superlinear_growth_is_a_forward_failure():
    spec = SystemSpec(f1=Univariate(lambda u: u**3, lambda u: 3 * u**2),
                      u0=lambda x: 20 * np.sin(np.pi / 2 * x), blowup_cap=1e3)
    with pytest.raises(ForwardFailure):
        solve_forward(spec, Grid(21, 41))


def test_deterministic():
    spec = presets.competing_species(-1.0)
    a = solve_forward(spec, Grid(31, 31))
    b = solve_forward(spec, Grid(31, 31))
    assert np.array_equal(a.values, b.values)


def test_decreasing_reaction_gives_nonincreasing_maximum():
    spec = SystemSpec(f1=linear(-1.0), f2=linear(-1.0), u0=lambda x: np.sin(np.pi / 2 * x) * (1 + x),
                      v0=lambda x: x * (2 - x))
    tr = solve_forward(spec, Grid(81, 81))
    peak = np.max(np.abs(tr.values), axis=2)
    assert np.all(np.diff(peak, axis=1) <= 1e-12)


def test_robin_end_runs():
    bc = (Dirichlet(), Robin(2.0))
    spec = SystemSpec(u0=lambda x: np.sin(x), v0=lambda x: np.sin(x), bc=(bc, bc))
    tr = solve_forward(spec, Grid(41, 41))
    assert np.all(np.isfinite(tr.values))


class TestTimeDerivative:
    def test_linear_in_time_exact(self):
        g = Grid(21, 11)
        s = np.sin(3 * g.x)
        out = time_derivative_at_T(field_traj(lambda X, T: T * np.sin(3 * X), g))
        assert np.allclose(out[0], s, atol=1e-12)
        assert np.allclose(out[1], 2 * s, atol=1e-12)

    def test_constant_in_time(self):
        g = Grid(21, 11)
        out = time_derivative_at_T(field_traj(lambda X, T: np.cos(X) + 0 * T, g))
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_eigen_solution(self):
        g = Grid(200, 300)
        c = 0.5
        lam, phi = eigenpair(1, g, DN)
        tr = solve_forward(presets.eigen_mode(c), g)
        expected = -(lam - c) * np.exp(-(lam - c) * g.T) * phi
        assert np.max(np.abs(time_derivative_at_T(tr)[0] - expected)) <= 1e-4

    def test_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            time_derivative_at_T(field_traj(lambda X, T: X + T, Grid(11, 4)))


class TestBoundaryLaplacian:
    def test_quadratic_exact(self):
        g = Grid(21, 6)
        tr = field_traj(lambda X, T: X**2 + 0 * T, g)
        a, q = 1.7, 0.3
        right = laplacian_at_boundary(tr, "right", a, q)
        assert np.allclose(right[0], 2 * a - q * 1.0, atol=1e-9)
        left = laplacian_at_boundary(tr, "left", a, q)
        assert np.allclose(left[0], 2 * a, atol=1e-9)

    def test_eigen_solution(self):
        g = Grid(200, 300)
        tr = solve_forward(presets.eigen_mode(0.5), g)
        lam = (np.pi / 2) ** 2
        lap = laplacian_at_boundary(tr, "right")[0]
        ref = -lam * tr.u[:, -1]
        assert np.max(np.abs(lap[5:] - ref[5:]) / np.abs(ref[5:])) <= 1e-3

    def test_zero_field(self):
        g = Grid(21, 6)
        assert np.array_equal(laplacian_at_boundary(field_traj(lambda X, T: 0 * X * T, g)),
                              np.zeros((2, g.nt)))


class TestEigenpair:
    def test_first_value(self):
        lam, _ = eigenpair(1, Grid(200, 10), DN)
        assert lam == pytest.approx((np.pi / 2) ** 2)

    def test_orthonormal(self):
        x = np.linspace(0, 1, 4001)
        _, phi = eigenbasis(6, x, DN)
        w = np.full(len(x), x[1]); w[[0, -1]] /= 2
        assert np.allclose(phi.T @ (w[:, None] * phi), np.eye(6), atol=1e-6)

    def test_discrete_residual(self):
        g = Grid(200, 10)
        for n in (1, 2, 3):
            lam, phi = eigenpair(n, g, DN)
            lap = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / g.dx**2
            resid = np.sqrt(np.mean((lap + lam * phi[1:-1]) ** 2))
            assert resid <= 1e-3 * lam * np.sqrt(np.mean(phi**2))

    def test_robin_unsupported(self):
        with pytest.raises(UnsupportedBC):
            eigenpair(1, Grid(20, 10), (Dirichlet(), Robin(1.0)))
