"""Finite-difference forward solver.

A second-order Crank-Nicolson / central-difference scheme is run on the
requested grid and on the grid with dx and dt halved; the two solutions are
combined by Richardson extrapolation, ``(4 u_fine - u_coarse) / 3``, which
cancels the leading O(dx^2 + dt^2) error term.
"""

from __future__ import annotations

import numpy as np

from ._banded import solve_block_tridiagonal
from .errors import BlowUp, GridTooCoarse, NewtonDivergence, UnsupportedBC
from .model import Grid, SystemSpec, Trajectory

NEWTON_TOL = 1e-10
NEWTON_MAXITER = 25
STARTUP_LEVELS = 4
_XSTEP = 1e-5
_TSTEP = 1e-5


class _Operator:
    """Tridiagonal stencil of ``a u_xx - q u`` with boundary rows eliminated.

    Dirichlet rows are flagged in ``fixed``; Neumann/Robin rows use a ghost
    node removed through the boundary identity, leaving a forcing term in
    ``forcing(t)``.
    """

    def __init__(self, spec: SystemSpec, grid: Grid):
        n, h, a = grid.nx, grid.dx, spec.a
        x = grid.x
        q = np.asarray(spec.q(x) if callable(spec.q) else np.full(n, float(spec.q)), dtype=float)
        self.lower = np.zeros((n, 2))
        self.diag = np.zeros((n, 2))
        self.upper = np.zeros((n, 2))
        self.fixed = np.zeros((n, 2), dtype=bool)
        self.bcs = spec.bc
        self.length = grid.length
        self.q_at = q
        self.robin = np.array([[b.gamma if b.kind == "robin" else 0.0 for b in pair] for pair in spec.bc])
        self.n = n
        self.h = h
        self.a = a
        for s in range(2):
            self.lower[1:, s] = a / h**2
            self.upper[:-1, s] = a / h**2
            self.diag[:, s] = -2 * a / h**2 - q
            left, right = spec.bc[s]
            if left.kind == "dirichlet":
                self.fixed[0, s] = True
                self.upper[0, s] = 0.0
                self.diag[0, s] = 0.0
            else:
                self.upper[0, s] = 2 * a / h**2
                self.diag[0, s] -= 2 * a * left.gamma / h
            if right.kind == "dirichlet":
                self.fixed[-1, s] = True
                self.lower[-1, s] = 0.0
                self.diag[-1, s] = 0.0
            else:
                self.lower[-1, s] = 2 * a / h**2
                self.diag[-1, s] -= 2 * a * right.gamma / h
        self.lower[0] = 0.0
        self.upper[-1] = 0.0

    def apply(self, state):
        """(2, n) -> (2, n); boundary forcing not included."""
        out = self.diag.T * state
        out[:, 1:] += self.lower[1:].T * state[:, :-1]
        out[:, :-1] += self.upper[:-1].T * state[:, 1:]
        return out

    def forcing(self, t):
        b = np.zeros((2, self.n))
        for s in range(2):
            left, right = self.bcs[s]
            if left.kind != "dirichlet":
                b[s, 0] = 2 * self.a * left(t) / self.h
            if right.kind != "dirichlet":
                b[s, -1] = 2 * self.a * right(t) / self.h
        return b

    def boundary_correction(self, spec, t, state):
        """Third-derivative term of the ghost-node expansion at flux ends.

        The ghost value ``u_{N+1} = u_{N-1} + 2h u_x + h^3/3 u_xxx`` is used
        with ``u_xxx`` taken from the x-derivative of the PDE at the boundary,
        which keeps the scheme's error expansion even in h.  The ``-gamma u_t``
        part of a Robin end is left to the caller.
        """
        corr = np.zeros((2, self.n))
        h, a = self.h, self.a
        for end, idx, sign in (("left", 0, -1.0), ("right", -1, 1.0)):
            bcs = [self.bcs[s][0 if end == "left" else 1] for s in range(2)]
            if all(b.kind == "dirichlet" for b in bcs):
                continue
            xb = 0.0 if end == "left" else self.length
            ub = state[:, idx]
            ux = np.empty(2)
            for s in range(2):
                if bcs[s].kind == "dirichlet":
                    edge = state[s, :5] if end == "left" else state[s, ::-1][:5]
                    ux[s] = -sign * (edge @ _D1) / h
                else:
                    ux[s] = sign * (bcs[s](t) - bcs[s].gamma * ub[s])
            xs = np.array([xb - _XSTEP, xb + _XSTEP])
            uu, vv = np.full(2, ub[0]), np.full(2, ub[1])
            rm, rp = np.array(spec.reaction(xs, t, uu, vv)).T
            rx = (rp - rm) / (2 * _XSTEP)
            j11, j12, j21, j22 = (float(np.ravel(j)[0]) for j in
                                  spec.reaction_jacobian(np.array([xb]), t, uu[:1], vv[:1]))
            dxr = rx + np.array([j11 * ux[0] + j12 * ux[1], j21 * ux[0] + j22 * ux[1]])
            for s in range(2):
                if bcs[s].kind == "dirichlet":
                    continue
                theta_t = (bcs[s](t + _TSTEP) - bcs[s](t - _TSTEP)) / (2 * _TSTEP)
                uxxx = (sign * theta_t + self.q_at[idx] * ux[s] - dxr[s]) / a
                corr[s, idx] = sign * a * h / 3.0 * uxxx
        return corr

    def dirichlet_values(self, t):
        vals = np.zeros((2, self.n))
        for s in range(2):
            left, right = self.bcs[s]
            if left.kind == "dirichlet":
                vals[s, 0] = left(t)
            if right.kind == "dirichlet":
                vals[s, -1] = right(t)
        return vals


def _check(state, cap, t):
    if not np.all(np.isfinite(state)):
        raise BlowUp(f"non-finite values at t={t:.6g}")
    peak = np.max(np.abs(state))
    if peak > cap:
        raise BlowUp(f"|u| = {peak:.3g} exceeds cap {cap:.3g} at t={t:.6g}")


def cn_step(state, t, dt, spec: SystemSpec, grid: Grid, op: _Operator | None = None,
            reaction_now=None, theta: float = 0.5):
    """Advance ``state`` (2, nx) from ``t`` to ``t + dt`` by Crank-Nicolson.

    The nonlinear stage equations are solved by Newton's method on the
    coupled block system with the analytic reaction Jacobian.  Returns the new
    state and the reaction evaluated there (reusable as ``reaction_now`` for
    the next step).  ``theta=1`` gives an implicit Euler step instead.
    """
    if op is None:
        op = _Operator(spec, grid)
    x = grid.x
    u, v = state
    if reaction_now is None:
        reaction_now = np.array(spec.reaction(x, t, u, v))
    t1 = t + dt
    half = theta * dt
    explicit = state + half * op.forcing(t1)
    if theta < 1.0:
        explicit += (1.0 - theta) * dt * (op.apply(state) + op.forcing(t) + reaction_now
                                          + op.boundary_correction(spec, t, state))
    # Robin ends: the -gamma u_t part of the ghost correction, time-averaged
    robin = np.zeros((2, grid.nx))
    robin[:, 0] = op.robin[:, 0]
    robin[:, -1] = op.robin[:, 1]
    robin *= grid.dx / 3.0
    fixed = op.fixed.T
    target = op.dirichlet_values(t1)

    U = state.copy()
    U[fixed] = target[fixed]
    scale = max(1.0, float(np.max(np.abs(state))))
    lower = np.ascontiguousarray(-half * op.lower)
    upper = np.ascontiguousarray(-half * op.upper)
    lower[op.fixed] = 0.0
    upper[op.fixed] = 0.0
    for _ in range(NEWTON_MAXITER + 1):
        R = np.array(spec.reaction(x, t1, U[0], U[1]))
        G = U - half * (op.apply(U) + R + op.boundary_correction(spec, t1, U)) - explicit
        G += robin * (U - state)
        G[fixed] = (U - target)[fixed]
        res = float(np.max(np.abs(G)))
        if not np.isfinite(res):
            raise NewtonDivergence(f"non-finite residual at t={t1:.6g}")
        if res < NEWTON_TOL * scale:
            return U, R
        if _ == NEWTON_MAXITER:
            break
        j11, j12, j21, j22 = spec.reaction_jacobian(x, t1, U[0], U[1])
        diag = np.empty((grid.nx, 2, 2))
        diag[:, 0, 0] = 1.0 - half * (op.diag[:, 0] + j11) + robin[0]
        diag[:, 0, 1] = -half * j12
        diag[:, 1, 0] = -half * j21
        diag[:, 1, 1] = 1.0 - half * (op.diag[:, 1] + j22) + robin[1]
        for s in range(2):
            rows = op.fixed[:, s]
            diag[rows, s, :] = 0.0
            diag[rows, s, s] = 1.0
        delta = solve_block_tridiagonal(lower, diag, upper, np.ascontiguousarray(G.T))
        U = U - delta.T
    raise NewtonDivergence(
        f"Newton residual {res:.3g} above tolerance after {NEWTON_MAXITER} iterations at t={t1:.6g}"
    )


def _euler_chain(state, t, dt, n, spec, grid, op):
    for j in range(n):
        state, _ = cn_step(state, t + j * dt / n, dt / n, spec, grid, op, theta=1.0)
    return state


def startup_step(state, t, dt, spec: SystemSpec, grid: Grid, op: _Operator | None = None,
                 levels: int = STARTUP_LEVELS):
    """High-order, strongly damping step built from implicit Euler.

    Chains of 1, 2, ..., ``levels`` implicit Euler substeps are combined by
    polynomial extrapolation in the substep size.  Every chain sends stiff
    modes to zero, so the combination does too, while the local error is
    O(dt^(levels+1)).
    """
    if op is None:
        op = _Operator(spec, grid)
    table = [_euler_chain(state, t, dt, n, spec, grid, op) for n in range(1, levels + 1)]
    # Aitken-Neville on the substep sequence dt/1, dt/2, ..., dt/levels
    for k in range(1, levels):
        table = [table[j] + (table[j] - table[j - 1]) / ((j + k) / j - 1.0)
                 for j in range(1, len(table))]
    return table[0]


def solve_cn(spec: SystemSpec, grid: Grid, startup: int = 1) -> np.ndarray:
    """Plain second-order solve; returns values[species, time, space].

    The first ``startup`` steps are replaced by one :func:`startup_step`
    across the same time span (``startup=0`` is pure Crank-Nicolson).
    Crank-Nicolson alone leaves an undamped oscillation behind when the
    initial data do not match the boundary conditions to high order.
    """
    op = _Operator(spec, grid)
    x, times, dt = grid.x, grid.t, grid.dt
    out = np.empty((2, grid.nt, grid.nx))
    state = np.array(spec.initial(x))
    _check(state, spec.blowup_cap, 0.0)
    out[:, 0] = state
    R = None
    if startup:
        if startup >= grid.nt:
            raise GridTooCoarse("start-up span exceeds the time grid")
        end = startup_step(state, 0.0, startup * dt, spec, grid, op)
        # intermediate levels of the start-up span are interpolated linearly
        for j in range(1, startup + 1):
            out[:, j] = state + (end - state) * (j / startup)
        state = end
        _check(state, spec.blowup_cap, times[startup])
    for k in range(startup, grid.nt - 1):
        state, R = cn_step(state, times[k], dt, spec, grid, op, R)
        _check(state, spec.blowup_cap, times[k + 1])
        out[:, k + 1] = state
    return out


def solve_forward(spec: SystemSpec, grid: Grid, extrapolate: bool = True) -> Trajectory:
    """Solve the system on ``grid``; fourth order when ``extrapolate``."""
    coarse = solve_cn(spec, grid)
    if not extrapolate:
        return Trajectory(coarse, grid)
    # the fine solve covers the same start-up span as the coarse one, so the
    # start-up error is common to both and the extrapolation stays fourth order
    fine = solve_cn(spec, grid.refined(), startup=2)[:, ::2, ::2]
    values = (4.0 * fine - coarse) / 3.0
    _check(values, spec.blowup_cap, grid.T)
    return Trajectory(values, grid)


def time_derivative_at_T(traj: Trajectory) -> np.ndarray:
    """Backward 4-point difference in time at t = T, shape (2, nx)."""
    if traj.grid.nt < 5:
        raise GridTooCoarse("need nt >= 5 for the one-sided time derivative")
    v = traj.values
    return (11 * v[:, -1] - 18 * v[:, -2] + 9 * v[:, -3] - 2 * v[:, -4]) / (6 * traj.grid.dt)


_D2 = np.array([35.0, -104.0, 114.0, -56.0, 11.0]) / 12.0
_D1 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def _edge(values, endpoint):
    if endpoint == "left":
        return values[..., :5]
    if endpoint == "right":
        return values[..., ::-1][..., :5]
    raise ValueError("endpoint must be 'left' or 'right'")


def laplacian_at_boundary(traj: Trajectory, endpoint: str = "right", a: float = 1.0, q=0.0) -> np.ndarray:
    """``a u_xx - q u`` at a boundary node for every time level, shape (2, nt)."""
    if traj.grid.nx < 6:
        raise GridTooCoarse("need nx >= 6 for the one-sided second derivative")
    h = traj.grid.dx
    edge = _edge(traj.values, endpoint)
    uxx = edge @ _D2 / h**2
    x0 = 0.0 if endpoint == "left" else traj.grid.length
    qv = float(q(x0)) if callable(q) else float(q)
    return a * uxx - qv * edge[..., 0]


def flux_at_boundary(traj: Trajectory, endpoint: str = "right", a: float = 1.0) -> np.ndarray:
    """Outward flux ``a du/dnu`` at a boundary node, shape (2, nt)."""
    if traj.grid.nx < 6:
        raise GridTooCoarse("need nx >= 6 for the one-sided first derivative")
    edge = _edge(traj.values, endpoint)
    # the reversed right-hand stencil points inward, so d/dx flips sign there;
    # the outward normal flips it back on the left
    return -a * (edge @ _D1) / traj.grid.dx


def _bc_pattern(bcpair):
    kinds = []
    for b in bcpair:
        if b.kind == "robin":
            raise UnsupportedBC("closed-form eigenpairs need Dirichlet or Neumann ends")
        kinds.append(b.kind[0].upper())
    return "".join(kinds)


def eigenbasis(ncoef: int, x, bcpair, length: float = 1.0, a: float = 1.0, q: float = 0.0,
               derivative: bool = False):
    """First ``ncoef`` eigenpairs of ``-(a d^2/dx^2 - q)`` with homogeneous BCs.

    Returns (lam, phi) with ``phi`` of shape (len(x), ncoef), L2-orthonormal
    on (0, length); with ``derivative=True`` also the x-derivatives of phi.
    """
    if callable(q):
        raise UnsupportedBC("closed-form eigenpairs need a constant potential")
    pattern = _bc_pattern(bcpair)
    x = np.asarray(x, dtype=float)
    n = np.arange(1, ncoef + 1)
    amp = np.sqrt(2.0 / length)
    if pattern in ("DD", "DN"):
        k = (n if pattern == "DD" else n - 0.5) * np.pi / length
        phi = amp * np.sin(np.outer(x, k))
        dphi = amp * k * np.cos(np.outer(x, k))
    else:
        k = (n - 0.5 if pattern == "ND" else n - 1.0) * np.pi / length
        phi = amp * np.cos(np.outer(x, k))
        dphi = -amp * k * np.sin(np.outer(x, k))
        if pattern == "NN":
            phi[:, 0] = 1.0 / np.sqrt(length)
    lam = a * k**2 + q
    if derivative:
        return lam, phi, dphi
    return lam, phi


def eigenpair(n: int, grid: Grid, bc, a: float = 1.0, q: float = 0.0):
    """(lambda_n, phi_n on grid.x) for the n-th (1-based) eigenpair."""
    if n < 1:
        raise ValueError("eigen index is 1-based")
    lam, phi = eigenbasis(n, grid.x, bc, grid.length, a, q)
    return float(lam[-1]), phi[:, -1]
