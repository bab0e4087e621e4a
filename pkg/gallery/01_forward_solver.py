# coding: utf-8

# # Solving the forward problem
#
# The solver advances a pair of reaction-diffusion equations with
# Crank-Nicolson steps, then combines a coarse and a refined run so the
# leading error cancels.  Here we check it against an exact solution and
# watch the error fall as the grid is refined.

# In[1]:

import numpy as np

from rdident import Grid, presets, solve_forward

# With a linear reaction c*u and the first eigenfunction as initial data,
# the solution just decays: u = exp(-(pi^2/4 - c) t) sqrt(2) sin(pi x / 2).

# In[2]:

grid = Grid(200, 300)
traj = solve_forward(presets.eigen_mode(0.5), grid)
exact = presets.eigen_exact(grid.x, grid.t)
print("max error against the exact solution:", np.max(np.abs(traj.u - exact)))

# The trajectory holds both species on every node; `final` is the last time
# level and `trace` the boundary values over time.

# In[3]:

print(traj.values.shape)          # (species, time, space)
print(traj.final[:, ::50])
print(traj.trace("right")[:, ::60])

# # Refinement study
#
# A nonlinear coupled system with a known solution is built by adding the
# matching source terms.  Halving both steps should cut the final-time
# error by about 2^4.

# In[4]:

from rdident.model import Dirichlet, Neumann, Source, SystemSpec, Univariate


def u_ex(x, t):
    return np.exp(-t) * np.sin(2 * x + 0.3) + 1


def v_ex(x, t):
    return (1 + t * t) * (x**3 + 1)


f1 = Univariate(lambda s: -s**3, lambda s: -3 * s**2)
f2 = Univariate(np.sin, np.cos)
src_u = Source(lambda x, t, u, v: -np.exp(-t) * np.sin(2 * x + 0.3)
               + 4 * np.exp(-t) * np.sin(2 * x + 0.3) - f1(u_ex(x, t)) - 0.5 * u_ex(x, t) * v_ex(x, t))
src_v = Source(lambda x, t, u, v: 2 * t * (x**3 + 1) - (1 + t * t) * 6 * x
               - f2(v_ex(x, t)) - 0.5 * u_ex(x, t) * v_ex(x, t))
ends = ((Dirichlet(lambda t: u_ex(0, t)), Neumann(lambda t: 2 * np.exp(-t) * np.cos(2.3))),
        (Dirichlet(lambda t: v_ex(0, t)), Neumann(lambda t: 3 * (1 + t * t))))
spec = SystemSpec(f1=f1, f2=f2, beta_u=0.5, beta_v=0.5, r_u=src_u, r_v=src_v,
                  u0=lambda x: u_ex(x, 0), v0=lambda x: v_ex(x, 0), bc=ends)

errors = []
for n in (21, 41, 81):
    g = Grid(n, n)
    tr = solve_forward(spec, g)
    errors.append(max(np.abs(tr.u[-1] - u_ex(g.x, 1.0)).max(), np.abs(tr.v[-1] - v_ex(g.x, 1.0)).max()))
print("errors:", errors)
print("observed orders:", np.log2(np.array(errors[:-1]) / errors[1:]))

# Without the extrapolation the same runs are second order.

# In[5]:

plain = []
for n in (21, 41, 81):
    g = Grid(n, n)
    tr = solve_forward(spec, g, extrapolate=False)
    plain.append(np.abs(tr.u[-1] - u_ex(g.x, 1.0)).max())
print("plain Crank-Nicolson orders:", np.log2(np.array(plain[:-1]) / plain[1:]))
