# coding: utf-8

# # From a simulation to working data
#
# Measurements are sparse samples of either the final state u(x, T) or the
# values at one end x=1 over time.  Before reconstruction they are smoothed
# onto a dense grid, which also gives the derivatives the update needs.

# In[1]:

import numpy as np

from rdident import Grid, presets, solve_forward
from rdident.data import (FINAL_TIME, TIME_TRACE, estimate_range, sample_measurement,
                          smooth_spatial, smooth_temporal)

spec = presets.competing_species(-1.0)
grid = Grid(200, 300)
traj = solve_forward(spec, grid)

# Twenty samples of u(., T) with 1% relative noise.

# In[2]:

m = sample_measurement(traj, FINAL_TIME, S=20, delta=0.01, seed=3)
print(m.abscissae[:4], m.values[:, :4])

# The spatial smoother expands the samples in eigenfunctions of the
# boundary-value problem and damps the high modes.  The damping level
# follows the discrepancy principle: residual about the size of the noise.

# In[3]:

d = smooth_spatial(m, spec.bc, grid.x)
print("filter levels:", d.mu)
print("max error of the smoothed u(., T):", np.abs(d.values[0] - traj.final[0]).max())

# Time traces use a penalized spline anchored at the initial value.  The
# derivative is compared away from the first instants, where the solution
# has a fast initial layer that no smoother resolves from 25 samples.

# In[4]:

mt = sample_measurement(traj, TIME_TRACE, S=25, delta=0.01, seed=3)
anchor = traj.values[:, 0, -1]
late = grid.t >= 0.1
exact_rate = np.gradient(traj.trace()[0], grid.t)
for mu in (0.0, None):
    dt = smooth_temporal(mt, grid.t, anchor, mu=mu)
    err = np.sqrt(np.mean((dt.d1[0] - exact_rate)[late] ** 2))
    print(f"mu={mu}: rms error in the time derivative {err:.3f}")

# The data ranges define where the unknown functions live.

# In[5]:

print(estimate_range(d))
print(estimate_range(smooth_temporal(mt, grid.t, anchor)))
