# coding: utf-8

# # Checking the hypotheses
#
# Convergence is expected when the reactions are dissipative, the time
# derivative decays and the data range covers the states the solution
# visits.  None of this is guaranteed for a given run, but each can be
# checked numerically.

# In[1]:

import numpy as np

from rdident import Grid, RangeInterval, presets, solve_forward
from rdident.data import (FINAL_TIME, TIME_TRACE, estimate_range, sample_measurement,
                          smooth_spatial, smooth_temporal)
from rdident.diagnostics import (competing_beta_bound, decay_fit, dissipativity_check,
                                 range_condition_check)

grid = Grid(200, 300)

# For f(u) = -u the decay rate is known exactly: pi^2/4 + 1.

# In[2]:

traj = solve_forward(presets.eigen_mode(-1.0), grid)
fit = decay_fit(traj)
print(fit.c2, np.pi**2 / 4 + 1)

# The eigen solution only shrinks, so u(., T) never reaches the larger
# values seen earlier.  The range condition fails.

# In[3]:

spec = presets.eigen_mode(0.5)
traj = solve_forward(spec, grid)
J = estimate_range(smooth_spatial(sample_measurement(traj, FINAL_TIME), spec.bc, grid.x))
print(range_condition_check(traj, J).to_text())

# The competing-species system: final-time and trace ranges side by side.

# In[4]:

spec = presets.competing_species(-1.0)
traj = solve_forward(spec, grid)
J_final = estimate_range(smooth_spatial(sample_measurement(traj, FINAL_TIME), spec.bc, grid.x))
J_trace = estimate_range(smooth_temporal(sample_measurement(traj, TIME_TRACE), grid.t,
                                         traj.values[:, 0, -1]))
print(range_condition_check(traj, J_final).to_text())
print(range_condition_check(traj, J_trace).to_text())

# Dissipativity of the reaction Jacobian on the data ranges, and the largest
# competing interaction the 2x2 test admits for decreasing reactions.

# In[5]:

print(dissipativity_check(spec, J_final).to_text())
lin = presets.eigen_mode(-1.0)
print("bound for f1 = f2 = -u on [0, 1]:",
      competing_beta_bound(lin.f1, lin.f2, [RangeInterval(0.0, 1.0)] * 2))
